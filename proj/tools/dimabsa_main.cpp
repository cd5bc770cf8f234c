#include "dimabsa/chat.hpp"
#include "dimabsa/config.hpp"
#include "dimabsa/corpus.hpp"
#include "dimabsa/encoder.hpp"
#include "dimabsa/eval.hpp"
#include "dimabsa/hashing.hpp"
#include "dimabsa/inference.hpp"
#include "dimabsa/prompting.hpp"
#include "dimabsa/retrieval.hpp"
#include "dimabsa/util.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <iostream>
#include <memory>

namespace {

using namespace dimabsa;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::string file_hash(const std::filesystem::path& path) { return sha256_hex(read_text_file(path)); }

PromptTemplate resolve_template(const RunConfig& cfg, TupleMode mode) {
    if (cfg.template_id.empty()) return default_template(mode);
    if (!cfg.templates_file.empty()) {
        TemplatePool pool = load_template_pool(cfg.templates_file, cfg.seed);
        for (const PromptTemplate& t : pool.templates)
            if (t.id == cfg.template_id) return t;
    }
    return find_builtin_template(cfg.template_id);
}

std::vector<IclExample> resolve_fixed_examples(const RunConfig& cfg) {
    std::vector<IclExample> examples =
        cfg.examples_file.empty() ? builtin_fixed_examples() : load_examples_file(cfg.examples_file);
    if (examples.size() < cfg.example_count)
        throw ValidationError("example set holds " + std::to_string(examples.size()) +
                              " examples, need " + std::to_string(cfg.example_count));
    examples.resize(cfg.example_count);
    return examples;
}

TemplatePool resolve_pool(const RunConfig& cfg) {
    return cfg.templates_file.empty() ? builtin_pool(cfg.seed)
                                      : load_template_pool(cfg.templates_file, cfg.seed);
}

std::unique_ptr<ChatClient> make_chat_client(const RunConfig& cfg) {
    if (!cfg.mock_chat_fixture.empty())
        return std::make_unique<MockChatClient>(std::filesystem::path(cfg.mock_chat_fixture));
    if (cfg.chat_url.empty())
        throw ValidationError("no chat endpoint: pass --chat-url or --mock-chat");
    return std::make_unique<HttpChatClient>(cfg.chat_url);
}

std::unique_ptr<EncoderClient> make_encoder_client(const RunConfig& cfg) {
    if (cfg.mock_encoder) return std::make_unique<MockEncoderClient>(cfg.encoder_dim);
    if (cfg.encoder_url.empty())
        throw ValidationError("no encoder endpoint: pass --encoder-url or --mock-encoder");
    return std::make_unique<HttpEncoderClient>(cfg.encoder_url);
}

InferenceOptions make_options(const RunConfig& cfg, const std::filesystem::path& out) {
    InferenceOptions options;
    options.mode = tuple_mode_from_string(cfg.mode);
    options.tmpl = resolve_template(cfg, options.mode);
    options.fixed_examples = resolve_fixed_examples(cfg);
    options.model_id = cfg.chat_model;
    options.temperature = cfg.temperature;
    options.max_tokens = cfg.max_tokens;
    options.parallelism = cfg.parallelism;
    options.manifest_path = out.string() + ".manifest.json";
    return options;
}

RunManifest make_manifest(const RunConfig& cfg, const std::filesystem::path& dataset) {
    RunManifest m;
    m.config_hash = config_hash(cfg);
    m.config_json = serialize_config(cfg);
    m.dataset_hash = file_hash(dataset);
    m.seed = cfg.seed;
    return m;
}

void require_artifact(const std::filesystem::path& path, const std::string& producer) {
    if (!std::filesystem::exists(path))
        throw ValidationError(path.string() + " not found; run `dimabsa " + producer + "` first");
}

int cmd_ingest(const RunConfig& cfg, const std::string& input, const std::string& schema) {
    DatasetSchema s = schema == "test" ? DatasetSchema::test : DatasetSchema::train;
    std::vector<std::string> warnings;
    std::vector<Sample> samples = load_dataset(input, s, &warnings);
    std::size_t quads = 0;
    for (const Sample& sample : samples) quads += sample.gold.size();
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    std::cout << samples.size() << " samples, " << quads << " quadruples, " << warnings.size()
              << " warnings, 0 errors (config " << config_hash(cfg).substr(0, 12) << ")\n";
    return kExitOk;
}

int cmd_stats(const RunConfig& cfg, const std::string& input, const std::string& out) {
    std::vector<Sample> samples = load_dataset(input, DatasetSchema::train);
    std::string body = "# config_hash\t" + config_hash(cfg) + "\n" + format_stats(dataset_stats(samples));
    if (out.empty())
        std::cout << body;
    else
        atomic_write_file(out, body);
    return kExitOk;
}

int cmd_lexicon(const RunConfig& cfg, const std::string& input, const std::string& out) {
    std::vector<Sample> samples = load_dataset(input, DatasetSchema::train);
    std::vector<OpinionLexiconEntry> lexicon = build_lexicon(samples);
    nlohmann::json doc = {{"config_hash", config_hash(cfg)},
                          {"entries", nlohmann::json::parse(serialize_lexicon(lexicon))}};
    std::string body = doc.dump(2) + "\n";
    if (out.empty())
        std::cout << body;
    else
        atomic_write_file(out, body);
    std::cout << lexicon.size() << " lexicon entries\n";
    return kExitOk;
}

int cmd_export_sft(const RunConfig& cfg, const std::string& out) {
    std::vector<Sample> train = load_dataset(cfg.train_path, DatasetSchema::train);
    std::size_t n = export_sft_dataset(train, resolve_pool(cfg), resolve_fixed_examples(cfg),
                                       cfg.example_count, out, config_hash(cfg));
    std::cout << n << " instruction records -> " << out << "\n";
    return kExitOk;
}

int finish_run(const std::vector<Prediction>& predictions, RunManifest& manifest,
               const InferenceOptions& options, const std::string& out, const std::string& hash,
               const char* stage_name) {
    write_manifest(options.manifest_path, manifest);
    write_predictions(out, predictions, hash, options.mode);
    std::size_t failed = 0;
    for (const Prediction& p : predictions) failed += p.failed ? 1 : 0;
    std::cout << stage_name << ": " << predictions.size() << " predictions (" << failed
              << " failed) -> " << out << "\n";
    return failed == 0 ? kExitOk : kExitRuntime;
}

int cmd_stage1(const RunConfig& cfg, const std::string& out) {
    std::vector<Sample> test = load_dataset(cfg.test_path, DatasetSchema::test);
    InferenceOptions options = make_options(cfg, out);
    RunManifest manifest = make_manifest(cfg, cfg.test_path);

    std::unique_ptr<ChatClient> base = make_chat_client(cfg);
    CachingChatClient chat(*base, std::filesystem::path(cfg.cache_dir) / "chat");

    std::vector<Prediction> predictions = predict_stage1(test, options, chat, manifest);
    manifest.endpoint_calls = chat.endpoint_calls();
    return finish_run(predictions, manifest, options, out, config_hash(cfg), "stage1");
}

int cmd_stage2(const RunConfig& cfg, const std::string& stage1_path, const std::string& out) {
    require_artifact(stage1_path, "stage1");
    std::vector<Sample> test = load_dataset(cfg.test_path, DatasetSchema::test);
    std::vector<Sample> train = load_dataset(cfg.train_path, DatasetSchema::train);
    PredictionFile stage1 = read_predictions(stage1_path);

    InferenceOptions options = make_options(cfg, out);
    if (stage1.mode != options.mode)
        throw ValidationError("stage-1 file mode \"" + std::string(to_string(stage1.mode)) +
                              "\" does not match requested mode \"" + cfg.mode + "\"");
    RunManifest manifest = make_manifest(cfg, cfg.test_path);

    std::unique_ptr<ChatClient> chat_base = make_chat_client(cfg);
    CachingChatClient chat(*chat_base, std::filesystem::path(cfg.cache_dir) / "chat");
    std::unique_ptr<EncoderClient> encoder_base = make_encoder_client(cfg);
    EmbedOptions embed_options;
    embed_options.parallelism = cfg.parallelism;
    CachingEncoder encoder(*encoder_base, std::filesystem::path(cfg.cache_dir) / "emb", embed_options);

    OpinionIndex index = OpinionIndex::build(train, encoder);
    std::vector<OpinionLexiconEntry> lexicon = build_lexicon(train);
    PolarityThresholds thresholds{cfg.neutral_lo, cfg.neutral_hi};

    std::vector<Prediction> predictions = predict_stage2(test, stage1.predictions, index, lexicon, cfg.k,
                                                         options, chat, encoder, manifest, thresholds);
    manifest.endpoint_calls = chat.endpoint_calls() + encoder.endpoint_calls();
    return finish_run(predictions, manifest, options, out, config_hash(cfg), "stage2");
}

int cmd_evaluate(const RunConfig& cfg, const std::string& pred, const std::string& gold,
                 std::string task, const std::string& out) {
    require_artifact(pred, "stage1 (or stage2)");
    if (task.empty()) {
        std::string head{trim(read_text_file(pred)).substr(0, 1)};
        task = "both";
        if (head != "[" && read_predictions(pred).mode == TupleMode::triplet) task = "triplet";
    }
    RoundingRule rule = cfg.rounding == "half_even" ? RoundingRule::half_even : RoundingRule::half_up;
    EvalReport report = score_files(pred, gold, task_selector_from_string(task), rule);
    report.config_hash = config_hash(cfg);
    if (!out.empty()) atomic_write_file(out, report_to_json(report));
    std::cout << format_report_table(report);
    return kExitOk;
}

int cmd_report(const std::string& input) {
    EvalReport report = report_from_json_file(input);
    if (!report.config_hash.empty()) std::cout << "# config " << report.config_hash.substr(0, 12) << "\n";
    std::cout << format_report_table(report);
    return kExitOk;
}

void add_common_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--mode", cfg.mode, "triplet | quadruple");
    cmd->add_option("--k", cfg.k, "stage-2 retrieval depth [3,5]");
    cmd->add_option("--example-count", cfg.example_count, "fixed demonstrations [3,4]");
    cmd->add_option("--seed", cfg.seed, "seed for template picking");
    cmd->add_option("--template", cfg.template_id, "template id (builtin or from --templates)");
    cmd->add_option("--templates", cfg.templates_file, "template pool file (10 templates)");
    cmd->add_option("--examples-file", cfg.examples_file, "fixed-example dataset file");
    cmd->add_option("--chat-url", cfg.chat_url, "OpenAI-compatible chat endpoint");
    cmd->add_option("--chat-model", cfg.chat_model, "model id sent to the chat endpoint");
    cmd->add_option("--mock-chat", cfg.mock_chat_fixture, "canned-response fixture (offline runs)");
    cmd->add_option("--encoder-url", cfg.encoder_url, "embedding endpoint");
    cmd->add_flag("--mock-encoder", cfg.mock_encoder, "deterministic hash-based encoder");
    cmd->add_option("--encoder-dim", cfg.encoder_dim, "mock encoder dimension");
    cmd->add_option("--cache-dir", cfg.cache_dir, "response/embedding cache directory");
    cmd->add_option("--parallelism", cfg.parallelism, "concurrent endpoint requests");
    cmd->add_option("--rounding", cfg.rounding, "half_up | half_even");
    cmd->add_option("--neutral-lo", cfg.neutral_lo, "neutral valence band lower bound");
    cmd->add_option("--neutral-hi", cfg.neutral_hi, "neutral valence band upper bound");
    cmd->add_option("--temperature", cfg.temperature, "sampling temperature");
    cmd->add_option("--max-tokens", cfg.max_tokens, "completion token budget");
}

} // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    // --config seeds defaults; explicit flags still win.
    for (int i = 1; i < argc; ++i) {
        std::string_view arg = argv[i];
        try {
            if (arg == "--config" && i + 1 < argc)
                cfg = load_config(argv[i + 1]);
            else if (arg.rfind("--config=", 0) == 0)
                cfg = load_config(std::string(arg.substr(9)));
        } catch (const ValidationError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitValidation;
        }
    }

    CLI::App app{"Two-stage in-context-learning pipeline and scorer for Chinese dimensional ABSA"};
    app.require_subcommand(1);
    std::string config_file;
    app.add_option("--config", config_file, "run configuration JSON")->expected(1);

    std::string input, out, schema = "train", pred, gold, task;

    CLI::App* ingest = app.add_subcommand("ingest", "validate a dataset file");
    ingest->add_option("--input", input)->required();
    ingest->add_option("--schema", schema, "train | test");

    CLI::App* stats = app.add_subcommand("stats", "histogram and scatter data for gold scores");
    stats->add_option("--input", input)->required();
    stats->add_option("--out", out);

    CLI::App* lexicon = app.add_subcommand("lexicon", "build the opinion score lexicon");
    lexicon->add_option("--input", input)->required();
    lexicon->add_option("--out", out);

    CLI::App* export_sft = app.add_subcommand("export-sft", "write the instruction-tuning dataset");
    export_sft->add_option("--train", cfg.train_path);
    export_sft->add_option("--out", out)->required();
    add_common_options(export_sft, cfg);

    CLI::App* stage1 = app.add_subcommand("stage1", "fixed-demonstration predictions");
    stage1->add_option("--test", cfg.test_path);
    stage1->add_option("--out", out)->required();
    add_common_options(stage1, cfg);

    std::string stage1_path = "stage1.jsonl";
    CLI::App* stage2 = app.add_subcommand("stage2", "retrieval-enhanced re-predictions");
    stage2->add_option("--test", cfg.test_path);
    stage2->add_option("--train", cfg.train_path);
    stage2->add_option("--stage1", stage1_path, "stage-1 prediction file");
    stage2->add_option("--out", out)->required();
    add_common_options(stage2, cfg);

    CLI::App* evaluate = app.add_subcommand("evaluate", "score predictions against gold");
    evaluate->add_option("--pred", pred)->required();
    evaluate->add_option("--gold", gold);
    evaluate->add_option("--task", task, "triplet | quadruple | both (default: from file)");
    evaluate->add_option("--out", out, "machine-readable report path");
    add_common_options(evaluate, cfg);

    CLI::App* report = app.add_subcommand("report", "print a saved report as a table");
    report->add_option("--input", input)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        validate_config(cfg);
        if (ingest->parsed()) return cmd_ingest(cfg, input, schema);
        if (stats->parsed()) return cmd_stats(cfg, input, out);
        if (lexicon->parsed()) return cmd_lexicon(cfg, input, out);
        if (export_sft->parsed()) return cmd_export_sft(cfg, out);
        if (stage1->parsed()) return cmd_stage1(cfg, out);
        if (stage2->parsed()) return cmd_stage2(cfg, stage1_path, out);
        if (evaluate->parsed()) {
            if (gold.empty()) gold = cfg.gold_path;
            if (gold.empty()) throw ValidationError("evaluate requires --gold (or gold_path in config)");
            return cmd_evaluate(cfg, pred, gold, task, out);
        }
        if (report->parsed()) return cmd_report(input);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const EndpointError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
