#include "dimabsa/inference.hpp"

#include "dimabsa/hashing.hpp"
#include "dimabsa/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

namespace dimabsa {

using nlohmann::json;

namespace {

std::string normalize_punctuation(std::string line) {
    line = replace_all(std::move(line), "（", "(");
    line = replace_all(std::move(line), "）", ")");
    line = replace_all(std::move(line), "，", ",");
    return line;
}

std::vector<std::string_view> split_fields(std::string_view body) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = body.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(body.substr(start)));
            break;
        }
        fields.push_back(trim(body.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

} // namespace

ParsedOutput parse_model_output(std::string_view raw, TupleMode mode) {
    ParsedOutput out;
    std::size_t expected = mode == TupleMode::quadruple ? 4 : 3;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        std::size_t eol = raw.find('\n', pos);
        std::string_view line_view = raw.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
        pos = eol == std::string_view::npos ? raw.size() + 1 : eol + 1;

        std::string line = normalize_punctuation(std::string(trim(line_view)));
        std::string_view t = trim(line);
        if (t.empty()) continue;

        if (t.front() != '(' || t.back() != ')') {
            out.warnings.push_back("unrecognized line: " + std::string(trim(line_view)));
            continue;
        }
        auto fields = split_fields(t.substr(1, t.size() - 2));
        if (fields.size() != expected) {
            out.warnings.push_back("expected " + std::to_string(expected) + " fields, got " +
                                   std::to_string(fields.size()) + ": " + std::string(t));
            continue;
        }

        Tuple tuple;
        std::size_t f = 0;
        tuple.aspect = std::string(fields[f++]);
        if (tuple.aspect.empty()) {
            out.warnings.push_back("empty aspect: " + std::string(t));
            continue;
        }
        if (mode == TupleMode::quadruple) {
            tuple.category = Category::from_text(fields[f++]);
            if (!tuple.category) {
                out.warnings.push_back("unknown category: " + std::string(t));
                continue;
            }
        }
        tuple.opinion = std::string(fields[f++]);
        if (tuple.opinion.empty()) {
            out.warnings.push_back("empty opinion: " + std::string(t));
            continue;
        }
        switch (parse_intensity_lenient(fields[f], tuple.intensity)) {
        case IntensityParse::ok: break;
        case IntensityParse::out_of_range:
            out.warnings.push_back("intensity out of range: " + std::string(t));
            continue;
        case IntensityParse::malformed:
            out.warnings.push_back("malformed intensity: " + std::string(t));
            continue;
        }
        out.tuples.push_back(std::move(tuple));
    }
    return out;
}

std::string_view to_string(Stage stage) { return stage == Stage::coarse ? "coarse" : "fine"; }

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
    json doc = {{"config_hash", m.config_hash},
                {"dataset_hash", m.dataset_hash},
                {"template_ids", m.template_ids},
                {"example_set_hash", m.example_set_hash},
                {"endpoint_identity", m.endpoint_identity},
                {"seed", m.seed},
                {"sample_status", m.sample_status},
                {"endpoint_calls", m.endpoint_calls}};
    doc["config"] = m.config_json.empty() ? json(nullptr) : json::parse(m.config_json);
    atomic_write_file(path, doc.dump(2) + "\n");
}

RunManifest read_manifest(const std::filesystem::path& path) {
    json doc = json::parse(read_text_file(path));
    RunManifest m;
    m.config_hash = doc.value("config_hash", "");
    if (doc.contains("config") && !doc["config"].is_null()) m.config_json = doc["config"].dump();
    m.dataset_hash = doc.value("dataset_hash", "");
    m.template_ids = doc.value("template_ids", std::vector<std::string>{});
    m.example_set_hash = doc.value("example_set_hash", "");
    m.endpoint_identity = doc.value("endpoint_identity", "");
    m.seed = doc.value("seed", std::uint64_t{0});
    m.sample_status = doc.value("sample_status", std::map<std::string, std::string>{});
    m.endpoint_calls = doc.value("endpoint_calls", std::size_t{0});
    return m;
}

std::string example_set_hash(const std::vector<IclExample>& examples, TupleMode mode) {
    std::string block;
    for (const IclExample& ex : examples) block += render_example(ex, mode) + "\n\n";
    return sha256_hex(block);
}

namespace {

void validate_options(const InferenceOptions& options) {
    validate_template(options.tmpl);
    if (options.fixed_examples.size() < 3 || options.fixed_examples.size() > 4)
        throw ValidationError("fixed example count must be 3 or 4, got " +
                              std::to_string(options.fixed_examples.size()));
    if (options.temperature < 0.0) throw ValidationError("temperature must be >= 0");
    if (options.max_tokens <= 0) throw ValidationError("max_tokens must be > 0");
}

// Runs fn(i) for i in [0, n) on up to `parallelism` workers. The first
// exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t n, std::size_t parallelism, const std::function<void(std::size_t)>& fn) {
    parallelism = std::max<std::size_t>(1, std::min(parallelism, n));
    if (parallelism <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(parallelism);
    for (std::size_t w = 0; w < parallelism; ++w)
        workers.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    for (std::thread& t : workers) t.join();
    if (error) std::rethrow_exception(error);
}

struct ManifestWriter {
    ManifestWriter(RunManifest& m, const std::filesystem::path& p) : manifest(m), path(p) {}

    RunManifest& manifest;
    const std::filesystem::path& path;
    std::mutex mutex;

    void record(const std::string& id, bool failed) {
        std::lock_guard lock(mutex);
        manifest.sample_status[id] = failed ? "failed" : "ok";
        if (!path.empty()) write_manifest(path, manifest);
    }
};

Prediction run_one(const Sample& sample, Stage stage, const std::string& prompt,
                   const InferenceOptions& options, ChatClient& client) {
    Prediction p;
    p.sample_id = sample.id;
    p.stage = stage;
    try {
        p.raw_text = client.complete({prompt, options.temperature, options.max_tokens, options.model_id});
    } catch (const EndpointError& e) {
        p.failed = true;
        p.warnings.push_back(std::string("endpoint failure: ") + e.what());
        return p;
    }
    ParsedOutput parsed = parse_model_output(p.raw_text, options.mode);
    p.tuples = std::move(parsed.tuples);
    for (std::string& w : parsed.warnings) p.warnings.push_back(std::move(w));
    return p;
}

} // namespace

std::vector<Prediction> predict_stage1(const std::vector<Sample>& test, const InferenceOptions& options,
                                       ChatClient& client, RunManifest& manifest) {
    validate_options(options);
    manifest.template_ids = {options.tmpl.id};
    manifest.example_set_hash = example_set_hash(options.fixed_examples, options.mode);
    manifest.endpoint_identity = client.identity();

    std::vector<Prediction> predictions(test.size());
    ManifestWriter writer{manifest, options.manifest_path};
    parallel_for(test.size(), options.parallelism, [&](std::size_t i) {
        std::string prompt = render_prompt(options.tmpl, options.fixed_examples, test[i].text, options.mode);
        predictions[i] = run_one(test[i], Stage::coarse, prompt, options, client);
        writer.record(test[i].id, predictions[i].failed);
    });
    return predictions;
}

std::vector<Prediction> predict_stage2(const std::vector<Sample>& test,
                                       const std::vector<Prediction>& stage1, const OpinionIndex& index,
                                       const std::vector<OpinionLexiconEntry>& lexicon, std::size_t k,
                                       const InferenceOptions& options, ChatClient& client,
                                       EncoderClient& encoder, RunManifest& manifest,
                                       const PolarityThresholds& thresholds) {
    validate_options(options);
    std::map<std::string, const Prediction*> coarse;
    for (const Prediction& p : stage1) coarse[p.sample_id] = &p;
    for (const Sample& s : test)
        if (!coarse.count(s.id))
            throw ValidationError("no stage-1 prediction for sample \"" + s.id + "\"");

    manifest.template_ids = {options.tmpl.id};
    manifest.example_set_hash = example_set_hash(options.fixed_examples, options.mode);
    manifest.endpoint_identity = client.identity();

    std::vector<Prediction> predictions(test.size());
    ManifestWriter writer{manifest, options.manifest_path};
    parallel_for(test.size(), options.parallelism, [&](std::size_t i) {
        const Sample& sample = test[i];
        try {
            Stage2Assembly assembly =
                assemble_stage2_examples(coarse.at(sample.id)->tuples, index, lexicon, k, encoder,
                                         options.fixed_examples, thresholds);
            std::string prompt = render_prompt(options.tmpl, assembly.examples, sample.text, options.mode);
            predictions[i] = run_one(sample, Stage::fine, prompt, options, client);
            predictions[i].used_fallback = assembly.used_fallback;
        } catch (const EndpointError& e) {
            // retrieval-side failure: isolate it like a chat failure
            predictions[i].sample_id = sample.id;
            predictions[i].stage = Stage::fine;
            predictions[i].failed = true;
            predictions[i].warnings.push_back(std::string("endpoint failure: ") + e.what());
        }
        writer.record(sample.id, predictions[i].failed);
    });
    return predictions;
}

namespace {

json tuple_to_json(const Tuple& t) {
    json arr = json::array();
    arr.push_back(t.aspect);
    if (t.category) arr.push_back(t.category->text());
    arr.push_back(t.opinion);
    arr.push_back(format_intensity(t.intensity));
    return arr;
}

Tuple tuple_from_json(const json& arr) {
    if (!arr.is_array() || (arr.size() != 3 && arr.size() != 4))
        throw ValidationError("prediction tuple must be a 3- or 4-element array");
    Tuple t;
    std::size_t f = 0;
    t.aspect = arr[f++].get<std::string>();
    if (arr.size() == 4) {
        auto category = Category::from_text(arr[f++].get<std::string>());
        if (!category) throw ValidationError("unknown category in prediction tuple");
        t.category = category;
    }
    t.opinion = arr[f++].get<std::string>();
    t.intensity = parse_intensity_strict(arr[f].get<std::string>());
    return t;
}

} // namespace

void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& predictions,
                       const std::string& config_hash, TupleMode mode) {
    std::ostringstream out;
    json meta = {{"meta", {{"config_hash", config_hash}, {"mode", std::string(to_string(mode))}}}};
    out << meta.dump() << "\n";
    for (const Prediction& p : predictions) {
        json tuples = json::array();
        for (const Tuple& t : p.tuples) tuples.push_back(tuple_to_json(t));
        json rec = {{"id", p.sample_id},       {"stage", std::string(to_string(p.stage))},
                    {"raw_text", p.raw_text},  {"tuples", std::move(tuples)},
                    {"warnings", p.warnings},  {"fallback", p.used_fallback},
                    {"failed", p.failed}};
        out << rec.dump() << "\n";
    }
    atomic_write_file(path, out.str());
}

PredictionFile read_predictions(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    PredictionFile file;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError("invalid prediction record at line " + std::to_string(lineno) + ": " +
                                  e.what());
        }
        if (rec.contains("meta")) {
            file.config_hash = rec["meta"].value("config_hash", "");
            if (rec["meta"].contains("mode"))
                file.mode = tuple_mode_from_string(rec["meta"]["mode"].get<std::string>());
            continue;
        }
        Prediction p;
        p.sample_id = rec.at("id").get<std::string>();
        p.stage = rec.value("stage", "coarse") == "fine" ? Stage::fine : Stage::coarse;
        p.raw_text = rec.value("raw_text", "");
        for (const json& t : rec.value("tuples", json::array())) p.tuples.push_back(tuple_from_json(t));
        p.warnings = rec.value("warnings", std::vector<std::string>{});
        p.used_fallback = rec.value("fallback", false);
        p.failed = rec.value("failed", false);
        file.predictions.push_back(std::move(p));
    }
    return file;
}

std::map<std::string, std::vector<Tuple>> predictions_to_map(const std::vector<Prediction>& predictions) {
    std::map<std::string, std::vector<Tuple>> out;
    for (const Prediction& p : predictions) {
        auto [it, inserted] = out.emplace(p.sample_id, p.tuples);
        if (!inserted) throw ValidationError("duplicate prediction for sample \"" + p.sample_id + "\"");
    }
    return out;
}

} // namespace dimabsa
