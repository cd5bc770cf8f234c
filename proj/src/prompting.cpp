#include "dimabsa/prompting.hpp"

#include "dimabsa/hashing.hpp"
#include "dimabsa/util.hpp"

#include <nlohmann/json.hpp>

#include <sstream>

namespace dimabsa {

using nlohmann::json;

namespace {
constexpr std::string_view kExamplesSlot = "{examples}";
constexpr std::string_view kSentenceSlot = "{sentence}";
} // namespace

std::string_view to_string(TupleMode mode) {
    return mode == TupleMode::triplet ? "triplet" : "quadruple";
}

TupleMode tuple_mode_from_string(std::string_view s) {
    if (s == "triplet") return TupleMode::triplet;
    if (s == "quadruple") return TupleMode::quadruple;
    throw ValidationError("unknown mode (expected triplet|quadruple): " + std::string(s));
}

void validate_template(const PromptTemplate& tmpl) {
    for (std::string_view slot : {kExamplesSlot, kSentenceSlot}) {
        std::size_t n = count_occurrences(tmpl.body, slot);
        if (n != 1)
            throw ValidationError("template \"" + tmpl.id + "\" must contain " + std::string(slot) +
                                  " exactly once (found " + std::to_string(n) + ")");
    }
    if (tmpl.language != "zh" && tmpl.language != "en")
        throw ValidationError("template \"" + tmpl.id + "\" has unknown language \"" + tmpl.language + "\"");
}

IclExample icl_from_sample(const Sample& s) {
    IclExample ex;
    ex.sentence = s.text;
    ex.tuples.reserve(s.gold.size());
    for (const Quadruple& q : s.gold) ex.tuples.push_back(to_tuple(q));
    return ex;
}

std::string render_tuple_line(const Tuple& t, TupleMode mode) {
    std::string line = "(" + t.aspect + ", ";
    if (mode == TupleMode::quadruple) {
        if (!t.category) throw ValidationError("quadruple rendering requires a category: " + t.opinion);
        line += t.category->text() + ", ";
    }
    line += t.opinion + ", " + format_intensity(t.intensity) + ")";
    return line;
}

std::string render_example(const IclExample& ex, TupleMode mode) {
    if (ex.tuples.empty()) throw ValidationError("in-context example has no tuples: " + ex.sentence);
    std::string out = "句子：" + ex.sentence;
    for (const OpinionLexiconEntry& hint : ex.word_hints)
        out += "\n词语参考: " + hint.opinion + "=" +
               format_intensity({hint.mean_valence, hint.mean_arousal});
    for (const Tuple& t : ex.tuples) out += "\n" + render_tuple_line(t, mode);
    return out;
}

std::string render_prompt(const PromptTemplate& tmpl, const std::vector<IclExample>& examples,
                          std::string_view sentence, TupleMode mode) {
    validate_template(tmpl);
    if (examples.empty()) throw ValidationError("render_prompt requires at least one example");
    std::string block;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (i > 0) block += "\n\n";
        block += render_example(examples[i], mode);
    }
    std::string out = replace_all(tmpl.body, kExamplesSlot, block);
    return replace_all(std::move(out), kSentenceSlot, std::string(sentence));
}

std::string render_response(const Sample& s, TupleMode mode) {
    std::string out;
    for (std::size_t i = 0; i < s.gold.size(); ++i) {
        if (i > 0) out += "\n";
        out += render_tuple_line(to_tuple(s.gold[i]), mode);
    }
    return out;
}

void validate_pool(const TemplatePool& pool) {
    if (pool.templates.size() != 10)
        throw ValidationError("template pool must hold exactly 10 templates, got " +
                              std::to_string(pool.templates.size()));
    for (const PromptTemplate& t : pool.templates) validate_template(t);
}

const PromptTemplate& pick_template(const TemplatePool& pool, std::string_view sample_id) {
    std::string key = std::to_string(pool.rng_seed) + "\x1f" + std::string(sample_id);
    return pool.templates[hash64(key) % pool.templates.size()];
}

std::size_t export_sft_dataset(const std::vector<Sample>& train, const TemplatePool& pool,
                               const std::vector<IclExample>& fixed_examples,
                               std::size_t examples_per_record, const std::filesystem::path& out,
                               const std::string& config_hash) {
    if (train.empty()) throw ValidationError("export requires a non-empty training set");
    validate_pool(pool);
    if (examples_per_record == 0 || examples_per_record > fixed_examples.size())
        throw ValidationError("examples_per_record must be in [1, " +
                              std::to_string(fixed_examples.size()) + "]");
    std::vector<IclExample> context(fixed_examples.begin(),
                                    fixed_examples.begin() + static_cast<std::ptrdiff_t>(examples_per_record));
    std::ostringstream file;
    for (const Sample& s : train) {
        const PromptTemplate& tmpl = pick_template(pool, s.id);
        json rec = {{"instruction", render_prompt(tmpl, context, s.text, TupleMode::quadruple)},
                    {"output", render_response(s, TupleMode::quadruple)}};
        if (!config_hash.empty()) rec["config_hash"] = config_hash;
        file << rec.dump() << "\n";
    }
    atomic_write_file(out, file.str());
    return train.size();
}

TemplatePool load_template_pool(const std::filesystem::path& path, std::uint64_t seed) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ValidationError("invalid template pool JSON in " + path.string() + ": " + e.what());
    }
    TemplatePool pool;
    pool.rng_seed = seed;
    for (const json& rec : doc)
        pool.templates.push_back({rec.at("id").get<std::string>(), rec.at("body").get<std::string>(),
                                  rec.at("language").get<std::string>()});
    validate_pool(pool);
    return pool;
}

std::string serialize_template_pool(const TemplatePool& pool) {
    json doc = json::array();
    for (const PromptTemplate& t : pool.templates)
        doc.push_back({{"id", t.id}, {"body", t.body}, {"language", t.language}});
    return doc.dump(2) + "\n";
}

std::vector<IclExample> load_examples_file(const std::filesystem::path& path) {
    std::vector<Sample> samples = load_dataset(path, DatasetSchema::train);
    std::vector<IclExample> examples;
    examples.reserve(samples.size());
    for (const Sample& s : samples) {
        if (s.gold.empty())
            throw ValidationError("example sample \"" + s.id + "\" has no tuples");
        examples.push_back(icl_from_sample(s));
    }
    return examples;
}

} // namespace dimabsa
