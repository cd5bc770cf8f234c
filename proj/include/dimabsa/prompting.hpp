#pragma once

#include "dimabsa/corpus.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dimabsa {

enum class TupleMode { triplet, quadruple };

std::string_view to_string(TupleMode mode);
TupleMode tuple_mode_from_string(std::string_view s);

// Instruction template with {examples} and {sentence} placeholders,
// each required exactly once.
struct PromptTemplate {
    std::string id;
    std::string body;
    std::string language; // "zh" | "en"
};

// Throws ValidationError when a placeholder is missing or repeated.
void validate_template(const PromptTemplate& tmpl);

// One in-context demonstration: a sentence, its tuples, and (stage 2 only)
// word-level score hints.
struct IclExample {
    std::string sentence;
    std::vector<Tuple> tuples;
    std::vector<OpinionLexiconEntry> word_hints;
};

IclExample icl_from_sample(const Sample& s);

// "(aspect, category, opinion, v.vv#a.aa)" / "(aspect, opinion, v.vv#a.aa)".
// Quadruple mode requires the category; throws ValidationError otherwise.
std::string render_tuple_line(const Tuple& t, TupleMode mode);

// Sentence line, hint lines ("词语参考: opinion=v.vv#a.aa"), then one line
// per tuple.
std::string render_example(const IclExample& ex, TupleMode mode);

// Substitutes {examples} (rendered examples joined by one blank line) and
// {sentence}. Byte-deterministic. Throws on empty examples or a bad template.
std::string render_prompt(const PromptTemplate& tmpl, const std::vector<IclExample>& examples,
                          std::string_view sentence, TupleMode mode);

// Gold tuple lines joined by "\n" — the expected model answer for a sample.
std::string render_response(const Sample& s, TupleMode mode);

struct TemplatePool {
    std::vector<PromptTemplate> templates; // exactly 10
    std::uint64_t rng_seed = 0;
};

void validate_pool(const TemplatePool& pool);

// Pure function of (rng_seed, sample_id), uniform over the pool.
const PromptTemplate& pick_template(const TemplatePool& pool, std::string_view sample_id);

// Writes one {"instruction": ..., "output": ...} JSON record per line and
// returns the record count. Instructions use a pool-picked template over the
// first examples_per_record fixed examples; outputs are the gold tuple lines.
// A non-empty config_hash is embedded in every record.
std::size_t export_sft_dataset(const std::vector<Sample>& train, const TemplatePool& pool,
                               const std::vector<IclExample>& fixed_examples,
                               std::size_t examples_per_record, const std::filesystem::path& out,
                               const std::string& config_hash = "");

// Builtin resources. The pool is the optimized quadruple instruction plus
// nine paraphrases; separate triplet-format templates cover triplet runs.
const std::vector<PromptTemplate>& builtin_templates();
const PromptTemplate& find_builtin_template(std::string_view id);
const PromptTemplate& default_template(TupleMode mode); // prompt2 / prompt2_triplet
TemplatePool builtin_pool(std::uint64_t seed);
const std::vector<IclExample>& builtin_fixed_examples(); // 4 demonstrations

// Template pool file: JSON list of {id, body, language}.
TemplatePool load_template_pool(const std::filesystem::path& path, std::uint64_t seed);
std::string serialize_template_pool(const TemplatePool& pool);

// Fixed-example file: a dataset-schema record list (train schema).
std::vector<IclExample> load_examples_file(const std::filesystem::path& path);

} // namespace dimabsa
