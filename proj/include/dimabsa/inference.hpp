#pragma once

#include "dimabsa/chat.hpp"
#include "dimabsa/corpus.hpp"
#include "dimabsa/encoder.hpp"
#include "dimabsa/prompting.hpp"
#include "dimabsa/retrieval.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace dimabsa {

struct ParsedOutput {
    std::vector<Tuple> tuples;
    std::vector<std::string> warnings;
};

// Total parser over model text: every non-empty line either yields a tuple
// or a warning. Accepts ASCII and full-width parentheses/commas and 0-2
// decimal intensities; categories are validated against the closed set in
// quadruple mode; out-of-range intensities are rejected, never clamped.
ParsedOutput parse_model_output(std::string_view raw, TupleMode mode);

enum class Stage { coarse, fine };

std::string_view to_string(Stage stage);

struct Prediction {
    std::string sample_id;
    Stage stage = Stage::coarse;
    std::string raw_text;
    std::vector<Tuple> tuples;
    std::vector<std::string> warnings;
    bool used_fallback = false; // stage 2 only: fixed examples substituted
    bool failed = false;        // endpoint gave up after retries
};

// Provenance record for a run; refreshed atomically after every sample so an
// interrupted run can be diagnosed and resumed.
struct RunManifest {
    std::string config_hash;
    std::string config_json; // full serialized run configuration
    std::string dataset_hash;
    std::vector<std::string> template_ids;
    std::string example_set_hash;
    std::string endpoint_identity;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> sample_status; // id -> ok | failed
    std::size_t endpoint_calls = 0;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

struct InferenceOptions {
    PromptTemplate tmpl;
    std::vector<IclExample> fixed_examples; // 3 or 4 demonstrations
    TupleMode mode = TupleMode::quadruple;
    std::string model_id = "baichuan2-7b";
    double temperature = 0.0;
    int max_tokens = 1024;
    std::size_t parallelism = 1;
    std::filesystem::path manifest_path; // empty: manifest kept in memory only
};

// Stage 1: fixed-demonstration prompting. One coarse prediction per sample,
// emitted in dataset order; per-sample endpoint failures are recorded in the
// manifest and do not stop the run.
std::vector<Prediction> predict_stage1(const std::vector<Sample>& test, const InferenceOptions& options,
                                       ChatClient& client, RunManifest& manifest);

// Stage 2: retrieval-enhanced re-prompting. Demonstrations come from
// assemble_stage2_examples over each sample's stage-1 tuples; samples whose
// stage-1 parse was empty use the fixed set and carry the fallback flag.
std::vector<Prediction> predict_stage2(const std::vector<Sample>& test,
                                       const std::vector<Prediction>& stage1, const OpinionIndex& index,
                                       const std::vector<OpinionLexiconEntry>& lexicon, std::size_t k,
                                       const InferenceOptions& options, ChatClient& client,
                                       EncoderClient& encoder, RunManifest& manifest,
                                       const PolarityThresholds& thresholds = {});

// Prediction file: first line a meta record carrying the config hash, then
// one JSON record per sample {id, stage, raw_text, tuples, warnings, ...}.
void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& predictions,
                       const std::string& config_hash, TupleMode mode);

struct PredictionFile {
    std::string config_hash;
    TupleMode mode = TupleMode::quadruple;
    std::vector<Prediction> predictions;
};

PredictionFile read_predictions(const std::filesystem::path& path);

std::map<std::string, std::vector<Tuple>> predictions_to_map(const std::vector<Prediction>& predictions);

// sha256 of the rendered fixed-example block; part of the manifest.
std::string example_set_hash(const std::vector<IclExample>& examples, TupleMode mode);

} // namespace dimabsa
