#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace dimabsa {

// One run's knobs. Credentials never live here — they come from the
// DIMABSA_CHAT_API_KEY / DIMABSA_ENCODER_API_KEY environment variables, so
// serialized configs and manifests stay shareable.
struct RunConfig {
    std::string train_path;
    std::string test_path;
    std::string gold_path;

    std::string mode = "quadruple"; // triplet | quadruple
    std::size_t k = 3;              // stage-2 retrieval depth, [3, 5]
    std::size_t example_count = 4;  // fixed demonstrations, [3, 4]
    std::uint64_t seed = 0;

    std::string template_id;     // empty: mode default (prompt2 / prompt2_triplet)
    std::string templates_file;  // optional 10-template pool
    std::string examples_file;   // optional fixed-example set

    std::string chat_url;
    std::string chat_model = "baichuan2-7b";
    std::string mock_chat_fixture; // non-empty: offline mock chat client
    std::string encoder_url;
    bool mock_encoder = false;
    int encoder_dim = 128;

    std::string cache_dir = ".dimabsa-cache";
    std::size_t parallelism = 1;
    std::string rounding = "half_up"; // half_up | half_even
    double neutral_lo = 4.5;
    double neutral_hi = 5.5;
    double temperature = 0.0;
    int max_tokens = 1024;
};

RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& config);

// Throws ValidationError on out-of-range numeric fields.
void validate_config(const RunConfig& config);

// sha256 over the semantic fields (datasets, mode, seed, templates, k,
// endpoints, rounding...). Execution details that cannot change output bytes
// (cache dir, parallelism) are excluded, so reruns hash identically.
std::string config_hash(const RunConfig& config);

} // namespace dimabsa
