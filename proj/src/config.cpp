#include "dimabsa/config.hpp"

#include "dimabsa/hashing.hpp"
#include "dimabsa/util.hpp"

#include <nlohmann/json.hpp>

namespace dimabsa {

using nlohmann::json;

namespace {

json semantic_fields(const RunConfig& c) {
    return {{"train_path", c.train_path},
            {"test_path", c.test_path},
            {"gold_path", c.gold_path},
            {"mode", c.mode},
            {"k", c.k},
            {"example_count", c.example_count},
            {"seed", c.seed},
            {"template_id", c.template_id},
            {"templates_file", c.templates_file},
            {"examples_file", c.examples_file},
            {"chat_url", c.chat_url},
            {"chat_model", c.chat_model},
            {"mock_chat_fixture", c.mock_chat_fixture},
            {"encoder_url", c.encoder_url},
            {"mock_encoder", c.mock_encoder},
            {"encoder_dim", c.encoder_dim},
            {"rounding", c.rounding},
            {"neutral_lo", c.neutral_lo},
            {"neutral_hi", c.neutral_hi},
            {"temperature", c.temperature},
            {"max_tokens", c.max_tokens}};
}

} // namespace

RunConfig load_config(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ValidationError("invalid config JSON in " + path.string() + ": " + e.what());
    }
    RunConfig c;
    c.train_path = doc.value("train_path", c.train_path);
    c.test_path = doc.value("test_path", c.test_path);
    c.gold_path = doc.value("gold_path", c.gold_path);
    c.mode = doc.value("mode", c.mode);
    c.k = doc.value("k", c.k);
    c.example_count = doc.value("example_count", c.example_count);
    c.seed = doc.value("seed", c.seed);
    c.template_id = doc.value("template_id", c.template_id);
    c.templates_file = doc.value("templates_file", c.templates_file);
    c.examples_file = doc.value("examples_file", c.examples_file);
    c.chat_url = doc.value("chat_url", c.chat_url);
    c.chat_model = doc.value("chat_model", c.chat_model);
    c.mock_chat_fixture = doc.value("mock_chat_fixture", c.mock_chat_fixture);
    c.encoder_url = doc.value("encoder_url", c.encoder_url);
    c.mock_encoder = doc.value("mock_encoder", c.mock_encoder);
    c.encoder_dim = doc.value("encoder_dim", c.encoder_dim);
    c.cache_dir = doc.value("cache_dir", c.cache_dir);
    c.parallelism = doc.value("parallelism", c.parallelism);
    c.rounding = doc.value("rounding", c.rounding);
    c.neutral_lo = doc.value("neutral_lo", c.neutral_lo);
    c.neutral_hi = doc.value("neutral_hi", c.neutral_hi);
    c.temperature = doc.value("temperature", c.temperature);
    c.max_tokens = doc.value("max_tokens", c.max_tokens);
    return c;
}

std::string serialize_config(const RunConfig& c) {
    json doc = semantic_fields(c);
    doc["cache_dir"] = c.cache_dir;
    doc["parallelism"] = c.parallelism;
    return doc.dump(2) + "\n";
}

void validate_config(const RunConfig& c) {
    if (c.mode != "triplet" && c.mode != "quadruple")
        throw ValidationError("mode must be triplet or quadruple, got \"" + c.mode + "\"");
    if (c.k < 3 || c.k > 5)
        throw ValidationError("k must be in [3, 5], got " + std::to_string(c.k));
    if (c.example_count < 3 || c.example_count > 4)
        throw ValidationError("example_count must be 3 or 4, got " + std::to_string(c.example_count));
    if (c.rounding != "half_up" && c.rounding != "half_even")
        throw ValidationError("rounding must be half_up or half_even, got \"" + c.rounding + "\"");
    if (!(c.neutral_lo >= 1.0 && c.neutral_lo <= c.neutral_hi && c.neutral_hi <= 9.0))
        throw ValidationError("polarity thresholds must satisfy 1.0 <= lo <= hi <= 9.0");
    if (c.temperature < 0.0) throw ValidationError("temperature must be >= 0");
    if (c.max_tokens <= 0) throw ValidationError("max_tokens must be > 0");
    if (c.parallelism == 0) throw ValidationError("parallelism must be >= 1");
    if (c.encoder_dim <= 0) throw ValidationError("encoder_dim must be > 0");
}

std::string config_hash(const RunConfig& c) { return sha256_hex(semantic_fields(c).dump()); }

} // namespace dimabsa
