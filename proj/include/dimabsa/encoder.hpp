#pragma once

#include <Eigen/Core>

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace dimabsa {

using Embedding = Eigen::VectorXd;

// Sentence-encoder endpoint. Implementations return one vector per input
// text, in input order.
class EncoderClient {
  public:
    virtual ~EncoderClient() = default;
    virtual std::vector<Embedding> embed(const std::vector<std::string>& texts) = 0;
    // Stable identity string; part of every cache key so switching encoders
    // invalidates cleanly.
    virtual std::string identity() const = 0;
};

struct RetryPolicy {
    int max_attempts = 3;
    int base_delay_ms = 200;
    int max_delay_ms = 5000;
};

// JSON-over-HTTP contract: POST {"texts": [...]} -> {"vectors": [[...]]}.
// Bearer token read from DIMABSA_ENCODER_API_KEY when set. Transient
// failures are retried with exponential backoff, then surfaced as
// EndpointError.
class HttpEncoderClient : public EncoderClient {
  public:
    explicit HttpEncoderClient(std::string url, RetryPolicy retry = {});
    std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
    std::string identity() const override { return "http:" + url_; }

  private:
    std::string url_;
    RetryPolicy retry_;
};

// Deterministic offline encoder. The vector for a text is derived from
// SHA-256: digest bytes of sha256(text || 0x00 || block_index), concatenated
// until dim bytes are available, each byte b mapped to (b - 127.5) / 127.5.
class MockEncoderClient : public EncoderClient {
  public:
    explicit MockEncoderClient(int dim) : dim_(dim) {}
    std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
    std::string identity() const override { return "mock:" + std::to_string(dim_); }
    int calls() const { return calls_.load(); }

  private:
    int dim_;
    std::atomic<int> calls_{0};
};

struct EmbedOptions {
    std::size_t batch_size = 64;
    std::size_t parallelism = 1; // concurrent batches against the endpoint
};

// Content-addressed cache in front of an encoder. Keys are
// sha256(identity \n text); entries live in memory and, when a cache
// directory is set, on disk as one JSON file per key (written atomically,
// so concurrent writers are last-writer-wins on identical content).
class CachingEncoder : public EncoderClient {
  public:
    CachingEncoder(EncoderClient& base, std::filesystem::path cache_dir, EmbedOptions options = {});

    // Order-preserving; only cache misses reach the base encoder.
    std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
    std::string identity() const override { return base_.identity(); }

    std::size_t endpoint_calls() const { return endpoint_calls_.load(); }

  private:
    bool lookup(const std::string& key, Embedding& out);
    void store(const std::string& key, const Embedding& v);

    EncoderClient& base_;
    std::filesystem::path cache_dir_; // empty: memory-only
    EmbedOptions options_;
    std::mutex mutex_;
    std::unordered_map<std::string, Embedding> memory_;
    std::atomic<std::size_t> endpoint_calls_{0};
};

// Convenience wrapper matching the operation contract: one vector per text,
// order preserved, a shared dim enforced across the batch.
std::vector<Embedding> embed_batch(const std::vector<std::string>& texts, EncoderClient& client);

} // namespace dimabsa
