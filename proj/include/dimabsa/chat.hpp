#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace dimabsa {

struct ChatRequest {
    std::string prompt;
    double temperature = 0.0; // greedy by default: deterministic, cacheable
    int max_tokens = 1024;
    std::string model_id;
};

class ChatClient {
  public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const ChatRequest& req) = 0;
    virtual std::string identity() const = 0;
};

struct ChatRetryPolicy {
    int max_attempts = 3;
    int base_delay_ms = 500;
    int max_delay_ms = 10000;
};

// OpenAI-compatible chat completions endpoint:
// POST {model, messages: [{role, content}], temperature, max_tokens},
// reply text at choices[0].message.content. Bearer token from
// DIMABSA_CHAT_API_KEY when set.
class HttpChatClient : public ChatClient {
  public:
    explicit HttpChatClient(std::string url, ChatRetryPolicy retry = {});
    std::string complete(const ChatRequest& req) override;
    std::string identity() const override { return "http:" + url_; }

  private:
    std::string url_;
    ChatRetryPolicy retry_;
};

// Replays canned responses for offline runs and tests. Lookup order:
// exact hash of (model_id \n prompt), then ordered substring rules, then the
// default response. Thread-safe; counts calls and records prompts.
class MockChatClient : public ChatClient {
  public:
    MockChatClient() = default;

    // Fixture file: {"by_hash": {hash: text}, "rules": [{"contains", "text"}],
    // "default": text}; every part optional.
    explicit MockChatClient(const std::filesystem::path& fixture);

    void add_hash_response(std::string prompt_hash, std::string text);
    void add_rule(std::string contains, std::string text);
    void set_default(std::string text);

    std::string complete(const ChatRequest& req) override;
    std::string identity() const override { return "mock-chat"; }

    int calls() const { return calls_.load(); }
    std::vector<std::string> prompts() const;

  private:
    std::unordered_map<std::string, std::string> by_hash_;
    std::vector<std::pair<std::string, std::string>> rules_;
    std::string default_;
    bool has_default_ = false;
    std::atomic<int> calls_{0};
    mutable std::mutex mutex_;
    std::vector<std::string> prompts_;
};

// Response cache keyed by sha256(model_id \n prompt); entries in memory and,
// with a cache directory, on disk (atomic writes, last-writer-wins). Makes
// interrupted runs resumable and identical reruns endpoint-free.
class CachingChatClient : public ChatClient {
  public:
    CachingChatClient(ChatClient& base, std::filesystem::path cache_dir);

    std::string complete(const ChatRequest& req) override;
    std::string identity() const override { return base_.identity(); }

    std::size_t endpoint_calls() const { return endpoint_calls_.load(); }

  private:
    ChatClient& base_;
    std::filesystem::path cache_dir_;
    std::mutex mutex_;
    std::unordered_map<std::string, std::string> memory_;
    std::atomic<std::size_t> endpoint_calls_{0};
};

} // namespace dimabsa
