#include "dimabsa/chat.hpp"

#include "dimabsa/hashing.hpp"
#include "dimabsa/util.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <thread>

namespace dimabsa {

using nlohmann::json;

HttpChatClient::HttpChatClient(std::string url, ChatRetryPolicy retry)
    : url_(std::move(url)), retry_(retry) {}

std::string HttpChatClient::complete(const ChatRequest& req) {
    std::size_t scheme_end = url_.find("://");
    if (scheme_end == std::string::npos)
        throw ValidationError("chat URL must include a scheme: " + url_);
    std::size_t path_start = url_.find('/', scheme_end + 3);
    std::string origin = path_start == std::string::npos ? url_ : url_.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/v1/chat/completions" : url_.substr(path_start);

    json body = {{"model", req.model_id},
                 {"messages", json::array({{{"role", "user"}, {"content", req.prompt}}})},
                 {"temperature", req.temperature},
                 {"max_tokens", req.max_tokens}};
    const char* key = std::getenv("DIMABSA_CHAT_API_KEY");

    std::string last_error;
    for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
        httplib::Client client(origin);
        client.set_connection_timeout(10);
        client.set_read_timeout(300);
        httplib::Headers headers;
        if (key && *key) headers.emplace("Authorization", "Bearer " + std::string(key));
        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (res && res->status >= 200 && res->status < 300) {
            try {
                json reply = json::parse(res->body);
                return reply.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const json::exception& e) {
                throw EndpointError("malformed chat completion from " + url_ + ": " + e.what());
            }
        }
        bool retryable = !res || res->status >= 500 || res->status == 429 || res->status == 408;
        last_error = res ? "HTTP " + std::to_string(res->status) + " from " + url_
                         : "transport failure against " + url_ + " (" + httplib::to_string(res.error()) + ")";
        if (!retryable || attempt == retry_.max_attempts) break;
        long long delay = static_cast<long long>(retry_.base_delay_ms) << (attempt - 1);
        std::this_thread::sleep_for(
            std::chrono::milliseconds(std::min<long long>(delay, retry_.max_delay_ms)));
    }
    throw EndpointError(last_error);
}

MockChatClient::MockChatClient(const std::filesystem::path& fixture) {
    json doc;
    try {
        doc = json::parse(read_text_file(fixture));
    } catch (const json::exception& e) {
        throw ValidationError("invalid mock-chat fixture " + fixture.string() + ": " + e.what());
    }
    if (doc.contains("by_hash"))
        for (auto& [hash, text] : doc["by_hash"].items()) add_hash_response(hash, text.get<std::string>());
    if (doc.contains("rules"))
        for (const json& rule : doc["rules"])
            add_rule(rule.at("contains").get<std::string>(), rule.at("text").get<std::string>());
    if (doc.contains("default")) set_default(doc["default"].get<std::string>());
}

void MockChatClient::add_hash_response(std::string prompt_hash, std::string text) {
    by_hash_.emplace(std::move(prompt_hash), std::move(text));
}

void MockChatClient::add_rule(std::string contains, std::string text) {
    rules_.emplace_back(std::move(contains), std::move(text));
}

void MockChatClient::set_default(std::string text) {
    default_ = std::move(text);
    has_default_ = true;
}

std::string MockChatClient::complete(const ChatRequest& req) {
    calls_.fetch_add(1);
    {
        std::lock_guard lock(mutex_);
        prompts_.push_back(req.prompt);
    }
    auto it = by_hash_.find(sha256_hex(req.model_id + "\n" + req.prompt));
    if (it != by_hash_.end()) return it->second;
    for (const auto& [needle, text] : rules_)
        if (req.prompt.find(needle) != std::string::npos) return text;
    if (has_default_) return default_;
    throw EndpointError("mock chat has no canned response for this prompt");
}

std::vector<std::string> MockChatClient::prompts() const {
    std::lock_guard lock(mutex_);
    return prompts_;
}

CachingChatClient::CachingChatClient(ChatClient& base, std::filesystem::path cache_dir)
    : base_(base), cache_dir_(std::move(cache_dir)) {
    if (!cache_dir_.empty()) std::filesystem::create_directories(cache_dir_);
}

std::string CachingChatClient::complete(const ChatRequest& req) {
    std::string key = sha256_hex(req.model_id + "\n" + req.prompt);
    {
        std::lock_guard lock(mutex_);
        auto it = memory_.find(key);
        if (it != memory_.end()) return it->second;
    }
    if (!cache_dir_.empty()) {
        std::filesystem::path file = cache_dir_ / (key + ".json");
        if (std::filesystem::exists(file)) {
            std::string text = json::parse(read_text_file(file)).at("response").get<std::string>();
            std::lock_guard lock(mutex_);
            memory_[key] = text;
            return text;
        }
    }
    std::string text = base_.complete(req);
    endpoint_calls_.fetch_add(1);
    {
        std::lock_guard lock(mutex_);
        memory_[key] = text;
    }
    if (!cache_dir_.empty())
        atomic_write_file(cache_dir_ / (key + ".json"), json{{"response", text}}.dump());
    return text;
}

} // namespace dimabsa
