#include "dimabsa/encoder.hpp"

#include "dimabsa/hashing.hpp"
#include "dimabsa/util.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <future>
#include <thread>

namespace dimabsa {

using nlohmann::json;

namespace {

// Splits "http(s)://host[:port]/path" into an httplib origin and a path.
std::pair<std::string, std::string> split_url(const std::string& url) {
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ValidationError("endpoint URL must include a scheme: " + url);
    std::size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string bearer_from_env(const char* var) {
    const char* v = std::getenv(var);
    return v ? v : "";
}

int backoff_delay_ms(const RetryPolicy& retry, int attempt) {
    long long delay = static_cast<long long>(retry.base_delay_ms) << (attempt - 1);
    return static_cast<int>(std::min<long long>(delay, retry.max_delay_ms));
}

// POSTs JSON with bounded-backoff retries on transport errors and 5xx/429.
json post_json_with_retry(const std::string& url, const json& body, const std::string& token,
                          const RetryPolicy& retry) {
    auto [origin, path] = split_url(url);
    std::string last_error;
    for (int attempt = 1; attempt <= retry.max_attempts; ++attempt) {
        httplib::Client client(origin);
        client.set_connection_timeout(10);
        client.set_read_timeout(120);
        httplib::Headers headers;
        if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (res && res->status >= 200 && res->status < 300) {
            try {
                return json::parse(res->body);
            } catch (const json::exception& e) {
                throw EndpointError("invalid JSON from " + url + ": " + e.what());
            }
        }
        bool retryable = !res || res->status >= 500 || res->status == 429 || res->status == 408;
        last_error = res ? "HTTP " + std::to_string(res->status) + " from " + url
                         : "transport failure against " + url + " (" + httplib::to_string(res.error()) + ")";
        if (!retryable || attempt == retry.max_attempts) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff_delay_ms(retry, attempt)));
    }
    throw EndpointError(last_error);
}

} // namespace

HttpEncoderClient::HttpEncoderClient(std::string url, RetryPolicy retry)
    : url_(std::move(url)), retry_(retry) {}

std::vector<Embedding> HttpEncoderClient::embed(const std::vector<std::string>& texts) {
    json body = {{"texts", texts}};
    json reply = post_json_with_retry(url_, body, bearer_from_env("DIMABSA_ENCODER_API_KEY"), retry_);
    if (!reply.contains("vectors") || !reply["vectors"].is_array())
        throw EndpointError("encoder reply missing \"vectors\": " + url_);
    const json& vecs = reply["vectors"];
    if (vecs.size() != texts.size())
        throw EndpointError("encoder returned " + std::to_string(vecs.size()) + " vectors for " +
                            std::to_string(texts.size()) + " texts");
    std::vector<Embedding> out;
    out.reserve(vecs.size());
    for (const json& v : vecs) {
        Embedding e(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) e[static_cast<Eigen::Index>(i)] = v[i].get<double>();
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<Embedding> MockEncoderClient::embed(const std::vector<std::string>& texts) {
    calls_.fetch_add(1);
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const std::string& text : texts) {
        Embedding v(dim_);
        int filled = 0;
        for (std::uint64_t block = 0; filled < dim_; ++block) {
            std::string material = text;
            material.push_back('\0');
            material += std::to_string(block);
            auto digest = sha256(material);
            for (std::uint8_t b : digest) {
                if (filled >= dim_) break;
                v[filled++] = (static_cast<double>(b) - 127.5) / 127.5;
            }
        }
        out.push_back(std::move(v));
    }
    return out;
}

CachingEncoder::CachingEncoder(EncoderClient& base, std::filesystem::path cache_dir, EmbedOptions options)
    : base_(base), cache_dir_(std::move(cache_dir)), options_(options) {
    if (!cache_dir_.empty()) std::filesystem::create_directories(cache_dir_);
}

bool CachingEncoder::lookup(const std::string& key, Embedding& out) {
    {
        std::lock_guard lock(mutex_);
        auto it = memory_.find(key);
        if (it != memory_.end()) {
            out = it->second;
            return true;
        }
    }
    if (cache_dir_.empty()) return false;
    std::filesystem::path file = cache_dir_ / (key + ".json");
    if (!std::filesystem::exists(file)) return false;
    json doc = json::parse(read_text_file(file));
    Embedding v(doc.at("values").size());
    for (std::size_t i = 0; i < doc["values"].size(); ++i)
        v[static_cast<Eigen::Index>(i)] = doc["values"][i].get<double>();
    out = v;
    std::lock_guard lock(mutex_);
    memory_.emplace(key, std::move(v));
    return true;
}

void CachingEncoder::store(const std::string& key, const Embedding& v) {
    {
        std::lock_guard lock(mutex_);
        memory_[key] = v;
    }
    if (cache_dir_.empty()) return;
    json doc = {{"dim", v.size()}, {"values", std::vector<double>(v.begin(), v.end())}};
    atomic_write_file(cache_dir_ / (key + ".json"), doc.dump());
}

std::vector<Embedding> CachingEncoder::embed(const std::vector<std::string>& texts) {
    std::vector<Embedding> out(texts.size());
    std::vector<std::size_t> misses;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        std::string key = sha256_hex(identity() + "\n" + texts[i]);
        if (!lookup(key, out[i])) misses.push_back(i);
    }
    if (misses.empty()) return out;

    // Deduplicate miss texts so one endpoint vector can fill repeated inputs.
    std::vector<std::string> unique_texts;
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i : misses) {
        if (position.emplace(texts[i], unique_texts.size()).second) unique_texts.push_back(texts[i]);
    }

    std::vector<Embedding> fetched(unique_texts.size());
    std::size_t batch = std::max<std::size_t>(1, options_.batch_size);
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    for (std::size_t lo = 0; lo < unique_texts.size(); lo += batch)
        ranges.emplace_back(lo, std::min(lo + batch, unique_texts.size()));

    auto run_range = [&](std::pair<std::size_t, std::size_t> r) {
        std::vector<std::string> chunk(unique_texts.begin() + static_cast<std::ptrdiff_t>(r.first),
                                       unique_texts.begin() + static_cast<std::ptrdiff_t>(r.second));
        std::vector<Embedding> vecs = base_.embed(chunk);
        endpoint_calls_.fetch_add(1);
        if (vecs.size() != chunk.size()) throw EndpointError("encoder returned a short batch");
        for (std::size_t i = 0; i < vecs.size(); ++i) fetched[r.first + i] = std::move(vecs[i]);
    };

    std::size_t parallelism = std::max<std::size_t>(1, options_.parallelism);
    for (std::size_t next = 0; next < ranges.size();) {
        std::vector<std::future<void>> inflight;
        while (inflight.size() < parallelism && next < ranges.size())
            inflight.push_back(std::async(std::launch::async, run_range, ranges[next++]));
        for (auto& f : inflight) f.get();
    }

    for (std::size_t i : misses) {
        const Embedding& v = fetched[position.at(texts[i])];
        if (!v.allFinite()) throw EndpointError("encoder returned non-finite values");
        out[i] = v;
        store(sha256_hex(identity() + "\n" + texts[i]), v);
    }
    return out;
}

std::vector<Embedding> embed_batch(const std::vector<std::string>& texts, EncoderClient& client) {
    for (const std::string& t : texts)
        if (trim(t).empty()) throw ValidationError("embed_batch requires non-empty texts");
    std::vector<Embedding> vectors = client.embed(texts);
    if (vectors.size() != texts.size()) throw EndpointError("encoder returned a short batch");
    for (const Embedding& v : vectors) {
        if (v.size() != vectors.front().size())
            throw EndpointError("embedding dim mismatch across a batch");
        if (!v.allFinite()) throw EndpointError("encoder returned non-finite values");
    }
    return vectors;
}

} // namespace dimabsa
