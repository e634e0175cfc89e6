#include "loopcheck/http_backend.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "loopcheck/rng.hpp"
#include "loopcheck/sha256.hpp"

namespace loopcheck::chat {

namespace {

using nlohmann::json;

json message_to_wire(const ChatMessage& m) {
    json jm{{"role", to_string(m.role)}};
    if (m.image) {
        json parts = json::array();
        parts.push_back({{"type", "text"}, {"text", m.text}});
        std::string url = "data:" + m.image->media_type + ";base64," +
                          base64_encode(m.image->bytes);
        parts.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
        jm["content"] = std::move(parts);
    } else {
        jm["content"] = m.text;
    }
    return jm;
}

}  // namespace

HttpBackend::HttpBackend(BackendConfig config)
    : config_(std::move(config)), slots_free_(std::max(1, config_.max_inflight)) {
    if (config_.endpoint_url.empty())
        throw InvalidRequest("http backend requires endpoint_url");
    // split scheme://host:port from an optional path prefix
    size_t scheme = config_.endpoint_url.find("://");
    size_t path = scheme == std::string::npos
                      ? config_.endpoint_url.find('/')
                      : config_.endpoint_url.find('/', scheme + 3);
    if (path == std::string::npos) {
        host_ = config_.endpoint_url;
    } else {
        host_ = config_.endpoint_url.substr(0, path);
        path_prefix_ = config_.endpoint_url.substr(path);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
    if (!config_.cache_dir.empty())
        cache_ = std::make_unique<ResponseCache>(config_.cache_dir);
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::build_request_body(const std::vector<ChatMessage>& messages,
                                            const SamplingParams& params,
                                            int n_override) const {
    json body{
        {"model", config_.model_name},
        {"temperature", params.temperature},
        {"n", n_override},
        {"max_tokens", params.max_tokens},
    };
    if (params.seed) body["seed"] = *params.seed;
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back(message_to_wire(m));
    body["messages"] = std::move(msgs);
    return body.dump();
}

bool HttpBackend::cache_usable(const SamplingParams& params) const {
    if (!cache_) return false;
    // nondeterministic sampling is not cached unless forced
    if (params.temperature > 0.0 && !params.seed && !config_.cache_nondeterministic)
        return false;
    return true;
}

HttpBackend::Exchange HttpBackend::perform(const std::vector<ChatMessage>& messages,
                                           const SamplingParams& params, int n_override) {
    SamplingParams key_params = params;
    key_params.n_samples = n_override;
    std::string key = cache_key(config_, messages, key_params);
    std::string request_body = build_request_body(messages, params, n_override);

    if (cache_usable(params)) {
        if (auto hit = cache_->get(key)) {
            Exchange ex;
            ex.body = *hit;
            ex.from_cache = true;
            return ex;
        }
    }

    httplib::Headers headers;
    if (!config_.auth_token_env_var.empty()) {
        const char* token = std::getenv(config_.auth_token_env_var.c_str());
        if (!token || !*token) throw AuthMissing(config_.auth_token_env_var);
        headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    {
        std::unique_lock<std::mutex> lock(slots_mutex_);
        slots_cv_.wait(lock, [&] { return slots_free_ > 0; });
        --slots_free_;
    }
    struct SlotGuard {
        HttpBackend* self;
        ~SlotGuard() {
            std::lock_guard<std::mutex> lock(self->slots_mutex_);
            ++self->slots_free_;
            self->slots_cv_.notify_one();
        }
    } guard{this};

    Rng jitter_rng(fnv1a64(key));
    auto started = std::chrono::steady_clock::now();
    Exchange ex;
    int attempts = config_.max_retries + 1;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        httplib::Client cli(host_);
        cli.set_connection_timeout(std::chrono::milliseconds(config_.timeout_ms));
        cli.set_read_timeout(std::chrono::milliseconds(config_.timeout_ms));
        cli.set_write_timeout(std::chrono::milliseconds(config_.timeout_ms));

        auto res = cli.Post(path_prefix_ + "/chat/completions", headers, request_body,
                            "application/json");
        if (!res) {
            throw Timeout("request to " + host_ + " failed: " +
                          httplib::to_string(res.error()));
        }
        if (res->status >= 200 && res->status < 300) {
            ex.body = res->body;
            ex.retries = attempt;
            ex.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();
            if (cache_usable(params)) cache_->put(key, request_body, ex.body);
            return ex;
        }
        bool retryable = res->status == 429 || res->status >= 500;
        if (!retryable || attempt + 1 == attempts) throw HttpStatus(res->status, res->body);
        int backoff = config_.retry_base_ms * (1 << attempt);
        int jitter = config_.retry_jitter_cap_ms > 0
                         ? int(jitter_rng.uniform_below(uint64_t(config_.retry_jitter_cap_ms)))
                         : 0;
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff + jitter));
    }
    throw Timeout("retry loop exhausted");  // unreachable
}

ChatResult HttpBackend::chat(const std::vector<ChatMessage>& messages,
                             const SamplingParams& params) {
    validate_request(messages, params);
    ChatResult result;
    result.cache_hit = true;
    if (config_.server_supports_n || params.n_samples == 1) {
        Exchange ex = perform(messages, params, params.n_samples);
        result.texts = parse_choices(ex.body, params.n_samples);
        result.retries = ex.retries;
        result.cache_hit = ex.from_cache;
        result.duration_ms = ex.duration_ms;
    } else {
        // server cannot fan out: issue sequential single-sample calls
        for (int i = 0; i < params.n_samples; ++i) {
            SamplingParams one = params;
            one.n_samples = 1;
            if (params.seed) one.seed = *params.seed + i;
            Exchange ex = perform(messages, one, 1);
            auto texts = parse_choices(ex.body, 1);
            result.texts.push_back(texts.front());
            result.retries += ex.retries;
            result.cache_hit = result.cache_hit && ex.from_cache;
            result.duration_ms += ex.duration_ms;
        }
    }
    return result;
}

std::vector<std::string> HttpBackend::parse_choices(const std::string& body,
                                                    int expect_n) const {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw MalformedResponse("response is not JSON: " + std::string(e.what()));
    }
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
        throw MalformedResponse("response has no choices");
    std::vector<std::string> texts;
    for (const auto& choice : j["choices"]) {
        if (!choice.contains("message") || !choice["message"].contains("content") ||
            !choice["message"]["content"].is_string())
            throw MalformedResponse("choice has no message content");
        texts.push_back(choice["message"]["content"].get<std::string>());
    }
    if (int(texts.size()) < expect_n)
        throw MalformedResponse("expected " + std::to_string(expect_n) + " choices, got " +
                                std::to_string(texts.size()));
    texts.resize(expect_n);
    return texts;
}

}  // namespace loopcheck::chat
