#pragma once

#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "loopcheck/cache.hpp"
#include "loopcheck/chat.hpp"

namespace loopcheck::chat {

/// OpenAI-compatible chat-completions client: POST {endpoint}/chat/completions.
/// Retries 429 and 5xx with bounded exponential backoff, consults the
/// response cache before the network, and caps in-flight requests.
class HttpBackend : public ChatBackend {
public:
    explicit HttpBackend(BackendConfig config);
    ~HttpBackend() override;

    ChatResult chat(const std::vector<ChatMessage>& messages,
                    const SamplingParams& params) override;

    std::string id() const override { return "http:" + config_.model_name; }

    /// Request body for one call; exposed for wire-conformance tests.
    std::string build_request_body(const std::vector<ChatMessage>& messages,
                                   const SamplingParams& params, int n_override) const;

private:
    struct Exchange {
        std::string body;     // raw response body
        int retries = 0;
        bool from_cache = false;
        int64_t duration_ms = 0;
    };

    Exchange perform(const std::vector<ChatMessage>& messages, const SamplingParams& params,
                     int n_override);
    std::vector<std::string> parse_choices(const std::string& body, int expect_n) const;
    bool cache_usable(const SamplingParams& params) const;

    BackendConfig config_;
    std::string host_;         // scheme://host:port
    std::string path_prefix_;  // e.g. /v1
    std::unique_ptr<ResponseCache> cache_;

    // bounded in-flight requests
    std::mutex slots_mutex_;
    std::condition_variable slots_cv_;
    int slots_free_;
};

}  // namespace loopcheck::chat
