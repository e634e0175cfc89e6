#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace loopcheck::chat {

enum class Role { System, User, Assistant };

const char* to_string(Role role);

struct ImageAttachment {
    std::vector<uint8_t> bytes;
    std::string media_type;  // e.g. "image/png"

    bool operator==(const ImageAttachment&) const = default;
};

struct ChatMessage {
    Role role = Role::User;
    std::string text;
    std::optional<ImageAttachment> image;  // only valid on user messages

    static ChatMessage user(std::string text) { return {Role::User, std::move(text), {}}; }
    static ChatMessage system(std::string text) { return {Role::System, std::move(text), {}}; }
};

struct SamplingParams {
    double temperature = 0.0;
    int n_samples = 1;
    int max_tokens = 512;
    std::optional<int64_t> seed;
};

struct ChatResult {
    std::vector<std::string> texts;  // exactly n_samples entries
    int retries = 0;
    bool cache_hit = false;
    int64_t duration_ms = 0;  // 0 for deterministic backends
};

struct InvalidRequest : std::runtime_error {
    explicit InvalidRequest(const std::string& what) : std::runtime_error(what) {}
};

struct Timeout : std::runtime_error {
    explicit Timeout(const std::string& what) : std::runtime_error(what) {}
};

struct HttpStatus : std::runtime_error {
    HttpStatus(int code, const std::string& body)
        : std::runtime_error("http status " + std::to_string(code) + ": " + body),
          code(code),
          body(body) {}
    int code;
    std::string body;
};

struct MalformedResponse : std::runtime_error {
    explicit MalformedResponse(const std::string& what) : std::runtime_error(what) {}
};

struct AuthMissing : std::runtime_error {
    explicit AuthMissing(const std::string& var)
        : std::runtime_error("auth token environment variable " + var + " is not set") {}
};

struct ReplayExhausted : std::runtime_error {
    explicit ReplayExhausted(const std::string& what) : std::runtime_error(what) {}
};

enum class BackendKind { Http, Simulator, Replay };

BackendKind backend_kind_from_string(const std::string& s);
const char* to_string(BackendKind kind);

struct BackendConfig {
    BackendKind kind = BackendKind::Simulator;
    std::string endpoint_url;        // Http: base url, e.g. http://host:1234/v1
    std::string model_name = "default";
    std::string auth_token_env_var;  // empty: no Authorization header
    int timeout_ms = 30000;
    int max_retries = 2;
    std::string cache_dir;           // empty: caching off
    bool cache_nondeterministic = false;
    bool server_supports_n = true;   // false: n_samples as sequential calls
    int max_inflight = 4;
    int retry_base_ms = 200;
    int retry_jitter_cap_ms = 250;
    nlohmann::json extra = nlohmann::json::object();  // kind-specific settings
};

/// Throws InvalidRequest unless: messages non-empty, last role is user,
/// images only on user messages, n_samples >= 1.
void validate_request(const std::vector<ChatMessage>& messages, const SamplingParams& params);

/// Stable JSON canonicalization of a message list; image bytes enter as a
/// digest, not inline.
nlohmann::json canonical_messages(const std::vector<ChatMessage>& messages);

/// 256-bit content key over (model, messages, temperature, n, max_tokens,
/// seed), hex encoded.
std::string cache_key(const BackendConfig& config, const std::vector<ChatMessage>& messages,
                      const SamplingParams& params);

/// Digest of the conversation text used for transcript events and replay
/// matching.
std::string prompt_digest(const std::vector<ChatMessage>& messages);

class ChatBackend {
public:
    virtual ~ChatBackend() = default;

    /// Returns exactly params.n_samples texts or throws.
    virtual ChatResult chat(const std::vector<ChatMessage>& messages,
                            const SamplingParams& params) = 0;

    virtual std::string id() const = 0;
};

}  // namespace loopcheck::chat
