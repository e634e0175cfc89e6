#include "loopcheck/chat.hpp"

#include "loopcheck/sha256.hpp"

namespace loopcheck::chat {

const char* to_string(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

BackendKind backend_kind_from_string(const std::string& s) {
    if (s == "http") return BackendKind::Http;
    if (s == "simulator") return BackendKind::Simulator;
    if (s == "replay") return BackendKind::Replay;
    throw InvalidRequest("unknown backend kind: " + s);
}

const char* to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::Http: return "http";
        case BackendKind::Simulator: return "simulator";
        case BackendKind::Replay: return "replay";
    }
    return "simulator";
}

void validate_request(const std::vector<ChatMessage>& messages, const SamplingParams& params) {
    if (messages.empty()) throw InvalidRequest("message list is empty");
    if (messages.back().role != Role::User)
        throw InvalidRequest("last message must have role user");
    for (const auto& m : messages) {
        if (m.image && m.role != Role::User)
            throw InvalidRequest("image attachments are only valid on user messages");
    }
    if (params.n_samples < 1) throw InvalidRequest("n_samples must be >= 1");
    if (params.max_tokens < 1) throw InvalidRequest("max_tokens must be >= 1");
    if (params.temperature < 0.0) throw InvalidRequest("temperature must be >= 0");
}

nlohmann::json canonical_messages(const std::vector<ChatMessage>& messages) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : messages) {
        nlohmann::json jm{{"role", to_string(m.role)}, {"text", m.text}};
        if (m.image) {
            jm["image_sha256"] = sha256_hex(m.image->bytes);
            jm["image_media_type"] = m.image->media_type;
        }
        arr.push_back(std::move(jm));
    }
    return arr;
}

std::string cache_key(const BackendConfig& config, const std::vector<ChatMessage>& messages,
                      const SamplingParams& params) {
    nlohmann::json j{
        {"model", config.model_name},
        {"messages", canonical_messages(messages)},
        {"temperature", params.temperature},
        {"n", params.n_samples},
        {"max_tokens", params.max_tokens},
    };
    if (params.seed) j["seed"] = *params.seed;
    return sha256_hex(j.dump());
}

std::string prompt_digest(const std::vector<ChatMessage>& messages) {
    return sha256_hex(canonical_messages(messages).dump());
}

}  // namespace loopcheck::chat
