#include "loopcheck/replay.hpp"

namespace loopcheck::chat {

ReplayBackend::ReplayBackend(std::string id) : id_(std::move(id)) {}

std::unique_ptr<ReplayBackend> ReplayBackend::from_transcript(
    const std::filesystem::path& path, const std::string& backend_filter) {
    auto backend = std::make_unique<ReplayBackend>("replay:" + path.filename().string());
    store::LoadedTranscript loaded = store::load_transcript(path);
    for (const auto& e : loaded.events) {
        if (!backend_filter.empty() && e.backend != backend_filter) continue;
        backend->prime_event(e);
    }
    return backend;
}

void ReplayBackend::prime(const std::string& prompt, const std::string& response) {
    std::string digest = prompt_digest({ChatMessage::user(prompt)});
    std::lock_guard<std::mutex> lock(mutex_);
    by_digest_[digest].push_back(response);
    ++remaining_;
}

void ReplayBackend::prime_event(const store::TranscriptEvent& event) {
    if (event.prompt_sha.empty()) return;
    std::lock_guard<std::mutex> lock(mutex_);
    by_digest_[event.prompt_sha].push_back(event.response);
    ++remaining_;
}

ChatResult ReplayBackend::chat(const std::vector<ChatMessage>& messages,
                               const SamplingParams& params) {
    validate_request(messages, params);
    std::string digest = prompt_digest(messages);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = by_digest_.find(digest);
    ChatResult result;
    for (int i = 0; i < params.n_samples; ++i) {
        if (it == by_digest_.end() || it->second.empty()) {
            throw ReplayExhausted("no recorded response for prompt digest " + digest +
                                  " (last user text: \"" + messages.back().text + "\")");
        }
        result.texts.push_back(it->second.front());
        it->second.pop_front();
        --remaining_;
    }
    return result;
}

size_t ReplayBackend::remaining() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return remaining_;
}

}  // namespace loopcheck::chat
