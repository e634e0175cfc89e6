#pragma once

#include <deque>
#include <memory>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "loopcheck/chat.hpp"
#include "loopcheck/transcript.hpp"

namespace loopcheck::chat {

/// Serves recorded responses keyed by prompt digest, in recorded order.
/// Runs out loudly (ReplayExhausted) instead of inventing text.
class ReplayBackend : public ChatBackend {
public:
    explicit ReplayBackend(std::string id = "replay");

    /// Loads the events of one backend id from a persisted transcript.
    /// An empty filter takes every event.
    static std::unique_ptr<ReplayBackend> from_transcript(
        const std::filesystem::path& path, const std::string& backend_filter = "");

    void prime(const std::string& prompt, const std::string& response);
    void prime_event(const store::TranscriptEvent& event);

    ChatResult chat(const std::vector<ChatMessage>& messages,
                    const SamplingParams& params) override;

    std::string id() const override { return id_; }

    size_t remaining() const;

private:
    std::string id_;
    mutable std::mutex mutex_;
    std::map<std::string, std::deque<std::string>> by_digest_;
    size_t remaining_ = 0;
};

}  // namespace loopcheck::chat
