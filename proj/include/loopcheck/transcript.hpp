#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace loopcheck::store {

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// One model call (or pipeline note) within a run. Sequence numbers are
/// strictly increasing per run.
struct TranscriptEvent {
    std::string run_id;
    int64_t seq = 0;
    std::string stage;
    std::string object;  // empty for run-level events
    std::string prompt_sha;
    std::string prompt;
    std::string response;
    std::string backend;
    int64_t duration_ms = 0;
    int retries = 0;

    bool operator==(const TranscriptEvent&) const = default;
};

nlohmann::json to_json(const TranscriptEvent& e);
TranscriptEvent event_from_json(const nlohmann::json& j);

/// Append-only JSONL writer; fsyncs on close.
class TranscriptWriter {
public:
    explicit TranscriptWriter(const std::filesystem::path& path);
    ~TranscriptWriter();

    void append(const TranscriptEvent& e);
    void append_line(const nlohmann::json& j);
    void close();

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    FILE* file_ = nullptr;
};

void persist_transcript(const std::vector<TranscriptEvent>& events,
                        const std::filesystem::path& path);

struct CorruptLine {
    int line_number;  // 1-based
    std::string reason;
};

struct LoadedTranscript {
    std::vector<TranscriptEvent> events;
    std::vector<CorruptLine> corrupt_lines;
    std::vector<nlohmann::json> other_lines;  // non-event typed lines (run/object/result)
};

/// Reads a transcript JSONL. Damaged lines are reported, not fatal: all
/// parseable events are returned.
LoadedTranscript load_transcript(const std::filesystem::path& path);

}  // namespace loopcheck::store
