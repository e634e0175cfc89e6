#include "loopcheck/transcript.hpp"

#include <cstdio>
#include <fstream>

#ifdef _WIN32
#include <io.h>
#else
#include <unistd.h>
#endif

namespace loopcheck::store {

using nlohmann::json;

json to_json(const TranscriptEvent& e) {
    json j{
        {"type", "event"},
        {"run", e.run_id},
        {"seq", e.seq},
        {"stage", e.stage},
        {"prompt_sha", e.prompt_sha},
        {"prompt", e.prompt},
        {"response", e.response},
        {"backend", e.backend},
        {"ms", e.duration_ms},
        {"retries", e.retries},
    };
    if (!e.object.empty()) j["object"] = e.object;
    return j;
}

TranscriptEvent event_from_json(const json& j) {
    TranscriptEvent e;
    e.run_id = j.at("run").get<std::string>();
    e.seq = j.at("seq").get<int64_t>();
    e.stage = j.at("stage").get<std::string>();
    e.object = j.value("object", "");
    e.prompt_sha = j.at("prompt_sha").get<std::string>();
    e.prompt = j.at("prompt").get<std::string>();
    e.response = j.at("response").get<std::string>();
    e.backend = j.at("backend").get<std::string>();
    e.duration_ms = j.at("ms").get<int64_t>();
    e.retries = j.at("retries").get<int>();
    return e;
}

TranscriptWriter::TranscriptWriter(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    file_ = std::fopen(path.string().c_str(), "ab");
    if (!file_) throw IoError("cannot open transcript for append: " + path.string());
}

TranscriptWriter::~TranscriptWriter() { close(); }

void TranscriptWriter::append(const TranscriptEvent& e) { append_line(to_json(e)); }

void TranscriptWriter::append_line(const json& j) {
    if (!file_) throw IoError("transcript writer already closed");
    std::string line = j.dump();
    line.push_back('\n');
    if (std::fwrite(line.data(), 1, line.size(), file_) != line.size())
        throw IoError("short write to " + path_.string());
}

void TranscriptWriter::close() {
    if (!file_) return;
    std::fflush(file_);
#ifndef _WIN32
    ::fsync(fileno(file_));
#endif
    std::fclose(file_);
    file_ = nullptr;
}

void persist_transcript(const std::vector<TranscriptEvent>& events,
                        const std::filesystem::path& path) {
    std::error_code ec;
    std::filesystem::remove(path, ec);
    TranscriptWriter writer(path);
    for (const auto& e : events) writer.append(e);
    writer.close();
}

LoadedTranscript load_transcript(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open transcript: " + path.string());
    LoadedTranscript out;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            out.corrupt_lines.push_back({line_number, e.what()});
            continue;
        }
        std::string type = j.value("type", "event");
        if (type != "event") {
            out.other_lines.push_back(std::move(j));
            continue;
        }
        try {
            out.events.push_back(event_from_json(j));
        } catch (const json::exception& e) {
            out.corrupt_lines.push_back({line_number, e.what()});
        }
    }
    return out;
}

}  // namespace loopcheck::store
