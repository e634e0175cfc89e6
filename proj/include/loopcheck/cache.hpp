#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace loopcheck::chat {

/// Content-addressed response cache: one file per key under the cache
/// directory, holding the canonical request and the raw response body.
/// Writes go through a temp file and an atomic rename; reads take no lock.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& canonical_request,
             const std::string& response_body) const;

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

}  // namespace loopcheck::chat
