#include "loopcheck/cache.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace loopcheck::chat {

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
    std::ifstream in(dir_ / key, std::ios::binary);
    if (!in) return std::nullopt;
    nlohmann::json j;
    try {
        in >> j;
        return j.at("response_body").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;  // treat a damaged entry as a miss
    }
}

void ResponseCache::put(const std::string& key, const std::string& canonical_request,
                        const std::string& response_body) const {
    nlohmann::json j{{"request", canonical_request}, {"response_body", response_body}};
    std::random_device rd;
    std::filesystem::path tmp = dir_ / (key + ".tmp" + std::to_string(rd()));
    {
        std::ofstream out(tmp, std::ios::binary);
        out << j.dump();
    }
    std::error_code ec;
    std::filesystem::rename(tmp, dir_ / key, ec);
    if (ec) std::filesystem::remove(tmp, ec);
}

}  // namespace loopcheck::chat
