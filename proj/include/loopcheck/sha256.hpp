#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace loopcheck {

/// Incremental SHA-256 (FIPS 180-4). Used for cache keys, prompt digests
/// and template hash pinning.
class Sha256 {
public:
    Sha256();

    void update(const void* data, size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }

    /// Finalizes and returns the 32-byte digest. The object must not be
    /// updated afterwards.
    std::array<uint8_t, 32> digest();

    /// Finalizes and returns the digest as lowercase hex.
    std::string hex_digest();

private:
    void process_block(const uint8_t* block);

    std::array<uint32_t, 8> state_;
    uint64_t total_len_ = 0;
    std::array<uint8_t, 64> buffer_{};
    size_t buffer_len_ = 0;
};

std::string sha256_hex(std::string_view data);
std::string sha256_hex(const std::vector<uint8_t>& data);

/// FNV-1a 64-bit. Stable across platforms; used to derive per-question
/// simulator seeds.
uint64_t fnv1a64(std::string_view s);

std::string base64_encode(const uint8_t* data, size_t len);
std::string base64_encode(const std::vector<uint8_t>& data);

}  // namespace loopcheck
