// 128-bit content hashing (MD5) used for node ids, fingerprints and cache keys.
#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace qorpilot {

struct Hash128 {
    uint64_t hi = 0;
    uint64_t lo = 0;

    auto operator<=>(const Hash128&) const = default;

    bool is_zero() const { return hi == 0 && lo == 0; }

    // 32 lowercase hex chars, digest byte order.
    std::string to_hex() const;
    static std::optional<Hash128> from_hex(std::string_view hex);
};

// Incremental MD5. One-shot helpers below cover the common cases.
class Md5 {
public:
    Md5();
    void update(const void* data, size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }
    Hash128 digest() const;  // does not consume; can keep updating a copy

private:
    void process_block(const uint8_t* block);

    uint32_t state_[4];
    uint64_t total_len_ = 0;
    uint8_t buffer_[64];
    size_t buffer_len_ = 0;
};

Hash128 md5(std::string_view data);
std::string md5_hex(std::string_view data);

// FNV-1a 64, used for embedding buckets and other non-identity hashing.
uint64_t fnv1a64(std::string_view data);

}  // namespace qorpilot

template <>
struct std::hash<qorpilot::Hash128> {
    size_t operator()(const qorpilot::Hash128& h) const noexcept {
        return static_cast<size_t>(h.hi ^ (h.lo * 0x9e3779b97f4a7c15ull));
    }
};
