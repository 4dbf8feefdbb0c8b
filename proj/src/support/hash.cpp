#include "qorpilot/support/hash.hpp"

#include <cstring>

namespace qorpilot {

namespace {

constexpr uint32_t kInit[4] = {0x67452301u, 0xefcdab89u, 0x98badcfeu, 0x10325476u};

constexpr uint32_t K[64] = {
    0xd76aa478, 0xe8c7b756, 0x242070db, 0xc1bdceee, 0xf57c0faf, 0x4787c62a,
    0xa8304613, 0xfd469501, 0x698098d8, 0x8b44f7af, 0xffff5bb1, 0x895cd7be,
    0x6b901122, 0xfd987193, 0xa679438e, 0x49b40821, 0xf61e2562, 0xc040b340,
    0x265e5a51, 0xe9b6c7aa, 0xd62f105d, 0x02441453, 0xd8a1e681, 0xe7d3fbc8,
    0x21e1cde6, 0xc33707d6, 0xf4d50d87, 0x455a14ed, 0xa9e3e905, 0xfcefa3f8,
    0x676f02d9, 0x8d2a4c8a, 0xfffa3942, 0x8771f681, 0x6d9d6122, 0xfde5380c,
    0xa4beea44, 0x4bdecfa9, 0xf6bb4b60, 0xbebfbc70, 0x289b7ec6, 0xeaa127fa,
    0xd4ef3085, 0x04881d05, 0xd9d4d039, 0xe6db99e5, 0x1fa27cf8, 0xc4ac5665,
    0xf4292244, 0x432aff97, 0xab9423a7, 0xfc93a039, 0x655b59c3, 0x8f0ccc92,
    0xffeff47d, 0x85845dd1, 0x6fa87e4f, 0xfe2ce6e0, 0xa3014314, 0x4e0811a1,
    0xf7537e82, 0xbd3af235, 0x2ad7d2bb, 0xeb86d391};

constexpr int S[64] = {7, 12, 17, 22, 7, 12, 17, 22, 7, 12, 17, 22, 7, 12, 17, 22,
                       5, 9,  14, 20, 5, 9,  14, 20, 5, 9,  14, 20, 5, 9,  14, 20,
                       4, 11, 16, 23, 4, 11, 16, 23, 4, 11, 16, 23, 4, 11, 16, 23,
                       6, 10, 15, 21, 6, 10, 15, 21, 6, 10, 15, 21, 6, 10, 15, 21};

inline uint32_t rotl(uint32_t x, int c) { return (x << c) | (x >> (32 - c)); }

constexpr char kHexDigits[] = "0123456789abcdef";

}  // namespace

Md5::Md5() {
    std::memcpy(state_, kInit, sizeof(state_));
}

void Md5::process_block(const uint8_t* block) {
    uint32_t m[16];
    for (int i = 0; i < 16; ++i) {
        m[i] = static_cast<uint32_t>(block[i * 4]) |
               (static_cast<uint32_t>(block[i * 4 + 1]) << 8) |
               (static_cast<uint32_t>(block[i * 4 + 2]) << 16) |
               (static_cast<uint32_t>(block[i * 4 + 3]) << 24);
    }
    uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
    for (int i = 0; i < 64; ++i) {
        uint32_t f;
        int g;
        if (i < 16) {
            f = (b & c) | (~b & d);
            g = i;
        } else if (i < 32) {
            f = (d & b) | (~d & c);
            g = (5 * i + 1) % 16;
        } else if (i < 48) {
            f = b ^ c ^ d;
            g = (3 * i + 5) % 16;
        } else {
            f = c ^ (b | ~d);
            g = (7 * i) % 16;
        }
        uint32_t tmp = d;
        d = c;
        c = b;
        b = b + rotl(a + f + K[i] + m[g], S[i]);
        a = tmp;
    }
    state_[0] += a;
    state_[1] += b;
    state_[2] += c;
    state_[3] += d;
}

void Md5::update(const void* data, size_t len) {
    const uint8_t* p = static_cast<const uint8_t*>(data);
    total_len_ += len;
    if (buffer_len_ > 0) {
        size_t take = std::min(len, sizeof(buffer_) - buffer_len_);
        std::memcpy(buffer_ + buffer_len_, p, take);
        buffer_len_ += take;
        p += take;
        len -= take;
        if (buffer_len_ == sizeof(buffer_)) {
            process_block(buffer_);
            buffer_len_ = 0;
        }
    }
    while (len >= 64) {
        process_block(p);
        p += 64;
        len -= 64;
    }
    if (len > 0) {
        std::memcpy(buffer_, p, len);
        buffer_len_ = len;
    }
}

Hash128 Md5::digest() const {
    Md5 copy = *this;
    uint64_t bit_len = copy.total_len_ * 8;
    uint8_t pad = 0x80;
    copy.update(&pad, 1);
    uint8_t zero = 0;
    while (copy.buffer_len_ != 56) copy.update(&zero, 1);
    uint8_t len_le[8];
    for (int i = 0; i < 8; ++i) len_le[i] = static_cast<uint8_t>(bit_len >> (8 * i));
    copy.update(len_le, 8);

    uint8_t out[16];
    for (int i = 0; i < 4; ++i) {
        out[i * 4] = static_cast<uint8_t>(copy.state_[i]);
        out[i * 4 + 1] = static_cast<uint8_t>(copy.state_[i] >> 8);
        out[i * 4 + 2] = static_cast<uint8_t>(copy.state_[i] >> 16);
        out[i * 4 + 3] = static_cast<uint8_t>(copy.state_[i] >> 24);
    }
    Hash128 h;
    for (int i = 0; i < 8; ++i) h.hi = (h.hi << 8) | out[i];
    for (int i = 8; i < 16; ++i) h.lo = (h.lo << 8) | out[i];
    return h;
}

std::string Hash128::to_hex() const {
    std::string s(32, '0');
    for (int i = 0; i < 16; ++i) {
        uint8_t byte = i < 8 ? static_cast<uint8_t>(hi >> (8 * (7 - i)))
                             : static_cast<uint8_t>(lo >> (8 * (15 - i)));
        s[i * 2] = kHexDigits[byte >> 4];
        s[i * 2 + 1] = kHexDigits[byte & 0xf];
    }
    return s;
}

std::optional<Hash128> Hash128::from_hex(std::string_view hex) {
    if (hex.size() != 32) return std::nullopt;
    Hash128 h;
    for (int i = 0; i < 32; ++i) {
        char c = hex[i];
        uint64_t v;
        if (c >= '0' && c <= '9') v = static_cast<uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') v = static_cast<uint64_t>(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F') v = static_cast<uint64_t>(c - 'A' + 10);
        else return std::nullopt;
        if (i < 16) h.hi = (h.hi << 4) | v;
        else h.lo = (h.lo << 4) | v;
    }
    return h;
}

Hash128 md5(std::string_view data) {
    Md5 m;
    m.update(data);
    return m.digest();
}

std::string md5_hex(std::string_view data) { return md5(data).to_hex(); }

uint64_t fnv1a64(std::string_view data) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace qorpilot
