#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

namespace qrng {

/// 256-bit key as eight little-endian 32-bit words.
using ChaChaKey = std::array<std::uint32_t, 8>;
using ChaChaBlock = std::array<std::uint32_t, 16>;

/// ChaCha20 block function (RFC 8439 round structure, original 64-bit counter
/// and 64-bit nonce layout). A keyed counter-based PRF: the output depends only
/// on (key, nonce, counter), so any block can be computed independently.
ChaChaBlock chacha20_block(const ChaChaKey& key, std::uint64_t nonce, std::uint64_t counter) noexcept;

ChaChaKey key_from_bytes(std::span<const std::uint8_t, 32> bytes) noexcept;

/// Sequential 64-bit output drawn from consecutive ChaCha20 blocks of one
/// (key, nonce) stream. Satisfies UniformRandomBitGenerator.
class ChaChaStream {
public:
    using result_type = std::uint64_t;

    ChaChaStream(const ChaChaKey& key, std::uint64_t nonce, std::uint64_t counter = 0) noexcept
        : key_(key), nonce_(nonce), counter_(counter) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (pos_ == 16) {
            refill();
        }
        const std::uint64_t lo = block_[pos_];
        const std::uint64_t hi = block_[pos_ + 1];
        pos_ += 2;
        return lo | (hi << 32);
    }

    /// Uniform double in [0, 1) with 53 bits of resolution.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    void refill() noexcept {
        block_ = chacha20_block(key_, nonce_, counter_++);
        pos_ = 0;
    }

    ChaChaKey key_;
    std::uint64_t nonce_;
    std::uint64_t counter_;
    ChaChaBlock block_{};
    unsigned pos_ = 16;
};

}  // namespace qrng
