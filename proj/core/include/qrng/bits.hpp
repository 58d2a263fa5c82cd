#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qrng {

/// Growable packed bit sequence. Bit i lives in word i / 64 at position i % 64
/// (LSB of each word first). Bits past size() in the last word are always zero.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t n_bits);

    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }

    bool operator[](std::size_t i) const noexcept {
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }
    void set(std::size_t i, bool value) noexcept;

    void push_back(bool bit);
    /// Appends the low `count` bits of `value`, least significant first.
    void append_bits(std::uint64_t value, unsigned count);
    void append(const BitVector& other);

    /// Reads `count` (<= 64) bits starting at `pos` into the low bits of the result.
    std::uint64_t read_bits(std::size_t pos, unsigned count) const noexcept;

    std::size_t count_ones() const noexcept;

    void reserve(std::size_t n_bits) { words_.reserve((n_bits + 63) / 64); }
    void resize(std::size_t n_bits);
    void clear() noexcept {
        words_.clear();
        size_ = 0;
    }

    std::span<const std::uint64_t> words() const noexcept { return words_; }
    std::span<std::uint64_t> mutable_words() noexcept { return words_; }

    static BitVector from_bools(std::span<const bool> bits);
    static BitVector from_string(const char* zeros_and_ones);

    friend bool operator==(const BitVector& a, const BitVector& b) {
        return a.size_ == b.size_ && a.words_ == b.words_;
    }

private:
    std::vector<std::uint64_t> words_;
    std::size_t size_ = 0;
};

/// Packs bits MSB-first into bytes (first bit lands in bit 7 of byte 0); the
/// final partial byte is zero padded.
std::vector<std::uint8_t> pack_msb_first(const BitVector& bits);

/// Inverse of pack_msb_first. `n_bits` defaults to 8 * bytes.size().
BitVector unpack_msb_first(std::span<const std::uint8_t> bytes);
BitVector unpack_msb_first(std::span<const std::uint8_t> bytes, std::size_t n_bits);

}  // namespace qrng
