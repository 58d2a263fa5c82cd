#include "qrng/bits.hpp"

#include <bit>
#include <stdexcept>

namespace qrng {

BitVector::BitVector(std::size_t n_bits) : words_((n_bits + 63) / 64, 0), size_(n_bits) {}

void BitVector::set(std::size_t i, bool value) noexcept {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (value) {
        words_[i >> 6] |= mask;
    } else {
        words_[i >> 6] &= ~mask;
    }
}

void BitVector::push_back(bool bit) {
    if ((size_ & 63) == 0) {
        words_.push_back(0);
    }
    if (bit) {
        words_.back() |= std::uint64_t{1} << (size_ & 63);
    }
    ++size_;
}

void BitVector::append_bits(std::uint64_t value, unsigned count) {
    if (count == 0) {
        return;
    }
    if (count < 64) {
        value &= (std::uint64_t{1} << count) - 1;
    }
    const unsigned used = static_cast<unsigned>(size_ & 63);
    if (used == 0) {
        words_.push_back(value);
    } else {
        words_.back() |= value << used;
        if (used + count > 64) {
            words_.push_back(value >> (64 - used));
        }
    }
    size_ += count;
}

void BitVector::append(const BitVector& other) {
    const std::size_t full = other.size_ / 64;
    reserve(size_ + other.size_);
    for (std::size_t w = 0; w < full; ++w) {
        append_bits(other.words_[w], 64);
    }
    const unsigned tail = static_cast<unsigned>(other.size_ & 63);
    if (tail != 0) {
        append_bits(other.words_[full], tail);
    }
}

std::uint64_t BitVector::read_bits(std::size_t pos, unsigned count) const noexcept {
    if (count == 0) {
        return 0;
    }
    const std::size_t w = pos >> 6;
    const unsigned shift = static_cast<unsigned>(pos & 63);
    std::uint64_t value = words_[w] >> shift;
    if (shift != 0 && shift + count > 64 && w + 1 < words_.size()) {
        value |= words_[w + 1] << (64 - shift);
    }
    if (count < 64) {
        value &= (std::uint64_t{1} << count) - 1;
    }
    return value;
}

std::size_t BitVector::count_ones() const noexcept {
    std::size_t ones = 0;
    for (auto w : words_) {
        ones += static_cast<std::size_t>(std::popcount(w));
    }
    return ones;
}

void BitVector::resize(std::size_t n_bits) {
    words_.resize((n_bits + 63) / 64, 0);
    size_ = n_bits;
    if ((size_ & 63) != 0) {
        words_.back() &= (std::uint64_t{1} << (size_ & 63)) - 1;
    }
}

BitVector BitVector::from_bools(std::span<const bool> bits) {
    BitVector v;
    v.reserve(bits.size());
    for (bool b : bits) {
        v.push_back(b);
    }
    return v;
}

BitVector BitVector::from_string(const char* zeros_and_ones) {
    BitVector v;
    for (const char* p = zeros_and_ones; *p != '\0'; ++p) {
        if (*p == '0' || *p == '1') {
            v.push_back(*p == '1');
        } else if (*p != ' ' && *p != '_') {
            throw std::invalid_argument("BitVector::from_string: unexpected character");
        }
    }
    return v;
}

std::vector<std::uint8_t> pack_msb_first(const BitVector& bits) {
    std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
    const auto words = bits.words();
    // Each word holds 8 bytes worth of stream bits in LSB-first order; reverse
    // the bits within each byte to get MSB-first packing.
    for (std::size_t byte = 0; byte < out.size(); ++byte) {
        const std::uint8_t lsb_first =
            static_cast<std::uint8_t>(words[byte >> 3] >> ((byte & 7) * 8));
        std::uint8_t r = lsb_first;
        r = static_cast<std::uint8_t>((r & 0xF0u) >> 4 | (r & 0x0Fu) << 4);
        r = static_cast<std::uint8_t>((r & 0xCCu) >> 2 | (r & 0x33u) << 2);
        r = static_cast<std::uint8_t>((r & 0xAAu) >> 1 | (r & 0x55u) << 1);
        out[byte] = r;
    }
    return out;
}

BitVector unpack_msb_first(std::span<const std::uint8_t> bytes) {
    return unpack_msb_first(bytes, bytes.size() * 8);
}

BitVector unpack_msb_first(std::span<const std::uint8_t> bytes, std::size_t n_bits) {
    if (n_bits > bytes.size() * 8) {
        throw std::invalid_argument("unpack_msb_first: bit count exceeds payload");
    }
    BitVector v;
    v.reserve(n_bits);
    const std::size_t full = n_bits / 8;
    for (std::size_t i = 0; i < full; ++i) {
        std::uint8_t r = bytes[i];
        r = static_cast<std::uint8_t>((r & 0xF0u) >> 4 | (r & 0x0Fu) << 4);
        r = static_cast<std::uint8_t>((r & 0xCCu) >> 2 | (r & 0x33u) << 2);
        r = static_cast<std::uint8_t>((r & 0xAAu) >> 1 | (r & 0x55u) << 1);
        v.append_bits(r, 8);
    }
    for (std::size_t i = full * 8; i < n_bits; ++i) {
        v.push_back((bytes[i / 8] >> (7 - (i % 8))) & 1u);
    }
    return v;
}

}  // namespace qrng
