#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qrng/bits.hpp"
#include "qrng/characterize.hpp"
#include "qrng/sensor.hpp"

namespace qrng {

using Seed256 = std::array<std::uint8_t, 32>;

/// Published default matrix seed (the ASCII bytes "qrng-default-extractor-matrix-01").
Seed256 default_matrix_seed() noexcept;
Seed256 parse_seed_hex(std::string_view hex);
std::string seed_to_hex(const Seed256& seed);

inline constexpr std::size_t kMaxExtractorInputBits = std::size_t{1} << 20;

/// Fixed k x l binary matrix stored as k rows of l bits, each row packed into
/// ceil(l / 64) little-endian words (column i at word i / 64, bit i % 64).
/// Output bit j of a block r is parity(row_j AND r), i.e. y = M r over GF(2).
class BinaryMatrix {
public:
    /// Expands the seed with ChaCha20 (nonce = k << 32 | l). Requires 0 < k < l <= 2^20.
    static BinaryMatrix generate(const Seed256& seed, std::size_t k, std::size_t l);

    /// Builds a matrix from explicit rows (each of length l). Seed is zero.
    static BinaryMatrix from_rows(const std::vector<std::vector<bool>>& rows);

    std::size_t k() const noexcept { return k_; }
    std::size_t l() const noexcept { return l_; }
    std::size_t words_per_row() const noexcept { return words_per_row_; }
    const Seed256& seed() const noexcept { return seed_; }
    std::uint64_t digest() const noexcept { return digest_; }

    std::span<const std::uint64_t> row(std::size_t j) const noexcept {
        return {words_.data() + j * words_per_row_, words_per_row_};
    }
    bool at(std::size_t j, std::size_t i) const noexcept {
        return (words_[j * words_per_row_ + (i >> 6)] >> (i & 63)) & 1u;
    }
    std::size_t count_ones() const noexcept;

    /// "QRNGM1" | k u32 | l u32 | seed[32] | digest u64 | k*ceil(l/64) u64 words, all little-endian.
    void write(std::ostream& out) const;
    static BinaryMatrix read(std::istream& in);
    void save(const std::filesystem::path& path) const;
    static BinaryMatrix load(const std::filesystem::path& path);

private:
    BinaryMatrix(std::size_t k, std::size_t l, const Seed256& seed, std::vector<std::uint64_t> words);
    std::uint64_t compute_digest() const noexcept;

    std::size_t k_ = 0;
    std::size_t l_ = 0;
    std::size_t words_per_row_ = 0;
    Seed256 seed_{};
    std::vector<std::uint64_t> words_;
    std::uint64_t digest_ = 0;
};

struct StreamProvenance {
    std::vector<std::string> frame_sources;
    std::string pixel_order = "row-major, unmasked pixels only";
    std::string bit_order = "lsb-first within each pixel code";
};

struct RawBitStream {
    BitVector bits;
    StreamProvenance provenance;
};

/// Concatenates the bit_depth bits of every usable pixel (row-major), least
/// significant bit first. Throws std::invalid_argument on mask geometry mismatch.
RawBitStream frame_to_bits(const Frame& frame, const PixelMask* mask = nullptr);
void append_frame_bits(RawBitStream& stream, const Frame& frame, const PixelMask* mask = nullptr);
RawBitStream frames_to_bits(std::span<const Frame> frames, const PixelMask* mask = nullptr);

/// Number of raw bits frame_to_bits would produce.
std::size_t raw_bit_count(std::size_t usable_pixels, int bit_depth, std::size_t frames = 1) noexcept;

struct ExtractedStream {
    BitVector bits;
    std::size_t blocks_processed = 0;
    std::size_t residual_bits_discarded = 0;
};

/// Splits the input into consecutive l-bit blocks and emits k bits per block.
/// A trailing partial block is discarded and counted. Output is identical for
/// every worker count (`workers == 0` uses default_worker_count()).
ExtractedStream extract(const BitVector& input, const BinaryMatrix& matrix, std::size_t workers = 0);
ExtractedStream extract(const RawBitStream& stream, const BinaryMatrix& matrix, std::size_t workers = 0);

/// k output bits of a single block, placed in the low bits of `out`
/// (out.size() >= ceil(k / 64)). `block` must hold words_per_row() words with
/// bits past l cleared.
void extract_block(const BinaryMatrix& matrix, std::span<const std::uint64_t> block,
                   std::span<std::uint64_t> out) noexcept;

struct ThroughputReport {
    double seconds = 0.0;
    std::size_t blocks = 0;
    double input_bits_per_second = 0.0;
    double output_bits_per_second = 0.0;
};

/// Extracts synthetic input repeatedly for at least `duration`. A zero or
/// negative duration throws std::invalid_argument.
ThroughputReport extract_throughput_bench(const BinaryMatrix& matrix, std::chrono::duration<double> duration,
                                          std::size_t workers = 0);

}  // namespace qrng
