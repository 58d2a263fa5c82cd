#include "qrng/extractor.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "qrng/chacha.hpp"
#include "qrng/parallel.hpp"

namespace qrng {

namespace {

constexpr char kMagic[6] = {'Q', 'R', 'N', 'G', 'M', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 8);
}

std::uint64_t get_le(std::istream& in, int n_bytes) {
    unsigned char b[8] = {};
    if (!in.read(reinterpret_cast<char*>(b), n_bytes)) {
        throw std::runtime_error("matrix file truncated");
    }
    std::uint64_t v = 0;
    for (int i = n_bytes - 1; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

}  // namespace

Seed256 default_matrix_seed() noexcept {
    constexpr char text[] = "qrng-default-extractor-matrix-01";
    Seed256 seed{};
    std::memcpy(seed.data(), text, 32);
    return seed;
}

Seed256 parse_seed_hex(std::string_view hex) {
    if (hex.size() != 64) {
        throw std::invalid_argument("matrix seed must be 64 hex digits");
    }
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument("matrix seed contains a non-hex digit");
    };
    Seed256 seed{};
    for (std::size_t i = 0; i < 32; ++i) {
        seed[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    }
    return seed;
}

std::string seed_to_hex(const Seed256& seed) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(64);
    for (auto b : seed) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 15]);
    }
    return s;
}

BinaryMatrix::BinaryMatrix(std::size_t k, std::size_t l, const Seed256& seed, std::vector<std::uint64_t> words)
    : k_(k), l_(l), words_per_row_((l + 63) / 64), seed_(seed), words_(std::move(words)) {
    digest_ = compute_digest();
}

BinaryMatrix BinaryMatrix::generate(const Seed256& seed, std::size_t k, std::size_t l) {
    if (k == 0 || k >= l || l > kMaxExtractorInputBits) {
        throw std::invalid_argument("extractor matrix needs 0 < k < l <= 2^20");
    }
    const std::size_t wpr = (l + 63) / 64;
    const std::uint64_t tail_mask = (l % 64 == 0) ? ~std::uint64_t{0} : (std::uint64_t{1} << (l % 64)) - 1;
    std::vector<std::uint64_t> words(k * wpr);
    ChaChaStream gen(key_from_bytes(seed), static_cast<std::uint64_t>(k) << 32 | l);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t w = 0; w < wpr; ++w) {
            words[j * wpr + w] = gen();
        }
        words[j * wpr + wpr - 1] &= tail_mask;
    }
    return BinaryMatrix(k, l, seed, std::move(words));
}

BinaryMatrix BinaryMatrix::from_rows(const std::vector<std::vector<bool>>& rows) {
    if (rows.empty() || rows.front().empty()) {
        throw std::invalid_argument("matrix needs at least one non-empty row");
    }
    const std::size_t k = rows.size();
    const std::size_t l = rows.front().size();
    const std::size_t wpr = (l + 63) / 64;
    std::vector<std::uint64_t> words(k * wpr, 0);
    for (std::size_t j = 0; j < k; ++j) {
        if (rows[j].size() != l) {
            throw std::invalid_argument("matrix rows differ in length");
        }
        for (std::size_t i = 0; i < l; ++i) {
            if (rows[j][i]) {
                words[j * wpr + i / 64] |= std::uint64_t{1} << (i % 64);
            }
        }
    }
    return BinaryMatrix(k, l, Seed256{}, std::move(words));
}

std::size_t BinaryMatrix::count_ones() const noexcept {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

std::uint64_t BinaryMatrix::compute_digest() const noexcept {
    // FNV-1a 64 over the little-endian bytes of (k, l, packed words).
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::uint64_t v, int n_bytes) {
        for (int i = 0; i < n_bytes; ++i) {
            h ^= (v >> (8 * i)) & 0xFF;
            h *= 0x100000001b3ull;
        }
    };
    mix(k_, 4);
    mix(l_, 4);
    for (auto w : words_) mix(w, 8);
    return h;
}

void BinaryMatrix::write(std::ostream& out) const {
    out.write(kMagic, sizeof kMagic);
    put_u32(out, static_cast<std::uint32_t>(k_));
    put_u32(out, static_cast<std::uint32_t>(l_));
    out.write(reinterpret_cast<const char*>(seed_.data()), 32);
    put_u64(out, digest_);
    for (auto w : words_) put_u64(out, w);
    if (!out) {
        throw std::runtime_error("failed writing matrix");
    }
}

BinaryMatrix BinaryMatrix::read(std::istream& in) {
    char magic[6];
    if (!in.read(magic, 6) || std::memcmp(magic, kMagic, 6) != 0) {
        throw std::runtime_error("not a QRNGM1 matrix file");
    }
    const auto k = static_cast<std::size_t>(get_le(in, 4));
    const auto l = static_cast<std::size_t>(get_le(in, 4));
    if (k == 0 || k >= l || l > kMaxExtractorInputBits) {
        throw std::runtime_error("matrix file has invalid dimensions");
    }
    Seed256 seed{};
    if (!in.read(reinterpret_cast<char*>(seed.data()), 32)) {
        throw std::runtime_error("matrix file truncated");
    }
    const std::uint64_t digest = get_le(in, 8);
    std::vector<std::uint64_t> words(k * ((l + 63) / 64));
    for (auto& w : words) w = get_le(in, 8);
    BinaryMatrix m(k, l, seed, std::move(words));
    if (m.digest() != digest) {
        throw std::runtime_error("matrix file digest mismatch");
    }
    return m;
}

void BinaryMatrix::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    write(out);
}

BinaryMatrix BinaryMatrix::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open matrix file " + path.string());
    }
    try {
        return read(in);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------

std::size_t raw_bit_count(std::size_t usable_pixels, int bit_depth, std::size_t frames) noexcept {
    return usable_pixels * static_cast<std::size_t>(bit_depth) * frames;
}

void append_frame_bits(RawBitStream& stream, const Frame& frame, const PixelMask* mask) {
    if (mask != nullptr && (mask->width != frame.width || mask->height != frame.height)) {
        throw std::invalid_argument("pixel mask geometry does not match frame");
    }
    const auto depth = static_cast<unsigned>(frame.bit_depth);
    const std::size_t usable = mask ? mask->usable_count() : frame.codes.size();
    stream.bits.reserve(stream.bits.size() + usable * depth);
    for (std::size_t i = 0; i < frame.codes.size(); ++i) {
        if (mask == nullptr || mask->usable(i)) {
            stream.bits.append_bits(frame.codes[i], depth);
        }
    }
    stream.provenance.frame_sources.push_back(frame.source);
}

RawBitStream frame_to_bits(const Frame& frame, const PixelMask* mask) {
    RawBitStream s;
    append_frame_bits(s, frame, mask);
    return s;
}

RawBitStream frames_to_bits(std::span<const Frame> frames, const PixelMask* mask) {
    RawBitStream s;
    for (const auto& f : frames) {
        append_frame_bits(s, f, mask);
    }
    return s;
}

void extract_block(const BinaryMatrix& matrix, std::span<const std::uint64_t> block,
                   std::span<std::uint64_t> out) noexcept {
    const std::size_t wpr = matrix.words_per_row();
    const std::size_t k = matrix.k();
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>((k + 63) / 64), 0);
    for (std::size_t j = 0; j < k; ++j) {
        const std::uint64_t* row = matrix.row(j).data();
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < wpr; ++w) {
            acc ^= row[w] & block[w];
        }
        out[j >> 6] |= static_cast<std::uint64_t>(std::popcount(acc) & 1) << (j & 63);
    }
}

ExtractedStream extract(const BitVector& input, const BinaryMatrix& matrix, std::size_t workers) {
    const std::size_t l = matrix.l();
    const std::size_t k = matrix.k();
    const std::size_t wpr = matrix.words_per_row();

    ExtractedStream result;
    result.blocks_processed = input.size() / l;
    result.residual_bits_discarded = input.size() - result.blocks_processed * l;
    result.bits = BitVector(result.blocks_processed * k);

    // Ranges are multiples of 64 blocks, so each range owns whole output words.
    std::span<std::uint64_t> out_words = result.bits.mutable_words();
    const std::size_t out_wpb = (k + 63) / 64;
    parallel_for(result.blocks_processed, 64, workers, [&](std::size_t begin, std::size_t end) {
        std::vector<std::uint64_t> block(wpr);
        std::vector<std::uint64_t> y(out_wpb);
        const auto input_words = input.words();
        const unsigned tail = static_cast<unsigned>(l & 63);
        for (std::size_t b = begin; b < end; ++b) {
            const std::size_t start = b * l;
            if ((start & 63) == 0) {
                std::copy_n(input_words.begin() + static_cast<std::ptrdiff_t>(start >> 6), wpr, block.begin());
                if (tail != 0) {
                    block[wpr - 1] &= (std::uint64_t{1} << tail) - 1;
                }
            } else {
                for (std::size_t w = 0; w < wpr; ++w) {
                    const unsigned count = (w + 1 == wpr && tail != 0) ? tail : 64;
                    block[w] = input.read_bits(start + 64 * w, count);
                }
            }
            extract_block(matrix, block, y);

            // Scatter k bits to output position b * k.
            std::size_t pos = b * k;
            std::size_t remaining = k;
            for (std::size_t w = 0; remaining > 0; ++w) {
                const unsigned take = static_cast<unsigned>(std::min<std::size_t>(64, remaining));
                const std::uint64_t v = y[w];
                const unsigned shift = static_cast<unsigned>(pos & 63);
                out_words[pos >> 6] |= v << shift;
                if (shift != 0 && shift + take > 64) {
                    out_words[(pos >> 6) + 1] |= v >> (64 - shift);
                }
                pos += take;
                remaining -= take;
            }
        }
    });
    return result;
}

ExtractedStream extract(const RawBitStream& stream, const BinaryMatrix& matrix, std::size_t workers) {
    return extract(stream.bits, matrix, workers);
}

ThroughputReport extract_throughput_bench(const BinaryMatrix& matrix, std::chrono::duration<double> duration,
                                          std::size_t workers) {
    if (!(duration.count() > 0.0)) {
        throw std::invalid_argument("throughput benchmark needs a positive duration");
    }
    // 4096 blocks of synthetic input drawn from a fixed ChaCha stream.
    const std::size_t blocks_per_pass = 4096;
    BitVector input(blocks_per_pass * matrix.l());
    ChaChaStream gen(ChaChaKey{1, 2, 3, 4, 5, 6, 7, 8}, 0);
    for (auto& w : input.mutable_words()) w = gen();
    input.resize(input.size());

    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    std::size_t blocks = 0;
    std::uint64_t sink = 0;
    double elapsed = 0.0;
    do {
        const ExtractedStream out = extract(input, matrix, workers);
        sink ^= out.bits.words().empty() ? 0 : out.bits.words()[0];
        blocks += out.blocks_processed;
        elapsed = std::chrono::duration<double>(clock::now() - start).count();
    } while (elapsed < duration.count());
    (void)sink;

    ThroughputReport r;
    r.seconds = elapsed;
    r.blocks = blocks;
    r.input_bits_per_second = static_cast<double>(blocks * matrix.l()) / elapsed;
    r.output_bits_per_second = static_cast<double>(blocks * matrix.k()) / elapsed;
    return r;
}

}  // namespace qrng
