#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrng/sensor.hpp"

namespace qrng {

/// Malformed or truncated frame data; the message carries the path when known.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class FrameFormat { pgm16, raw16le, raw8 };

const char* to_string(FrameFormat f) noexcept;
FrameFormat parse_frame_format(std::string_view name);

struct FrameFileHeader {
    FrameFormat format = FrameFormat::raw16le;
    std::size_t width = 0;
    std::size_t height = 0;
    int bit_depth = 16;
    std::size_t frame_count = 1;

    std::size_t bytes_per_sample() const noexcept { return format == FrameFormat::raw8 ? 1 : 2; }
    std::size_t payload_bytes() const noexcept {
        return frame_count * width * height * bytes_per_sample();
    }
    /// Throws std::invalid_argument when bit depth and format disagree.
    void validate() const;
};

void to_json(nlohmann::json& j, const FrameFileHeader& h);
void from_json(const nlohmann::json& j, FrameFileHeader& h);

/// Binary PGM (P5). Samples are one byte when maxval < 256, otherwise two
/// bytes big-endian. bit_depth = ceil(log2(maxval + 1)).
Frame read_pgm(std::istream& in, const std::string& label = "<stream>");
Frame read_pgm(const std::filesystem::path& path);
/// Writes maxval = 2^bit_depth - 1.
void write_pgm(const Frame& frame, std::ostream& out);
void write_pgm(const Frame& frame, const std::filesystem::path& path);

/// Headerless dumps: little-endian 16-bit or single-byte samples, frames
/// back to back. Payload size must match the header exactly.
std::vector<Frame> read_raw(std::istream& in, const FrameFileHeader& header, const std::string& label = "<stream>");
std::vector<Frame> read_raw(const std::filesystem::path& path, const FrameFileHeader& header);
void write_raw(std::span<const Frame> frames, const FrameFileHeader& header, std::ostream& out);
void write_raw(std::span<const Frame> frames, const FrameFileHeader& header, const std::filesystem::path& path);

/// Optional metadata next to a frame file: "<file>.json". Fields such as
/// sensor, n_bar_estimate and exposure are passed through untouched.
std::filesystem::path sidecar_path(const std::filesystem::path& frame_file);
std::optional<nlohmann::json> read_sidecar(const std::filesystem::path& frame_file);
void write_sidecar(const std::filesystem::path& frame_file, const nlohmann::json& meta);

}  // namespace qrng
