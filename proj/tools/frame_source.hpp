#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrng/sensor.hpp"

namespace qrng::cli {

/// Frames plus whatever metadata travelled with them.
struct FrameSet {
    std::vector<Frame> frames;
    nlohmann::json meta = nlohmann::json::object();
    std::optional<SensorConfig> sensor;
    std::optional<double> n_bar;
};

/// Accepts a .pgm file, a raw dump with a "<file>.json" sidecar, or a
/// directory. Directories use manifest.json when present, otherwise every
/// .pgm/.raw file in name order.
FrameSet load_frame_set(const std::filesystem::path& path);

/// Metadata block written next to simulated frames.
nlohmann::json frame_metadata(const SensorConfig& config, double n_bar, std::uint64_t seed);

/// Writes frames into dir as frame_NNNN.pgm or frames.raw (+ sidecar) and a
/// manifest.json. Returns the paths written.
std::vector<std::filesystem::path> write_frame_set(const std::filesystem::path& dir, std::span<const Frame> frames,
                                                   const std::string& format, const nlohmann::json& meta);

}  // namespace qrng::cli
