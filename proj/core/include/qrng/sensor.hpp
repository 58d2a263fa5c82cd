#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrng/chacha.hpp"

namespace qrng {

/// Physical and electronic parameters of one pixel chain: lossy element (eta),
/// unit-efficiency photon-to-electron conversion, additive Gaussian technical
/// noise, electron-domain offset, full-well clip and a b-bit ADC with gain zeta.
struct SensorConfig {
    std::string name = "custom";
    double eta = 1.0;           ///< transmission probability, (0, 1]
    double zeta = 1.0;          ///< codes per electron, > 0
    double sigma_t = 0.0;       ///< technical noise, electrons
    double offset = 0.0;        ///< dark-level offset, electrons (may be negative)
    double full_well = 1.0e6;   ///< saturation, electrons
    int bit_depth = 16;         ///< ADC width, 1..16

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;

    /// zeta >= 1: every electron count maps to at least one distinct code.
    bool resolves_electrons() const noexcept { return zeta >= 1.0; }

    std::uint32_t max_code() const noexcept { return (std::uint32_t{1} << bit_depth) - 1; }
};

/// Built-in presets: "atik383l" (CCD) and "nokia-n9" (CMOS, green channel).
SensorConfig sensor_preset(std::string_view name);
std::vector<std::string> sensor_preset_names();

void to_json(nlohmann::json& j, const SensorConfig& c);
void from_json(const nlohmann::json& j, SensorConfig& c);
SensorConfig load_sensor_config(const std::filesystem::path& path);

struct Frame {
    std::size_t width = 0;
    std::size_t height = 0;
    int bit_depth = 16;
    std::vector<std::uint16_t> codes;  ///< row-major
    std::string source;                ///< provenance tag

    std::size_t pixel_count() const noexcept { return width * height; }
    std::uint16_t at(std::size_t x, std::size_t y) const { return codes[y * width + x]; }
    std::uint32_t max_code() const noexcept { return (std::uint32_t{1} << bit_depth) - 1; }

    /// Throws std::invalid_argument on a size or range violation.
    void validate() const;
};

/// Mean absorbed photoelectrons per pixel; sigma_q = sqrt(n_bar).
class PixelSignalModel {
public:
    explicit PixelSignalModel(double n_bar);
    double n_bar() const noexcept { return n_bar_; }
    double sigma_q() const noexcept { return sigma_q_; }

private:
    double n_bar_;
    double sigma_q_;
};

/// One realisation of the two noise components: absorbed photon count
/// (quantum part) and technical noise in electrons.
struct NoiseDraws {
    std::int64_t photons = 0;
    double technical = 0.0;
};

/// eta * incident_mean. The only place eta enters; everything else takes the
/// absorbed mean.
double absorbed_mean(double incident_mean, const SensorConfig& config);

NoiseDraws draw_noise(const PixelSignalModel& model, const SensorConfig& config, ChaChaStream& gen) noexcept;

/// code = clamp(round(zeta * min(max(n + t + offset, 0), full_well)), 0, 2^b - 1),
/// rounding half away from zero.
std::uint16_t simulate_pixel(const SensorConfig& config, const NoiseDraws& draws) noexcept;

/// Upper bound on width * height accepted by the simulator.
inline constexpr std::size_t kMaxFramePixels = std::size_t{1} << 32;

/// Deterministic in (config, n_bar, width, height, seed, frame_id). Each pixel
/// draws from its own ChaCha20 stream keyed by (seed, frame_id) with the pixel
/// index as nonce, so the result does not depend on the worker count.
Frame simulate_frame(const SensorConfig& config, double n_bar, std::size_t width, std::size_t height,
                     std::uint64_t seed, std::uint64_t frame_id = 0, std::size_t workers = 0);

/// `count` frames with frame ids first_frame_id, first_frame_id + 1, ...
std::vector<Frame> simulate_stack(const SensorConfig& config, double n_bar, std::size_t width,
                                  std::size_t height, std::size_t count, std::uint64_t seed,
                                  std::uint64_t first_frame_id = 0, std::size_t workers = 0);

/// One frame per intensity; intensity i uses frame id i.
std::vector<Frame> sweep_intensities(const SensorConfig& config, std::span<const double> n_bars,
                                     std::size_t width, std::size_t height, std::uint64_t seed,
                                     std::size_t workers = 0);

}  // namespace qrng
