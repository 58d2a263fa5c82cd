#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrng/sensor.hpp"

namespace qrng {

/// Temporal per-pixel statistics over a stack of frames.
struct PixelStats {
    std::size_t width = 0;
    std::size_t height = 0;
    int bit_depth = 0;
    std::size_t n_frames = 0;
    std::vector<double> mean;
    std::vector<double> variance;  ///< unbiased (N - 1)
};

/// Integer accumulation makes the result exact and invariant under frame order.
/// Throws std::invalid_argument for fewer than 2 frames or mixed geometry.
PixelStats pixel_stats(std::span<const Frame> frames);

enum class PixelFlag : std::uint8_t { usable = 0, dead = 1, stuck = 2, hot = 3 };

const char* to_string(PixelFlag flag) noexcept;

struct PixelMask {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<PixelFlag> flags;

    static PixelMask all_usable(std::size_t width, std::size_t height);

    bool usable(std::size_t i) const noexcept { return flags[i] == PixelFlag::usable; }
    std::size_t usable_count() const noexcept;
    std::size_t count(PixelFlag flag) const noexcept;
};

/// Flags pixels whose temporal variance is below 0.25x the median (dead), or
/// whose mean sits within one code of the low rail (stuck) or high rail (hot).
/// Rail checks take precedence over the variance check.
PixelMask build_pixel_mask(const PixelStats& stats, const SensorConfig& config);

struct FanoPoint {
    double mean_code = 0.0;
    double variance_code = 0.0;
    double fano = 0.0;
    std::size_t n_frames = 0;
};

/// F = Var(c) / (zeta * (mean(c) - zeta * offset)), with mean and variance
/// averaged over usable pixels of the temporal statistics.
/// Throws std::domain_error when the mean is at or below the offset level or
/// when every pixel has zero temporal variance.
FanoPoint fano_factor(const PixelStats& stats, const SensorConfig& config, const PixelMask* mask = nullptr);
FanoPoint fano_factor(std::span<const Frame> frames, const SensorConfig& config, const PixelMask* mask = nullptr);

struct PtcPoint {
    double mean_code = 0.0;
    double variance_code = 0.0;
};

struct PhotonTransferCurve {
    std::vector<PtcPoint> points;
    double fitted_zeta = 0.0;  ///< slope of variance vs. mean
    double intercept = 0.0;
    double fit_residual = 0.0;  ///< RMS residual relative to mean variance
};

struct IntensityStack {
    double n_bar = 0.0;
    std::vector<Frame> frames;
};

/// Least-squares slope of variance vs. mean across intensities. Throws
/// std::invalid_argument for fewer than two intensities or a singular fit.
PhotonTransferCurve estimate_zeta(std::span<const IntensityStack> sweep);
PhotonTransferCurve fit_photon_transfer(std::span<const PtcPoint> points);

struct FanoCurvePoint {
    double n_bar = 0.0;
    FanoPoint point;
};

struct OperatingRegion {
    bool empty = true;
    double n_min = 0.0;
    double n_max = 0.0;
    std::size_t first = 0;  ///< index range into the curve, inclusive
    std::size_t last = 0;
};

/// Widest contiguous run of curve points with |F - 1| <= tolerance. Ties keep
/// the lowest-intensity run. The curve must be sorted by n_bar.
OperatingRegion find_operating_region(std::span<const FanoCurvePoint> curve, double tolerance = 0.15);

void to_json(nlohmann::json& j, const FanoPoint& p);
void to_json(nlohmann::json& j, const PhotonTransferCurve& c);
void to_json(nlohmann::json& j, const OperatingRegion& r);

/// CSV with header "n_bar,mean_code,variance_code,fano".
std::string fano_curve_csv(std::span<const FanoCurvePoint> curve);

}  // namespace qrng
