#include "qrng/characterize.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "qrng/parallel.hpp"

namespace qrng {

namespace {

__extension__ typedef unsigned __int128 u128;

// Pairwise summation in a fixed tree order.
double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 32) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += x[i];
        }
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

}  // namespace

PixelStats pixel_stats(std::span<const Frame> frames) {
    if (frames.size() < 2) {
        throw std::invalid_argument("pixel_stats needs at least 2 frames");
    }
    const Frame& first = frames.front();
    for (const Frame& f : frames) {
        if (f.width != first.width || f.height != first.height || f.bit_depth != first.bit_depth ||
            f.codes.size() != first.codes.size()) {
            throw std::invalid_argument("pixel_stats: frames differ in geometry or bit depth");
        }
    }

    PixelStats stats;
    stats.width = first.width;
    stats.height = first.height;
    stats.bit_depth = first.bit_depth;
    stats.n_frames = frames.size();
    const std::size_t n_pixels = first.codes.size();
    stats.mean.resize(n_pixels);
    stats.variance.resize(n_pixels);

    const auto n = static_cast<u128>(frames.size());
    const double nd = static_cast<double>(frames.size());
    parallel_for(n_pixels, 1024, 0, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            std::uint64_t sum = 0;
            u128 sum_sq = 0;
            for (const Frame& f : frames) {
                const std::uint64_t c = f.codes[i];
                sum += c;
                sum_sq += c * c;
            }
            // N * sum_sq - sum^2 is exact and non-negative.
            const u128 numer = n * sum_sq - static_cast<u128>(sum) * sum;
            stats.mean[i] = static_cast<double>(sum) / nd;
            stats.variance[i] = static_cast<double>(numer) / (nd * (nd - 1.0));
        }
    });
    return stats;
}

const char* to_string(PixelFlag flag) noexcept {
    switch (flag) {
        case PixelFlag::usable: return "usable";
        case PixelFlag::dead: return "dead";
        case PixelFlag::stuck: return "stuck";
        case PixelFlag::hot: return "hot";
    }
    return "unknown";
}

PixelMask PixelMask::all_usable(std::size_t width, std::size_t height) {
    PixelMask m;
    m.width = width;
    m.height = height;
    m.flags.assign(width * height, PixelFlag::usable);
    return m;
}

std::size_t PixelMask::usable_count() const noexcept { return count(PixelFlag::usable); }

std::size_t PixelMask::count(PixelFlag flag) const noexcept {
    return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), flag));
}

PixelMask build_pixel_mask(const PixelStats& stats, const SensorConfig& config) {
    PixelMask mask = PixelMask::all_usable(stats.width, stats.height);
    if (stats.variance.empty()) {
        return mask;
    }
    std::vector<double> sorted = stats.variance;
    const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    const double median = *mid;
    const double dead_threshold = 0.25 * median;
    const int depth = stats.bit_depth > 0 ? stats.bit_depth : config.bit_depth;
    const double top = static_cast<double>((std::uint32_t{1} << depth) - 1);

    for (std::size_t i = 0; i < stats.variance.size(); ++i) {
        if (stats.mean[i] >= top - 1.0) {
            mask.flags[i] = PixelFlag::hot;
        } else if (stats.mean[i] <= 1.0) {
            mask.flags[i] = PixelFlag::stuck;
        } else if (stats.variance[i] < dead_threshold) {
            mask.flags[i] = PixelFlag::dead;
        }
    }
    return mask;
}

FanoPoint fano_factor(const PixelStats& stats, const SensorConfig& config, const PixelMask* mask) {
    if (mask != nullptr && (mask->width != stats.width || mask->height != stats.height)) {
        throw std::invalid_argument("fano_factor: mask geometry does not match frames");
    }
    std::vector<double> means;
    std::vector<double> variances;
    means.reserve(stats.mean.size());
    variances.reserve(stats.mean.size());
    for (std::size_t i = 0; i < stats.mean.size(); ++i) {
        if (mask == nullptr || mask->usable(i)) {
            means.push_back(stats.mean[i]);
            variances.push_back(stats.variance[i]);
        }
    }
    if (means.empty()) {
        throw std::domain_error("fano_factor: no usable pixels");
    }
    const double count = static_cast<double>(means.size());
    FanoPoint p;
    p.n_frames = stats.n_frames;
    p.mean_code = pairwise_sum(means.data(), means.size()) / count;
    p.variance_code = pairwise_sum(variances.data(), variances.size()) / count;

    const double signal = p.mean_code - config.zeta * config.offset;
    if (!(signal > 0.0)) {
        throw std::domain_error("fano_factor: mean code at or below the offset level");
    }
    if (p.variance_code == 0.0) {
        throw std::domain_error("fano_factor: zero temporal variance (identical frames?)");
    }
    p.fano = p.variance_code / (config.zeta * signal);
    return p;
}

FanoPoint fano_factor(std::span<const Frame> frames, const SensorConfig& config, const PixelMask* mask) {
    return fano_factor(pixel_stats(frames), config, mask);
}

PhotonTransferCurve fit_photon_transfer(std::span<const PtcPoint> points) {
    if (points.size() < 2) {
        throw std::invalid_argument("photon transfer fit needs at least two intensities");
    }
    const double n = static_cast<double>(points.size());
    double mx = 0.0;
    double my = 0.0;
    for (const auto& p : points) {
        mx += p.mean_code;
        my += p.variance_code;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& p : points) {
        sxx += (p.mean_code - mx) * (p.mean_code - mx);
        sxy += (p.mean_code - mx) * (p.variance_code - my);
    }
    if (!(sxx > 0.0) || sxx <= 1e-12 * mx * mx) {
        throw std::invalid_argument("photon transfer fit is singular (all intensities equal)");
    }

    PhotonTransferCurve curve;
    curve.points.assign(points.begin(), points.end());
    curve.fitted_zeta = sxy / sxx;
    curve.intercept = my - curve.fitted_zeta * mx;
    double ss = 0.0;
    for (const auto& p : points) {
        const double r = p.variance_code - (curve.intercept + curve.fitted_zeta * p.mean_code);
        ss += r * r;
    }
    curve.fit_residual = std::sqrt(ss / n) / std::fabs(my);
    if (!(curve.fitted_zeta > 0.0)) {
        throw std::domain_error("photon transfer fit produced a non-positive gain");
    }
    return curve;
}

PhotonTransferCurve estimate_zeta(std::span<const IntensityStack> sweep) {
    if (sweep.size() < 2) {
        throw std::invalid_argument("estimate_zeta needs at least two intensities");
    }
    std::vector<PtcPoint> points;
    points.reserve(sweep.size());
    for (const auto& stack : sweep) {
        const PixelStats stats = pixel_stats(stack.frames);
        const double count = static_cast<double>(stats.mean.size());
        points.push_back({pairwise_sum(stats.mean.data(), stats.mean.size()) / count,
                          pairwise_sum(stats.variance.data(), stats.variance.size()) / count});
    }
    return fit_photon_transfer(points);
}

OperatingRegion find_operating_region(std::span<const FanoCurvePoint> curve, double tolerance) {
    if (!(tolerance > 0.0)) {
        throw std::invalid_argument("operating region tolerance must be positive");
    }
    OperatingRegion best;
    std::size_t run_start = 0;
    bool in_run = false;
    auto close_run = [&](std::size_t last) {
        const std::size_t len = last - run_start + 1;
        if (best.empty || len > best.last - best.first + 1) {
            best.empty = false;
            best.first = run_start;
            best.last = last;
        }
    };
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const bool inside = std::fabs(curve[i].point.fano - 1.0) <= tolerance;
        if (inside && !in_run) {
            run_start = i;
            in_run = true;
        } else if (!inside && in_run) {
            close_run(i - 1);
            in_run = false;
        }
    }
    if (in_run) {
        close_run(curve.size() - 1);
    }
    if (!best.empty) {
        best.n_min = curve[best.first].n_bar;
        best.n_max = curve[best.last].n_bar;
    }
    return best;
}

void to_json(nlohmann::json& j, const FanoPoint& p) {
    j = nlohmann::json{{"mean_code", p.mean_code},
                       {"variance_code", p.variance_code},
                       {"fano", p.fano},
                       {"n_frames", p.n_frames}};
}

void to_json(nlohmann::json& j, const PhotonTransferCurve& c) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : c.points) {
        pts.push_back({{"mean_code", p.mean_code}, {"variance_code", p.variance_code}});
    }
    j = nlohmann::json{{"points", pts},
                       {"fitted_zeta", c.fitted_zeta},
                       {"intercept", c.intercept},
                       {"fit_residual", c.fit_residual}};
}

void to_json(nlohmann::json& j, const OperatingRegion& r) {
    if (r.empty) {
        j = nlohmann::json{{"empty", true}};
    } else {
        j = nlohmann::json{{"empty", false}, {"n_min", r.n_min}, {"n_max", r.n_max}};
    }
}

std::string fano_curve_csv(std::span<const FanoCurvePoint> curve) {
    std::ostringstream out;
    out << "n_bar,mean_code,variance_code,fano\n" << std::setprecision(10);
    for (const auto& c : curve) {
        out << c.n_bar << ',' << c.point.mean_code << ',' << c.point.variance_code << ',' << c.point.fano
            << '\n';
    }
    return out.str();
}

}  // namespace qrng
