#include "qrng/variates.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace qrng {

namespace {

constexpr std::size_t kTableSize = 256;

const std::array<double, kTableSize>& log_factorial_table() {
    static const std::array<double, kTableSize> table = [] {
        std::array<double, kTableSize> t{};
        double acc = 0.0;
        t[0] = 0.0;
        for (std::size_t k = 1; k < kTableSize; ++k) {
            acc += std::log(static_cast<double>(k));
            t[k] = acc;
        }
        return t;
    }();
    return table;
}

}  // namespace

double log_factorial(std::uint64_t k) noexcept {
    if (k < kTableSize) {
        return log_factorial_table()[k];
    }
    // ln Gamma(n + 1), n >= 256: Stirling with three correction terms is
    // accurate far below double epsilon here.
    const double n = static_cast<double>(k);
    const double inv = 1.0 / n;
    const double inv2 = inv * inv;
    return n * std::log(n) - n + 0.5 * std::log(2.0 * std::numbers::pi * n) +
           inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0)));
}

double standard_normal(ChaChaStream& gen) noexcept {
    for (;;) {
        const double u = 2.0 * gen.uniform() - 1.0;
        const double v = 2.0 * gen.uniform() - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

std::int64_t poisson(ChaChaStream& gen, double mean) noexcept {
    if (mean <= 0.0) {
        return 0;
    }
    if (mean < 30.0) {
        const double u = gen.uniform();
        double p = std::exp(-mean);
        double cdf = p;
        std::int64_t k = 0;
        while (u > cdf && k < 1000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }

    const double smu = std::sqrt(mean);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
        const double u = gen.uniform() - 0.5;
        const double v = gen.uniform();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) {
            return static_cast<std::int64_t>(kf);
        }
        if (kf < 0.0 || (us < 0.013 && v > us)) {
            continue;
        }
        const auto k = static_cast<std::uint64_t>(kf);
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + kf * log_mean - log_factorial(k)) {
            return static_cast<std::int64_t>(k);
        }
    }
}

}  // namespace qrng
