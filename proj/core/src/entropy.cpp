#include "qrng/entropy.hpp"
#include "qrng/variates.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace qrng {

// ---------------------------------------------------------------------------
// Rational

namespace {

__extension__ typedef __int128 i128;

Rational make_checked(i128 num, i128 den) {
    if (den == 0) {
        throw std::domain_error("rational with zero denominator");
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    i128 a = num < 0 ? -num : num;
    i128 b = den;
    while (b != 0) {
        const i128 t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) {
        num /= a;
        den /= a;
    }
    constexpr i128 lim = std::numeric_limits<std::int64_t>::max();
    if (num > lim || num < -lim || den > lim) {
        throw std::overflow_error("rational overflow");
    }
    return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) {
        throw std::domain_error("rational with zero denominator");
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    num_ = g > 1 ? num / g : num;
    den_ = g > 1 ? den / g : den;
}

Rational Rational::from_double(double x, std::int64_t max_den) {
    if (!std::isfinite(x)) {
        throw std::invalid_argument("cannot convert non-finite value to rational");
    }
    const bool negative = x < 0.0;
    double v = std::fabs(x);
    // Convergents h/k of the continued fraction of v.
    std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    for (int iter = 0; iter < 64; ++iter) {
        const double a_f = std::floor(v);
        if (a_f > 9.0e15) {
            break;
        }
        const auto a = static_cast<std::int64_t>(a_f);
        const std::int64_t k2 = a * k1 + k0;
        if (k2 > max_den) {
            break;
        }
        const std::int64_t h2 = a * h1 + h0;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        const double frac = v - a_f;
        if (frac < 1e-15 || std::fabs(static_cast<double>(h1) / static_cast<double>(k1) - std::fabs(x)) <=
                                1e-15 * std::fabs(x)) {
            break;
        }
        v = 1.0 / frac;
    }
    if (k1 == 0) {
        throw std::invalid_argument("value out of rational range");
    }
    return Rational(negative ? -h1 : h1, k1);
}

std::int64_t Rational::floor() const noexcept {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) {
        --q;
    }
    return q;
}

Rational operator+(const Rational& a, const Rational& b) {
    return make_checked(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
                        static_cast<i128>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
    return make_checked(static_cast<i128>(a.num_) * b.num_, static_cast<i128>(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
    return make_checked(static_cast<i128>(a.num_) * b.den_, static_cast<i128>(a.den_) * b.num_);
}

bool operator<(const Rational& a, const Rational& b) {
    return static_cast<i128>(a.num_) * b.den_ < static_cast<i128>(b.num_) * a.den_;
}

std::string Rational::str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

// ---------------------------------------------------------------------------
// Entropy

namespace {

// ln P(m0) for m0 = floor(n). Above the table range Stirling's series is
// folded in so the O(n ln n) terms cancel analytically.
double log_pmf_at_mode(double n_bar, std::uint64_t m0) {
    const double m = static_cast<double>(m0);
    if (m0 < 256) {
        return -n_bar + (m0 == 0 ? 0.0 : m * std::log(n_bar)) - log_factorial(m0);
    }
    const double delta = n_bar - m;
    const double inv = 1.0 / m;
    const double inv2 = inv * inv;
    const double series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
    return -delta + m * std::log1p(delta / m) - 0.5 * std::log(2.0 * std::numbers::pi * m) - series;
}

}  // namespace

double poisson_entropy_exact(double n_bar) {
    if (!(n_bar >= 0.0) || n_bar > 1.0e6) {
        throw std::invalid_argument("poisson_entropy_exact: n_bar must lie in [0, 1e6]");
    }
    if (n_bar == 0.0) {
        return 0.0;
    }
    // -sum P(m) ln P(m), walking out from the mode with
    // ln P(m +- 1) = ln P(m) +- ln(n / (m + 1 or m)). Each term stays O(1) in
    // magnitude, so nothing cancels at large n.
    constexpr double kCutoff = -60.0;  // P < 1e-26
    const auto m0 = static_cast<std::uint64_t>(std::floor(n_bar));
    const double log_n = std::log(n_bar);
    const double lp0 = log_pmf_at_mode(n_bar, m0);

    double h = -std::exp(lp0) * lp0;
    double lp = lp0;
    for (std::uint64_t m = m0 + 1;; ++m) {
        lp += log_n - std::log(static_cast<double>(m));
        if (lp < kCutoff) break;
        h -= std::exp(lp) * lp;
    }
    lp = lp0;
    for (std::uint64_t m = m0; m > 0; --m) {
        lp -= log_n - std::log(static_cast<double>(m));
        if (lp < kCutoff) break;
        h -= std::exp(lp) * lp;
    }
    return h / std::numbers::ln2;
}

double poisson_entropy_asymptotic(double n_bar) {
    if (!(n_bar > 0.0) || !std::isfinite(n_bar)) {
        throw std::invalid_argument("poisson_entropy_asymptotic: n_bar must be positive");
    }
    return std::log(2.0 * std::numbers::pi * std::numbers::e * n_bar) / (2.0 * std::numbers::ln2);
}

const char* to_string(EntropyMethod m) noexcept {
    return m == EntropyMethod::exact_series ? "exact-series" : "asymptotic";
}

EntropyReport entropy_report(double n_bar, int bit_depth) {
    if (bit_depth < 1) {
        throw std::invalid_argument("entropy_report: bit_depth must be at least 1");
    }
    if (!(n_bar >= 0.0) || !std::isfinite(n_bar)) {
        throw std::invalid_argument("entropy_report: n_bar must be finite and non-negative");
    }
    EntropyReport r;
    r.n_bar = n_bar;
    r.bit_depth = bit_depth;
    if (n_bar <= kEntropyCrossover) {
        r.method = EntropyMethod::exact_series;
        r.h_quantum = poisson_entropy_exact(n_bar);
    } else {
        r.method = EntropyMethod::asymptotic;
        r.h_quantum = poisson_entropy_asymptotic(n_bar);
    }
    r.s = r.h_quantum / bit_depth;
    return r;
}

Rational epsilon_bound(const Rational& s, std::size_t l, std::size_t k) {
    if (!(s > Rational(0)) || s > Rational(1)) {
        throw std::invalid_argument("epsilon_bound: entropy per bit must lie in (0, 1]");
    }
    if (k == 0 || k >= l) {
        throw std::invalid_argument("epsilon_bound: need 0 < k < l");
    }
    const Rational margin = s * Rational(static_cast<std::int64_t>(l)) - Rational(static_cast<std::int64_t>(k));
    if (margin <= Rational(0)) {
        throw std::domain_error("no extractable security margin (s*l <= k)");
    }
    return -margin / Rational(2);
}

Rational epsilon_bound(double s, std::size_t l, std::size_t k) {
    return epsilon_bound(Rational::from_double(s), l, k);
}

double ExtractorPlan::log10_trials() const noexcept {
    return -log2_epsilon.to_double() * std::log10(2.0);
}

ExtractorPlan plan_extractor(const Rational& s, const Rational& target_log2_epsilon, std::size_t l) {
    if (!(s > Rational(0)) || s > Rational(1)) {
        throw std::invalid_argument("plan_extractor: entropy per bit must lie in (0, 1]");
    }
    if (l == 0) {
        throw std::invalid_argument("plan_extractor: l must be positive");
    }
    if (!(target_log2_epsilon < Rational(0))) {
        throw std::invalid_argument("plan_extractor: target log2(epsilon) must be negative");
    }
    const Rational k_max = s * Rational(static_cast<std::int64_t>(l)) + Rational(2) * target_log2_epsilon;
    const std::int64_t k = k_max.floor();
    if (k <= 0) {
        throw std::domain_error("plan_extractor: target unreachable for this block length");
    }
    if (static_cast<std::size_t>(k) >= l) {
        throw std::domain_error("plan_extractor: plan would not compress (k >= l)");
    }
    ExtractorPlan plan;
    plan.l = l;
    plan.k = static_cast<std::size_t>(k);
    plan.s = s;
    plan.log2_epsilon = epsilon_bound(s, l, plan.k);
    return plan;
}

ExtractorPlan plan_extractor(double s, double target_log2_epsilon, std::size_t l) {
    return plan_extractor(Rational::from_double(s), Rational::from_double(target_log2_epsilon), l);
}

void to_json(nlohmann::json& j, const EntropyReport& r) {
    j = nlohmann::json{{"n_bar", r.n_bar},
                       {"h_quantum", r.h_quantum},
                       {"bit_depth", r.bit_depth},
                       {"s", r.s},
                       {"method", to_string(r.method)}};
}

void to_json(nlohmann::json& j, const ExtractorPlan& p) {
    j = nlohmann::json{{"l", p.l},
                       {"k", p.k},
                       {"s", p.s.to_double()},
                       {"log2_epsilon", p.log2_epsilon.to_double()},
                       {"log2_epsilon_exact", p.log2_epsilon.str()},
                       {"compression", p.compression()},
                       {"log10_trials", p.log10_trials()}};
}

}  // namespace qrng
