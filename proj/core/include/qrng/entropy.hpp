#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace qrng {

/// Normalised fraction num/den with den > 0. Used for the extractor security
/// exponent so that values like 2^-390 are carried exactly.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1);

    /// Best rational approximation with denominator <= max_den (continued fractions).
    static Rational from_double(double x, std::int64_t max_den = 1'000'000);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }
    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::int64_t floor() const noexcept;

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a) { return Rational(-a.num_, a.den_); }
    friend bool operator==(const Rational& a, const Rational& b) = default;
    friend bool operator<(const Rational& a, const Rational& b);
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    std::string str() const;

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// Shannon entropy (bits) of Poisson(n_bar) via the closed form plus series in
/// ln(m!), truncated once the remaining Poisson mass drops below 1e-15.
/// Valid for 0 <= n_bar <= 1e6; throws std::invalid_argument otherwise.
double poisson_entropy_exact(double n_bar);

/// ln(2 pi e n_bar) / (2 ln 2); n_bar > 0.
double poisson_entropy_asymptotic(double n_bar);

enum class EntropyMethod { exact_series, asymptotic };

const char* to_string(EntropyMethod m) noexcept;

inline constexpr double kEntropyCrossover = 1000.0;

struct EntropyReport {
    double n_bar = 0.0;
    double h_quantum = 0.0;  ///< bits per pixel
    int bit_depth = 0;
    double s = 0.0;          ///< bits of quantum entropy per raw bit
    EntropyMethod method = EntropyMethod::exact_series;
};

/// Exact series up to kEntropyCrossover, asymptotic form above.
EntropyReport entropy_report(double n_bar, int bit_depth);

/// log2(epsilon) = -(s*l - k)/2. Throws std::domain_error when s*l <= k
/// ("no extractable security margin"), std::invalid_argument on bad ranges.
Rational epsilon_bound(const Rational& s, std::size_t l, std::size_t k);
Rational epsilon_bound(double s, std::size_t l, std::size_t k);

struct ExtractorPlan {
    std::size_t l = 0;
    std::size_t k = 0;
    Rational s;
    Rational log2_epsilon;
    double compression() const noexcept { return static_cast<double>(l) / static_cast<double>(k); }
    /// log10 of the expected number of trials to notice a deviation (1/epsilon).
    double log10_trials() const noexcept;
};

/// k = floor(s*l + 2*target); throws std::domain_error if k <= 0 or k >= l.
ExtractorPlan plan_extractor(const Rational& s, const Rational& target_log2_epsilon, std::size_t l);
ExtractorPlan plan_extractor(double s, double target_log2_epsilon, std::size_t l);

void to_json(nlohmann::json& j, const EntropyReport& r);
void to_json(nlohmann::json& j, const ExtractorPlan& p);

}  // namespace qrng
