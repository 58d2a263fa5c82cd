#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrng/bits.hpp"

namespace qrng {

struct TestStatistic {
    double statistic = 0.0;
    double p_value = 0.0;
};

/// Frequency test: z = (ones - zeros) / sqrt(n), p = erfc(|z| / sqrt 2).
/// Needs at least 100 bits.
TestStatistic monobit_test(const BitVector& bits);

/// chi^2 = 4M sum (pi_i - 1/2)^2 over N = n / M blocks, p = Q(N/2, chi^2/2).
/// Needs block_size >= 8 and at least 10 blocks.
TestStatistic block_frequency_test(const BitVector& bits, std::size_t block_size);

struct RunsOutcome {
    bool applicable = false;  ///< false when |pi - 1/2| >= 2 / sqrt(n)
    std::size_t runs = 0;
    double statistic = 0.0;   ///< standardised deviation of the run count
    double p_value = 0.0;
};

/// Runs test against the expectation 2 n pi (1 - pi). Needs at least 100 bits.
RunsOutcome runs_test(const BitVector& bits);

struct SerialCorrelation {
    std::vector<double> coefficients;  ///< index d - 1 holds lag d
    double threshold = 0.0;            ///< 4 / sqrt(n)
    std::vector<std::size_t> flagged_lags;
    /// Per-lag two-sided p-values from z = c_d sqrt(n - d).
    std::vector<double> p_values;
};

/// Autocorrelation of the +/-1 sequence at lags 1..max_lag. A constant
/// sequence reports coefficient 1 at every lag. Needs n >= 100 * max_lag.
SerialCorrelation serial_correlation(const BitVector& bits, std::size_t max_lag);

/// Empirical -sum f log2 f over bytes packed MSB-first; needs >= 8e4 bits.
double shannon_byte_entropy(const BitVector& bits);

struct ExportResult {
    std::size_t bytes = 0;
    std::size_t padding_bits = 0;
};

/// Packs MSB-first (earliest bit in bit 7) and writes the bytes; the final
/// partial byte is zero padded.
ExportResult export_stream(const BitVector& bits, std::ostream& out);
ExportResult export_stream(const BitVector& bits, const std::filesystem::path& path);

/// Loads a byte file as an MSB-first bit stream.
BitVector read_bits_file(const std::filesystem::path& path);

enum class Verdict { pass, fail, not_applicable };
const char* to_string(Verdict v) noexcept;

struct TestResult {
    std::string name;
    double statistic = 0.0;
    double p_value = 0.0;
    Verdict verdict = Verdict::fail;
    std::string note;
};

struct BatteryOptions {
    double alpha = 0.01;
    std::size_t block_size = 128;
    std::size_t max_lag = 16;
};

struct TestReport {
    std::vector<TestResult> tests;
    std::size_t passed = 0;
    std::size_t bits_tested = 0;
    double alpha = 0.01;
    std::optional<double> byte_entropy;
    std::vector<double> serial_coefficients;

    bool all_passed() const noexcept { return passed == tests.size(); }
};

/// Runs monobit, block frequency, runs and serial correlation (Bonferroni-
/// corrected minimum over lags); verdict is p >= alpha. Byte entropy is
/// attached as a metric when the stream is long enough.
TestReport run_battery(const BitVector& bits, const BatteryOptions& options = {});

void to_json(nlohmann::json& j, const TestResult& r);
void to_json(nlohmann::json& j, const TestReport& r);

}  // namespace qrng
