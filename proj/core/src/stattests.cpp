#include "qrng/stattests.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace qrng {

namespace {

double two_sided_normal_p(double z) { return std::erfc(std::fabs(z) / std::numbers::sqrt2); }

// Number of positions i < n - lag where bit i differs from bit i + lag.
std::size_t count_lagged_differences(const BitVector& bits, std::size_t lag) {
    const std::size_t n = bits.size();
    const auto words = bits.words();
    const std::size_t span = n - lag;
    std::size_t diff = 0;
    const std::size_t full = span / 64;
    for (std::size_t w = 0; w < full; ++w) {
        diff += static_cast<std::size_t>(std::popcount(words[w] ^ bits.read_bits(64 * w + lag, 64)));
    }
    const unsigned tail = static_cast<unsigned>(span & 63);
    if (tail != 0) {
        const std::uint64_t mask = (std::uint64_t{1} << tail) - 1;
        diff += static_cast<std::size_t>(
            std::popcount((words[full] ^ bits.read_bits(64 * full + lag, tail)) & mask));
    }
    return diff;
}

}  // namespace

TestStatistic monobit_test(const BitVector& bits) {
    const std::size_t n = bits.size();
    if (n < 100) {
        throw std::invalid_argument("monobit test needs at least 100 bits");
    }
    const double ones = static_cast<double>(bits.count_ones());
    const double z = (2.0 * ones - static_cast<double>(n)) / std::sqrt(static_cast<double>(n));
    return {z, two_sided_normal_p(z)};
}

TestStatistic block_frequency_test(const BitVector& bits, std::size_t block_size) {
    if (block_size < 8) {
        throw std::invalid_argument("block frequency test needs block_size >= 8");
    }
    const std::size_t blocks = bits.size() / block_size;
    if (blocks < 10) {
        throw std::invalid_argument("block frequency test needs at least 10 blocks");
    }
    double chi2 = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        std::size_t ones = 0;
        std::size_t pos = b * block_size;
        std::size_t remaining = block_size;
        while (remaining > 0) {
            const unsigned take = static_cast<unsigned>(std::min<std::size_t>(64, remaining));
            ones += static_cast<std::size_t>(std::popcount(bits.read_bits(pos, take)));
            pos += take;
            remaining -= take;
        }
        const double pi = static_cast<double>(ones) / static_cast<double>(block_size) - 0.5;
        chi2 += pi * pi;
    }
    chi2 *= 4.0 * static_cast<double>(block_size);
    const double p = boost::math::gamma_q(static_cast<double>(blocks) / 2.0, chi2 / 2.0);
    return {chi2, p};
}

RunsOutcome runs_test(const BitVector& bits) {
    const std::size_t n = bits.size();
    if (n < 100) {
        throw std::invalid_argument("runs test needs at least 100 bits");
    }
    const double nd = static_cast<double>(n);
    const double pi = static_cast<double>(bits.count_ones()) / nd;
    RunsOutcome r;
    r.runs = 1 + count_lagged_differences(bits, 1);
    if (std::fabs(pi - 0.5) >= 2.0 / std::sqrt(nd)) {
        r.applicable = false;
        r.p_value = 0.0;
        return r;
    }
    r.applicable = true;
    const double q = pi * (1.0 - pi);
    const double expected = 2.0 * nd * q;
    r.statistic = (static_cast<double>(r.runs) - expected) / (2.0 * std::sqrt(nd) * q);
    r.p_value = std::erfc(std::fabs(static_cast<double>(r.runs) - expected) /
                          (2.0 * std::sqrt(2.0 * nd) * q));
    return r;
}

SerialCorrelation serial_correlation(const BitVector& bits, std::size_t max_lag) {
    const std::size_t n = bits.size();
    if (max_lag == 0 || n < 100 * max_lag) {
        throw std::invalid_argument("serial correlation needs n >= 100 * max_lag and max_lag >= 1");
    }
    SerialCorrelation sc;
    const double nd = static_cast<double>(n);
    sc.threshold = 4.0 / std::sqrt(nd);
    const double mean = (2.0 * static_cast<double>(bits.count_ones()) - nd) / nd;
    const double var = 1.0 - mean * mean;
    for (std::size_t d = 1; d <= max_lag; ++d) {
        const double pairs = static_cast<double>(n - d);
        double c = 1.0;
        if (var > 0.0) {
            const double diff = static_cast<double>(count_lagged_differences(bits, d));
            const double product_mean = (pairs - 2.0 * diff) / pairs;
            c = (product_mean - mean * mean) / var;
        }
        sc.coefficients.push_back(c);
        sc.p_values.push_back(var > 0.0 ? two_sided_normal_p(c * std::sqrt(pairs)) : 0.0);
        if (std::fabs(c) > sc.threshold) {
            sc.flagged_lags.push_back(d);
        }
    }
    return sc;
}

double shannon_byte_entropy(const BitVector& bits) {
    if (bits.size() < 80'000) {
        throw std::invalid_argument("byte entropy needs at least 8e4 bits");
    }
    const auto bytes = pack_msb_first(bits);
    const std::size_t n = bits.size() / 8;
    std::array<std::size_t, 256> counts{};
    for (std::size_t i = 0; i < n; ++i) {
        ++counts[bytes[i]];
    }
    double h = 0.0;
    for (auto c : counts) {
        if (c != 0) {
            const double f = static_cast<double>(c) / static_cast<double>(n);
            h -= f * std::log2(f);
        }
    }
    return h;
}

ExportResult export_stream(const BitVector& bits, std::ostream& out) {
    const auto bytes = pack_msb_first(bits);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("failed writing exported bit stream");
    }
    return {bytes.size(), bytes.size() * 8 - bits.size()};
}

ExportResult export_stream(const BitVector& bits, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    try {
        return export_stream(bits, out);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

BitVector read_bits_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return unpack_msb_first(bytes);
}

const char* to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::not_applicable: return "not-applicable";
    }
    return "unknown";
}

TestReport run_battery(const BitVector& bits, const BatteryOptions& options) {
    TestReport report;
    report.alpha = options.alpha;
    report.bits_tested = bits.size();
    auto verdict = [&](double p) { return p >= options.alpha ? Verdict::pass : Verdict::fail; };

    const auto mono = monobit_test(bits);
    report.tests.push_back({"monobit", mono.statistic, mono.p_value, verdict(mono.p_value), {}});

    const auto block = block_frequency_test(bits, options.block_size);
    report.tests.push_back({"block_frequency", block.statistic, block.p_value, verdict(block.p_value),
                            "block_size=" + std::to_string(options.block_size)});

    const auto runs = runs_test(bits);
    if (runs.applicable) {
        report.tests.push_back({"runs", runs.statistic, runs.p_value, verdict(runs.p_value), {}});
    } else {
        report.tests.push_back({"runs", 0.0, 0.0, Verdict::not_applicable,
                                "monobit proportion outside 2/sqrt(n) of 1/2"});
    }

    const auto serial = serial_correlation(bits, options.max_lag);
    const double min_p = *std::min_element(serial.p_values.begin(), serial.p_values.end());
    const double corrected = std::min(1.0, min_p * static_cast<double>(options.max_lag));
    double max_abs = 0.0;
    for (double c : serial.coefficients) max_abs = std::max(max_abs, std::fabs(c));
    report.tests.push_back({"serial_correlation", max_abs, corrected, verdict(corrected),
                            "max_lag=" + std::to_string(options.max_lag) +
                                " flagged=" + std::to_string(serial.flagged_lags.size())});
    report.serial_coefficients = serial.coefficients;

    if (bits.size() >= 80'000) {
        report.byte_entropy = shannon_byte_entropy(bits);
    }
    report.passed = static_cast<std::size_t>(std::count_if(
        report.tests.begin(), report.tests.end(), [](const TestResult& t) { return t.verdict == Verdict::pass; }));
    return report;
}

void to_json(nlohmann::json& j, const TestResult& r) {
    j = nlohmann::json{{"name", r.name},
                       {"statistic", r.statistic},
                       {"p_value", r.p_value},
                       {"verdict", to_string(r.verdict)}};
    if (!r.note.empty()) {
        j["note"] = r.note;
    }
}

void to_json(nlohmann::json& j, const TestReport& r) {
    j = nlohmann::json{{"tests", r.tests},
                       {"passed", r.passed},
                       {"total", r.tests.size()},
                       {"bits_tested", r.bits_tested},
                       {"alpha", r.alpha},
                       {"all_passed", r.all_passed()},
                       {"serial_coefficients", r.serial_coefficients}};
    if (r.byte_entropy) {
        j["byte_entropy_bits_per_byte"] = *r.byte_entropy;
    }
}

}  // namespace qrng
