// Acceptance driver. `qrng_acceptance` runs every criterion; `--criterion N`
// runs one. Each prints a single PASS/FAIL line with the measured values.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qrng/characterize.hpp"
#include "qrng/entropy.hpp"
#include "qrng/extractor.hpp"
#include "qrng/ingest.hpp"
#include "qrng/sensor.hpp"
#include "qrng/stattests.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "!") + what;
        pass = pass && ok;
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Outcome entropy_table() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto nokia = qrng::entropy_report(410, 10);
    const auto atik = qrng::entropy_report(1.5e4, 16);
    const double dt = seconds_since(t0);
    o.check(std::fabs(nokia.h_quantum - 6.4) <= 0.1, fmt("H(410)=%.4f", nokia.h_quantum));
    o.check(std::fabs(nokia.s - 0.64) <= 0.01, fmt("s=%.4f", nokia.s));
    o.check(std::fabs(atik.h_quantum - 8.9) <= 0.1, fmt("H(1.5e4)=%.4f", atik.h_quantum));
    o.check(std::fabs(atik.s - 0.56) <= 0.01, fmt("s=%.4f", atik.s));
    o.check(dt < 1.0, fmt("%.3fs", dt));
    return o;
}

Outcome security_bound() {
    Outcome o;
    const auto e = qrng::epsilon_bound(0.64, 2000, 500);
    o.check(e == qrng::Rational(-390), "log2 eps=" + e.str());
    const double log10_trials = 390.0 * std::log10(2.0);
    o.check(std::fabs(log10_trials - 117.4) < 0.05, fmt("trials=10^%.2f", log10_trials));
    return o;
}

Outcome entropy_oracle() {
    Outcome o;
    double worst_exact = 0.0;
    for (double n : {0.1, 1.0, 5.0, 20.0, 100.0}) {
        worst_exact = std::max(worst_exact, std::fabs(qrng::poisson_entropy_exact(n) - qrng::oracle::direct_poisson_entropy(n)));
    }
    double worst_asym = 0.0;
    for (double n = 500.0; n <= 1000.0; n += 10.0) {
        worst_asym = std::max(worst_asym, std::fabs(qrng::poisson_entropy_exact(n) - qrng::poisson_entropy_asymptotic(n)));
    }
    o.check(worst_exact <= 1e-9, fmt("max |exact-direct|=%.2e", worst_exact));
    o.check(worst_asym <= 1e-3, fmt("max |exact-asym| on [500,1000]=%.2e", worst_asym));
    return o;
}

Outcome fano_plateau() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto nokia = qrng::sensor_preset("nokia-n9");
    const std::vector<double> n_bars{1, 10, 50, 100, 200, 400, 600};
    for (std::size_t i = 0; i < n_bars.size(); ++i) {
        const auto frames = qrng::simulate_stack(nokia, n_bars[i], 100, 100, 50, 0xF4A0, 1000 * i);
        const double f = qrng::fano_factor(frames, nokia).fano;
        const double n = n_bars[i];
        if (n == 1) {
            o.check(f > 5.0, fmt("F(1)=%.3f>5", f));
        } else if (n == 600) {
            o.check(f < 0.5, fmt("F(600)=%.3f<0.5", f));
        } else if (n >= 50 && n <= 400) {
            o.check(std::fabs(f - 1.0) <= 0.05, fmt("F(%g)=%.3f", n, f));
        } else {
            o.detail += fmt("; F(%g)=%.3f", n, f);
        }
    }
    const double dt = seconds_since(t0);
    o.check(dt < 60.0, fmt("%.1fs", dt));
    return o;
}

Outcome gain_round_trip() {
    Outcome o;
    struct Case {
        const char* preset;
        std::vector<double> n_bars;
    };
    const std::vector<Case> cases{{"atik383l", {1000, 2500, 5000, 7500, 10000}},
                                  {"nokia-n9", {50, 100, 200, 300, 400}}};
    for (const auto& c : cases) {
        const auto cfg = qrng::sensor_preset(c.preset);
        std::vector<qrng::IntensityStack> sweep;
        for (std::size_t i = 0; i < c.n_bars.size(); ++i) {
            sweep.push_back({c.n_bars[i], qrng::simulate_stack(cfg, c.n_bars[i], 100, 100, 20, 0x6A1, 100 * i)});
        }
        const auto ptc = qrng::estimate_zeta(sweep);
        const double rel = std::fabs(ptc.fitted_zeta - cfg.zeta) / cfg.zeta;
        o.check(rel <= 0.03, fmt("%s zeta=%.4f (%.2f%%)", c.preset, ptc.fitted_zeta, 100 * rel));
    }
    return o;
}

std::vector<bool> to_bools(const qrng::BitVector& b) {
    std::vector<bool> v(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) v[i] = b[i];
    return v;
}

qrng::BitVector random_bits(std::mt19937_64& rng, std::size_t n) {
    qrng::BitVector b(n);
    for (auto& w : b.mutable_words()) w = rng();
    b.resize(n);
    return b;
}

Outcome extractor_correctness() {
    Outcome o;
    std::mt19937_64 rng(0xE7);
    // 10^4 blocks across 100 random geometries.
    std::size_t mismatches = 0;
    for (int g = 0; g < 100; ++g) {
        const std::size_t k = 1 + rng() % 64;
        const std::size_t l = k + 1 + rng() % (256 - k);
        qrng::Seed256 seed;
        for (auto& b : seed) b = static_cast<std::uint8_t>(rng());
        const auto m = qrng::BinaryMatrix::generate(seed, k, l);
        std::vector<std::vector<bool>> rows(k, std::vector<bool>(l));
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t i = 0; i < l; ++i) rows[j][i] = m.at(j, i);
        const auto input = random_bits(rng, 100 * l);
        const auto out = qrng::extract(input, m, 1);
        for (std::size_t b = 0; b < 100; ++b) {
            std::vector<bool> block(l);
            for (std::size_t i = 0; i < l; ++i) block[i] = input[b * l + i];
            const auto want = qrng::oracle::naive_extract(rows, block);
            for (std::size_t j = 0; j < k; ++j) mismatches += out.bits[b * k + j] != want[j];
        }
    }
    o.check(mismatches == 0, fmt("oracle mismatches=%zu over 1e4 blocks", mismatches));

    const auto m = qrng::BinaryMatrix::generate(qrng::default_matrix_seed(), 500, 2000);
    std::size_t violations = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto a = random_bits(rng, 2000);
        const auto b = random_bits(rng, 2000);
        qrng::BitVector x(2000);
        for (std::size_t w = 0; w < x.words().size(); ++w) x.mutable_words()[w] = a.words()[w] ^ b.words()[w];
        const auto ya = qrng::extract(a, m, 1).bits;
        const auto yb = qrng::extract(b, m, 1).bits;
        const auto yx = qrng::extract(x, m, 1).bits;
        for (std::size_t j = 0; j < 500; ++j) violations += yx[j] != (ya[j] != yb[j]);
    }
    o.check(violations == 0, fmt("linearity violations=%zu over 1e3 pairs", violations));

    const auto big = random_bits(rng, 2000 * 4096 + 123);
    const auto single = qrng::extract(big, m, 1);
    bool identical = true;
    for (std::size_t w : {2u, 3u, 8u}) identical = identical && qrng::extract(big, m, w).bits == single.bits;
    o.check(identical, "multithreaded output identical");
    return o;
}

Outcome end_to_end() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto nokia = qrng::sensor_preset("nokia-n9");
    const std::size_t w = 1000, h = 500, n_frames = 48;
    const auto frames = qrng::simulate_stack(nokia, 410.0, w, h, n_frames, 0xE2E);

    const auto path = fs::temp_directory_path() / "qrng_acceptance_e2e.raw";
    const qrng::FrameFileHeader header{qrng::FrameFormat::raw16le, w, h, nokia.bit_depth, n_frames};
    qrng::write_raw(frames, header, path);
    const auto loaded = qrng::read_raw(path, header);
    fs::remove(path);

    const auto raw = qrng::frames_to_bits(loaded);
    const auto m = qrng::BinaryMatrix::generate(qrng::default_matrix_seed(), 500, 2000);
    const auto out = qrng::extract(raw, m);
    o.check(out.bits.size() >= 50'000'000, fmt("raw=%zu bits, extracted=%zu bits", raw.bits.size(), out.bits.size()));

    const auto report = qrng::run_battery(out.bits);
    double min_p = 1.0;
    for (const auto& t : report.tests) min_p = std::min(min_p, t.p_value);
    o.check(report.all_passed(), fmt("extracted battery %zu/%zu, min p=%.4f", report.passed, report.tests.size(), min_p));
    const double he = report.byte_entropy.value_or(0.0);
    o.check(he >= 7.99, fmt("byte entropy=%.6f", he));

    const auto raw_report = qrng::run_battery(raw.bits);
    o.check(!raw_report.all_passed(),
            fmt("raw stream fails %zu/%zu tests", raw_report.tests.size() - raw_report.passed, raw_report.tests.size()));
    const double dt = seconds_since(t0);
    o.check(dt < 300.0, fmt("%.1fs", dt));
    return o;
}

Outcome throughput() {
    Outcome o;
    const auto m = qrng::BinaryMatrix::generate(qrng::default_matrix_seed(), 500, 2000);
    const auto r = qrng::extract_throughput_bench(m, std::chrono::seconds(2));
    o.check(r.output_bits_per_second >= 1e6, fmt("output %.1f Mbps (floor 1)", r.output_bits_per_second / 1e6));
    o.detail += r.output_bits_per_second >= 1e8 ? "; stretch 100 Mbps reached" : "; stretch 100 Mbps not reached";
    return o;
}

Outcome format_round_trips() {
    Outcome o;
    std::mt19937_64 rng(0x509);
    std::size_t pgm_bad = 0, raw_bad = 0;
    for (int i = 0; i < 100; ++i) {
        qrng::Frame f;
        f.width = 1 + rng() % 64;
        f.height = 1 + rng() % 48;
        f.bit_depth = 1 + static_cast<int>(rng() % 16);
        f.codes.resize(f.pixel_count());
        for (auto& c : f.codes) c = static_cast<std::uint16_t>(rng() & f.max_code());

        std::stringstream pgm;
        qrng::write_pgm(f, pgm);
        const auto p = qrng::read_pgm(pgm);
        pgm_bad += !(p.codes == f.codes && p.width == f.width && p.height == f.height && p.bit_depth == f.bit_depth);

        const auto format = f.bit_depth <= 8 && i % 2 ? qrng::FrameFormat::raw8 : qrng::FrameFormat::raw16le;
        const qrng::FrameFileHeader header{format, f.width, f.height, f.bit_depth, 1};
        std::stringstream raw;
        qrng::write_raw(std::span(&f, 1), header, raw);
        const auto r = qrng::read_raw(raw, header);
        raw_bad += !(r.size() == 1 && r[0].codes == f.codes);
    }
    o.check(pgm_bad == 0, fmt("pgm mismatches=%zu/100", pgm_bad));
    o.check(raw_bad == 0, fmt("raw mismatches=%zu/100", raw_bad));

    std::istringstream fixture16(std::string("P5\n2 1\n1023\n\x01\x99\x00\x2A", 16));
    const auto a = qrng::read_pgm(fixture16);
    o.check(a.codes == std::vector<std::uint16_t>{409, 42} && a.bit_depth == 10, "P5 1023 fixture -> [409, 42]");
    std::istringstream fixture8(std::string("P5\n1 1\n255\n\xFF", 12));
    const auto b = qrng::read_pgm(fixture8);
    o.check(b.codes == std::vector<std::uint16_t>{255} && b.bit_depth == 8, "P5 255 fixture -> [255]");
    std::istringstream fixture_raw(std::string("\x9A\x01", 2));
    const auto c = qrng::read_raw(fixture_raw, {qrng::FrameFormat::raw16le, 1, 1, 10, 1});
    o.check(c[0].codes == std::vector<std::uint16_t>{410}, "raw16le 9A 01 -> 410");
    bool rejected = false;
    try {
        std::istringstream short_payload(std::string("\x9A\x01", 2));
        qrng::read_raw(short_payload, {qrng::FrameFormat::raw16le, 1, 1, 10, 2});
    } catch (const qrng::FormatError&) {
        rejected = true;
    }
    o.check(rejected, "short payload rejected");
    return o;
}

struct Criterion {
    const char* name;
    std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all{
        {"entropy table reproduction", entropy_table},
        {"security bound worked example", security_bound},
        {"exact-series entropy oracle", entropy_oracle},
        {"Fano plateau on Nokia sweep", fano_plateau},
        {"gain round-trip", gain_round_trip},
        {"extractor correctness", extractor_correctness},
        {"end-to-end randomness", end_to_end},
        {"extractor throughput", throughput},
        {"frame format round-trips", format_round_trips},
    };
    return all;
}

bool run_one(std::size_t n) {
    const auto& c = criteria()[n - 1];
    Outcome o;
    try {
        o = c.run();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", n, c.name, o.detail.c_str());
    std::fflush(stdout);
    return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc == 3 && std::strcmp(argv[1], "--criterion") == 0) {
        const long n = std::strtol(argv[2], nullptr, 10);
        if (n < 1 || n > static_cast<long>(criteria().size())) {
            std::fprintf(stderr, "criterion must be in 1..%zu\n", criteria().size());
            return 2;
        }
        return run_one(static_cast<std::size_t>(n)) ? 0 : 1;
    }
    if (argc != 1) {
        std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
        return 2;
    }
    bool all = true;
    for (std::size_t n = 1; n <= criteria().size(); ++n) all = run_one(n) && all;
    return all ? 0 : 1;
}
