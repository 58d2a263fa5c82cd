// qrng: simulate, characterize, entropy, plan, extract, test.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "frame_source.hpp"
#include "qrng/characterize.hpp"
#include "qrng/entropy.hpp"
#include "qrng/extractor.hpp"
#include "qrng/ingest.hpp"
#include "qrng/sensor.hpp"
#include "qrng/stattests.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    bool json = false;
};

qrng::SensorConfig resolve_sensor(const Globals& g, const std::string& preset,
                                  const std::optional<qrng::SensorConfig>& carried = std::nullopt) {
    if (!g.config.empty() && !preset.empty()) throw UsageError("--config and --preset are mutually exclusive");
    if (!g.config.empty()) return qrng::load_sensor_config(g.config);
    if (!preset.empty()) return qrng::sensor_preset(preset);
    if (carried) return *carried;
    return qrng::sensor_preset("nokia-n9");
}

void emit(const Globals& g, const json& j, const std::string& human, std::ostream& os = std::cout) {
    if (g.json) {
        os << j.dump(2) << '\n';
    } else {
        os << human;
    }
}

std::string num(double v, int precision = 6) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Incident intensity implied by a mean code, inverting the linear chain.
double n_bar_from_mean_code(double mean_code, const qrng::SensorConfig& c) {
    return std::max(0.0, (mean_code / c.zeta - c.offset) / c.eta);
}

double mean_code(std::span<const qrng::Frame> frames) {
    long double sum = 0;
    std::size_t n = 0;
    for (const auto& f : frames) {
        for (auto c : f.codes) sum += c;
        n += f.codes.size();
    }
    return n ? static_cast<double>(sum / static_cast<long double>(n)) : 0.0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string preset;
    std::vector<double> n_bars;
    std::size_t frames = 1;
    std::size_t width = 640;
    std::size_t height = 480;
    std::string format = "pgm";
};

json summarize_level(const qrng::SensorConfig& cfg, double n_bar, std::span<const qrng::Frame> frames) {
    std::optional<double> variance, fano;
    if (frames.size() >= 2) {
        const auto stats = qrng::pixel_stats(frames);
        double v = 0;
        for (double x : stats.variance) v += x;
        variance = v / static_cast<double>(stats.variance.size());
        try {
            fano = qrng::fano_factor(stats, cfg).fano;
        } catch (const std::domain_error&) {
        }
    }
    const double absorbed = qrng::absorbed_mean(n_bar, cfg);
    const std::optional<double> predicted =
        absorbed > 0 ? std::optional(1.0 + cfg.sigma_t * cfg.sigma_t / absorbed) : std::nullopt;
    return {{"n_bar", n_bar},
            {"frames", frames.size()},
            {"mean_code", mean_code(frames)},
            {"temporal_variance", nullable(variance)},
            {"fano_measured", nullable(fano)},
            {"fano_predicted", nullable(predicted)}};
}

std::string level_dir_name(double n_bar) {
    std::ostringstream s;
    s << "nbar_" << std::setprecision(10) << n_bar;
    return s.str();
}

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
    if (a.frames == 0) throw UsageError("--frames must be at least 1");
    if (a.n_bars.empty()) throw UsageError("--nbar needs at least one value");
    if (a.format != "pgm" && a.format != "raw16le") throw UsageError("--format must be pgm or raw16le");
    const auto cfg = resolve_sensor(g, a.preset);
    cfg.validate();
    const fs::path out = g.out.empty() ? fs::path("frames") : fs::path(g.out);

    json levels = json::array();
    std::ostringstream human;
    human << "sensor " << cfg.name << ", " << a.width << "x" << a.height << ", " << a.frames << " frame(s) per level\n";
    for (std::size_t i = 0; i < a.n_bars.size(); ++i) {
        const double n_bar = a.n_bars[i];
        const auto frames = qrng::simulate_stack(cfg, n_bar, a.width, a.height, a.frames, g.seed, i * a.frames);
        const fs::path dir = a.n_bars.size() > 1 ? out / level_dir_name(n_bar) : out;
        qrng::cli::write_frame_set(dir, frames, a.format, qrng::cli::frame_metadata(cfg, n_bar, g.seed));
        json summary = summarize_level(cfg, n_bar, frames);
        summary["path"] = a.n_bars.size() > 1 ? level_dir_name(n_bar) : ".";
        human << "  n_bar=" << num(n_bar) << "  mean=" << num(summary["mean_code"].get<double>());
        if (!summary["temporal_variance"].is_null())
            human << "  variance=" << num(summary["temporal_variance"].get<double>());
        if (!summary["fano_measured"].is_null()) human << "  F=" << num(summary["fano_measured"].get<double>(), 4);
        if (!summary["fano_predicted"].is_null())
            human << "  F_predicted=" << num(summary["fano_predicted"].get<double>(), 4);
        human << "  -> " << dir.string() << '\n';
        levels.push_back(std::move(summary));
    }
    json report{{"sensor", cfg.name}, {"sensor_config", cfg}, {"seed", g.seed},
                {"width", a.width},   {"height", a.height},   {"format", a.format},
                {"levels", levels}};
    if (a.n_bars.size() > 1) {
        std::ofstream sweep(out / "sweep.json");
        sweep << report.dump(2) << '\n';
        if (!sweep) throw std::runtime_error((out / "sweep.json").string() + ": write failed");
    }
    emit(g, report, human.str());
    return 0;
}

// ---------------------------------------------------------------------------
// characterize

struct CharacterizeArgs {
    std::string input;
    std::string preset;
    double tolerance = 0.15;
};

qrng::Frame mask_frame(const qrng::PixelMask& mask) {
    qrng::Frame f;
    f.width = mask.width;
    f.height = mask.height;
    f.bit_depth = 2;
    f.source = "pixel mask";
    f.codes.reserve(mask.flags.size());
    for (auto flag : mask.flags) f.codes.push_back(static_cast<std::uint16_t>(flag));
    return f;
}

json mask_summary(const qrng::PixelMask& m) {
    return {{"usable", m.usable_count()},
            {"dead", m.count(qrng::PixelFlag::dead)},
            {"stuck", m.count(qrng::PixelFlag::stuck)},
            {"hot", m.count(qrng::PixelFlag::hot)}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

// Below this the chance that a healthy pixel's sample variance falls under a
// quarter of the median climbs above ~0.2%.
constexpr std::size_t kSteadyMaskFrames = 16;

int cmd_characterize(const Globals& g, const CharacterizeArgs& a) {
    const fs::path input(a.input);
    const fs::path out = g.out.empty() ? fs::path("characterization") : fs::path(g.out);
    json report{{"input", a.input}};
    std::ostringstream human;
    std::vector<qrng::FanoCurvePoint> curve;
    std::optional<qrng::PixelMask> mask;

    if (fs::is_directory(input) && fs::exists(input / "sweep.json")) {
        std::ifstream in(input / "sweep.json");
        const auto sweep = json::parse(in);
        std::optional<qrng::SensorConfig> carried;
        if (sweep.contains("sensor_config")) carried = sweep.at("sensor_config").get<qrng::SensorConfig>();
        const auto cfg = resolve_sensor(g, a.preset, carried);
        report["sensor"] = cfg;

        std::vector<qrng::PtcPoint> ptc_points;
        std::vector<qrng::PixelMask> masks;
        json levels = json::array();
        for (const auto& level : sweep.at("levels")) {
            const double n_bar = level.at("n_bar").get<double>();
            const auto set = qrng::cli::load_frame_set(input / level.at("path").get<std::string>());
            const auto stats = qrng::pixel_stats(set.frames);
            auto level_mask = qrng::build_pixel_mask(stats, cfg);
            ptc_points.push_back({mean_code(set.frames), [&] {
                                      double v = 0;
                                      for (double x : stats.variance) v += x;
                                      return v / static_cast<double>(stats.variance.size());
                                  }()});
            json entry{{"n_bar", n_bar}, {"mask", mask_summary(level_mask)}};
            try {
                const auto point = qrng::fano_factor(stats, cfg, &level_mask);
                curve.push_back({n_bar, point});
                masks.push_back(std::move(level_mask));
                entry["fano"] = point;
            } catch (const std::domain_error& e) {
                entry["fano"] = nullptr;
                entry["note"] = e.what();
            }
            levels.push_back(std::move(entry));
        }
        const auto region = qrng::find_operating_region(curve, a.tolerance);
        // Fit the gain on the shot-noise-limited levels when there are enough.
        std::vector<qrng::PtcPoint> fit_points;
        if (!region.empty && region.last > region.first) {
            for (std::size_t i = region.first; i <= region.last; ++i) {
                fit_points.push_back({curve[i].point.mean_code, curve[i].point.variance_code});
            }
        } else {
            fit_points = ptc_points;
        }
        const auto ptc = qrng::fit_photon_transfer(fit_points);
        report["levels"] = levels;
        report["photon_transfer"] = ptc;
        report["operating_region"] = region;
        if (!masks.empty()) {
            const std::size_t pick = region.empty ? masks.size() / 2 : (region.first + region.last) / 2;
            mask = masks[pick];
        }
        human << "fitted zeta = " << num(ptc.fitted_zeta, 5) << " codes/electron over " << fit_points.size()
              << " level(s)\n";
        for (const auto& p : curve) human << "  n_bar=" << num(p.n_bar) << "  F=" << num(p.point.fano, 4) << '\n';
        if (region.empty) {
            human << "no shot-noise-limited operating region at tolerance " << a.tolerance << '\n';
        } else {
            human << "operating region: n_bar in [" << num(region.n_min) << ", " << num(region.n_max) << "]\n";
        }
    } else {
        const auto set = qrng::cli::load_frame_set(input);
        const auto cfg = resolve_sensor(g, a.preset, set.sensor);
        report["sensor"] = cfg;
        const auto stats = qrng::pixel_stats(set.frames);
        mask = qrng::build_pixel_mask(stats, cfg);
        const auto point = qrng::fano_factor(stats, cfg, &*mask);
        const double n_bar = set.n_bar.value_or(n_bar_from_mean_code(point.mean_code, cfg));
        curve.push_back({n_bar, point});
        report["n_frames"] = set.frames.size();
        report["n_bar"] = n_bar;
        report["fano"] = point;
        if (set.frames.size() < kSteadyMaskFrames) {
            std::cerr << "qrng: warning: " << set.frames.size() << " frames give a noisy variance estimate; the dead-pixel "
                      << "threshold will flag healthy pixels (use at least " << kSteadyMaskFrames << ")\n";
        }
        human << set.frames.size() << " frames, mean=" << num(point.mean_code) << " variance=" << num(point.variance_code)
              << " F=" << num(point.fano, 4) << '\n';
    }

    fs::create_directories(out);
    write_text(out / "fano.csv", qrng::fano_curve_csv(curve));
    json files{{"report", (out / "characterization.json").string()}, {"fano_csv", (out / "fano.csv").string()}};
    if (mask) {
        qrng::write_pgm(mask_frame(*mask), out / "mask.pgm");
        files["mask"] = (out / "mask.pgm").string();
        report["mask"] = mask_summary(*mask);
        human << "mask: " << mask->usable_count() << " usable, " << mask->count(qrng::PixelFlag::dead) << " dead, "
              << mask->count(qrng::PixelFlag::stuck) << " stuck, " << mask->count(qrng::PixelFlag::hot) << " hot\n";
    }
    report["files"] = files;
    write_text(out / "characterization.json", report.dump(2) + "\n");
    human << "wrote " << out.string() << '\n';
    emit(g, report, human.str());
    return 0;
}

// ---------------------------------------------------------------------------
// entropy / plan

struct EntropyArgs {
    std::string preset;
    double n_bar = 0;
    int bit_depth = 0;
};

int cmd_entropy(const Globals& g, const EntropyArgs& a) {
    const int depth = a.bit_depth > 0 ? a.bit_depth : resolve_sensor(g, a.preset).bit_depth;
    const auto r = qrng::entropy_report(a.n_bar, depth);
    std::ostringstream human;
    human << "H = " << std::fixed << std::setprecision(6) << r.h_quantum << " bits/pixel (" << to_string(r.method)
          << ")\ns = " << r.s << " bits per raw bit at " << depth << "-bit depth\n";
    emit(g, r, human.str());
    return 0;
}

struct PlanArgs {
    std::string preset;
    std::optional<double> s;
    std::optional<double> n_bar;
    int bit_depth = 0;
    double target = -100;
    std::size_t l = 2000;
};

int cmd_plan(const Globals& g, const PlanArgs& a) {
    if (a.s.has_value() == a.n_bar.has_value()) throw UsageError("give exactly one of --s or --nbar");
    double s = 0;
    if (a.s) {
        s = *a.s;
    } else {
        const int depth = a.bit_depth > 0 ? a.bit_depth : resolve_sensor(g, a.preset).bit_depth;
        s = qrng::entropy_report(*a.n_bar, depth).s;
    }
    qrng::ExtractorPlan plan;
    try {
        plan = qrng::plan_extractor(s, a.target, a.l);
    } catch (const std::domain_error& e) {
        throw UsageError(e.what());
    }
    std::ostringstream human;
    human << "l = " << plan.l << ", k = " << plan.k << " (compression " << num(plan.compression(), 4)
          << ":1)\nlog2(epsilon) = " << num(plan.log2_epsilon.to_double(), 8) << "  (~10^" << num(plan.log10_trials(), 4)
          << " trials)\n";
    emit(g, plan, human.str());
    return 0;
}

// ---------------------------------------------------------------------------
// extract

struct ExtractArgs {
    std::string input;
    std::string preset;
    std::string mask;
    std::size_t l = 2000;
    std::size_t k = 500;
    std::string matrix_seed;
    std::string matrix;
    std::optional<double> n_bar;
    std::optional<double> s;
    bool force = false;
};

qrng::PixelMask load_mask(const fs::path& path) {
    const auto f = qrng::read_pgm(path);
    qrng::PixelMask m = qrng::PixelMask::all_usable(f.width, f.height);
    for (std::size_t i = 0; i < f.codes.size(); ++i) {
        if (f.codes[i] > 3) throw qrng::FormatError(path.string() + ": mask values must be 0..3");
        m.flags[i] = static_cast<qrng::PixelFlag>(f.codes[i]);
    }
    return m;
}

// Refuses unless s*l > k; returns log2(epsilon) when the margin exists.
std::optional<qrng::Rational> check_margin(double s, std::size_t l, std::size_t k, bool force) {
    const double margin = s * static_cast<double>(l) - static_cast<double>(k);
    if (margin > 0) return qrng::epsilon_bound(s, l, k);
    if (!force) {
        std::ostringstream msg;
        msg << "security margin violated: s*l = " << num(s * static_cast<double>(l)) << " <= k = " << k
            << "; the output would not be close to uniform (use --force to override)";
        throw UsageError(msg.str());
    }
    return std::nullopt;
}

int cmd_extract(const Globals& g, const ExtractArgs& a, bool l_given, bool k_given) {
    if (!a.matrix.empty() && (l_given || k_given)) throw UsageError("--matrix fixes l and k; drop --l/--k");
    if (a.s && a.n_bar) throw UsageError("give at most one of --s or --nbar");
    if (a.s && !(*a.s > 0.0 && *a.s <= 1.0)) throw UsageError("--s must lie in (0, 1]");

    std::optional<qrng::BinaryMatrix> matrix;
    if (!a.matrix.empty()) {
        matrix = qrng::BinaryMatrix::load(a.matrix);
    } else if (!(a.k > 0 && a.k < a.l)) {
        throw UsageError("need 0 < k < l");
    }
    const std::size_t l = matrix ? matrix->l() : a.l;
    const std::size_t k = matrix ? matrix->k() : a.k;
    if (a.s) check_margin(*a.s, l, k, a.force);
    const auto seed = a.matrix_seed.empty() ? qrng::default_matrix_seed() : qrng::parse_seed_hex(a.matrix_seed);

    const auto set = qrng::cli::load_frame_set(a.input);
    const auto cfg = resolve_sensor(g, a.preset, set.sensor);
    const int depth = set.frames.front().bit_depth;

    double s = 0;
    json entropy = nullptr;
    if (a.s) {
        s = *a.s;
    } else {
        const double n_bar = a.n_bar ? *a.n_bar : set.n_bar.value_or(n_bar_from_mean_code(mean_code(set.frames), cfg));
        const auto report = qrng::entropy_report(qrng::absorbed_mean(n_bar, cfg), depth);
        s = report.s;
        entropy = report;
        entropy["n_bar_incident"] = n_bar;
    }
    const auto log2_eps = check_margin(s, l, k, a.force);
    if (!matrix) matrix = qrng::BinaryMatrix::generate(seed, k, l);

    std::optional<qrng::PixelMask> mask;
    if (!a.mask.empty()) mask = load_mask(a.mask);
    const auto raw = qrng::frames_to_bits(set.frames, mask ? &*mask : nullptr);
    const auto out = qrng::extract(raw, *matrix);

    const bool to_stdout = g.out.empty() || g.out == "-";
    qrng::ExportResult written;
    if (to_stdout) {
        written = qrng::export_stream(out.bits, std::cout);
        std::cout.flush();
    } else {
        written = qrng::export_stream(out.bits, fs::path(g.out));
    }

    json summary{{"frames", set.frames.size()},
                 {"raw_bits", raw.bits.size()},
                 {"l", l},
                 {"k", k},
                 {"s", s},
                 {"entropy", entropy},
                 {"blocks", out.blocks_processed},
                 {"residual_bits_discarded", out.residual_bits_discarded},
                 {"output_bits", out.bits.size()},
                 {"output_bytes", written.bytes},
                 {"padding_bits", written.padding_bits},
                 {"log2_epsilon", log2_eps ? json(log2_eps->to_double()) : json(nullptr)},
                 {"log2_epsilon_exact", log2_eps ? json(log2_eps->str()) : json(nullptr)},
                 {"forced", !log2_eps.has_value()},
                 {"matrix_seed", qrng::seed_to_hex(matrix->seed())},
                 {"matrix_digest", matrix->digest()},
                 {"output", to_stdout ? "-" : g.out}};
    std::ostringstream human;
    human << "extracted " << out.bits.size() << " bits from " << raw.bits.size() << " raw bits (" << out.blocks_processed
          << " blocks of " << l << ", " << out.residual_bits_discarded << " residual bits discarded)\n"
          << "s = " << num(s, 5) << ", log2(epsilon) = "
          << (log2_eps ? num(log2_eps->to_double(), 8) : std::string("n/a (margin violated, forced)")) << '\n';
    emit(g, summary, human.str(), to_stdout ? std::cerr : std::cout);
    return 0;
}

// ---------------------------------------------------------------------------
// test

struct TestArgs {
    std::string input;
    qrng::BatteryOptions options;
    std::string export_path;
};

int cmd_test(const Globals& g, const TestArgs& a) {
    if (!(a.options.alpha > 0.0 && a.options.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
    const auto bits = qrng::read_bits_file(a.input);
    const bool export_stdout = a.export_path == "-";
    if (!a.export_path.empty()) {
        if (export_stdout) {
            qrng::export_stream(bits, std::cout);
            std::cout.flush();
        } else {
            qrng::export_stream(bits, fs::path(a.export_path));
        }
    }
    const auto report = qrng::run_battery(bits, a.options);
    std::ostringstream human;
    human << report.bits_tested << " bits, alpha = " << report.alpha << '\n';
    for (const auto& t : report.tests) {
        human << "  " << std::left << std::setw(20) << t.name << " p = " << std::setw(12) << num(t.p_value, 6)
              << to_string(t.verdict);
        if (!t.note.empty()) human << "  (" << t.note << ")";
        human << '\n';
    }
    if (report.byte_entropy) human << "  byte entropy = " << num(*report.byte_entropy, 8) << " bits/byte\n";
    human << report.passed << "/" << report.tests.size() << " passed\n";
    emit(g, report, human.str(), export_stdout ? std::cerr : std::cout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shot-noise random number generation toolkit"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "Sensor configuration JSON")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Simulation seed");
    app.add_option("--out", g.out, "Output path");
    app.add_flag("--json", g.json, "Machine-readable output");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate sensor frames")->fallthrough();
    simulate->add_option("--preset", sim.preset, "Sensor preset")->check(CLI::IsMember(qrng::sensor_preset_names()));
    simulate->add_option("--nbar", sim.n_bars, "Mean photon number per pixel (several values make a sweep)")
        ->required()
        ->expected(1, -1);
    simulate->add_option("--frames", sim.frames, "Frames per intensity")->capture_default_str();
    simulate->add_option("--width", sim.width)->capture_default_str();
    simulate->add_option("--height", sim.height)->capture_default_str();
    simulate->add_option("--format", sim.format, "pgm or raw16le")->capture_default_str();

    CharacterizeArgs chr;
    auto* characterize = app.add_subcommand("characterize", "Per-pixel statistics, Fano factor, gain, mask")->fallthrough();
    characterize->add_option("--input", chr.input, "Frame file or directory (a sweep directory fits the gain)")
        ->required();
    characterize->add_option("--preset", chr.preset)->check(CLI::IsMember(qrng::sensor_preset_names()));
    characterize->add_option("--tolerance", chr.tolerance, "|F - 1| bound for the operating region")
        ->capture_default_str();

    EntropyArgs ent;
    auto* entropy = app.add_subcommand("entropy", "Quantum entropy per pixel and per raw bit")->fallthrough();
    entropy->add_option("--nbar", ent.n_bar)->required();
    entropy->add_option("--bit-depth", ent.bit_depth, "Defaults to the sensor's ADC width");
    entropy->add_option("--preset", ent.preset)->check(CLI::IsMember(qrng::sensor_preset_names()));

    PlanArgs pl;
    auto* plan = app.add_subcommand("plan", "Choose k for a target log2(epsilon)")->fallthrough();
    plan->add_option("--s", pl.s, "Entropy per raw bit");
    plan->add_option("--nbar", pl.n_bar, "Derive s from a mean photon number");
    plan->add_option("--bit-depth", pl.bit_depth);
    plan->add_option("--preset", pl.preset)->check(CLI::IsMember(qrng::sensor_preset_names()));
    plan->add_option("--target-log2-eps", pl.target)->capture_default_str();
    plan->add_option("--l", pl.l)->capture_default_str();

    ExtractArgs ex;
    auto* extract = app.add_subcommand("extract", "Frames to extracted random bytes")->fallthrough();
    extract->add_option("--input", ex.input)->required();
    extract->add_option("--preset", ex.preset)->check(CLI::IsMember(qrng::sensor_preset_names()));
    extract->add_option("--mask", ex.mask, "mask.pgm from characterize")->check(CLI::ExistingFile);
    auto* l_opt = extract->add_option("--l", ex.l, "Input block length")->capture_default_str();
    auto* k_opt = extract->add_option("--k", ex.k, "Output bits per block")->capture_default_str();
    auto* seed_opt = extract->add_option("--matrix-seed", ex.matrix_seed, "64 hex digits");
    extract->add_option("--matrix", ex.matrix, "Matrix file")->check(CLI::ExistingFile)->excludes(seed_opt);
    extract->add_option("--nbar", ex.n_bar, "Mean photon number (default: metadata or estimate)");
    extract->add_option("--s", ex.s, "Entropy per raw bit, overriding the estimate");
    extract->add_flag("--force", ex.force, "Run even when s*l <= k");

    TestArgs ts;
    auto* test = app.add_subcommand("test", "Native randomness battery on a bits file")->fallthrough();
    test->add_option("--input", ts.input)->required()->check(CLI::ExistingFile);
    test->add_option("--alpha", ts.options.alpha)->capture_default_str();
    test->add_option("--block-size", ts.options.block_size)->capture_default_str();
    test->add_option("--max-lag", ts.options.max_lag)->capture_default_str();
    test->add_option("--export", ts.export_path, "Write the stream as bytes for external batteries ('-' = stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*simulate) return cmd_simulate(g, sim);
        if (*characterize) return cmd_characterize(g, chr);
        if (*entropy) return cmd_entropy(g, ent);
        if (*plan) return cmd_plan(g, pl);
        if (*extract) return cmd_extract(g, ex, l_opt->count() > 0, k_opt->count() > 0);
        if (*test) return cmd_test(g, ts);
    } catch (const UsageError& e) {
        std::cerr << "qrng: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "qrng: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "qrng: error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
