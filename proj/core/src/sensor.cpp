#include "qrng/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qrng/parallel.hpp"
#include "qrng/variates.hpp"

namespace qrng {

void SensorConfig::validate() const {
    auto fail = [this](const std::string& what) {
        throw std::invalid_argument("sensor config '" + name + "': " + what);
    };
    if (!(eta > 0.0 && eta <= 1.0)) fail("eta must lie in (0, 1]");
    if (!(zeta > 0.0) || !std::isfinite(zeta)) fail("zeta must be positive");
    if (!(sigma_t >= 0.0) || !std::isfinite(sigma_t)) fail("sigma_t must be non-negative");
    if (!std::isfinite(offset)) fail("offset must be finite");
    if (!(full_well > 0.0) || !std::isfinite(full_well)) fail("full_well must be positive");
    if (bit_depth < 1 || bit_depth > 16) fail("bit_depth must lie in [1, 16]");
}

SensorConfig sensor_preset(std::string_view name) {
    // Quantum efficiency is not published for either device; eta stays 1 and
    // all intensities are absorbed electrons.
    if (name == "atik383l") {
        return SensorConfig{"atik383l", 1.0, 2.3, 10.0, 144.0, 2.0e4, 16};
    }
    if (name == "nokia-n9") {
        return SensorConfig{"nokia-n9", 1.0, 1.9, 3.3, -6.0, 500.0, 10};
    }
    throw std::invalid_argument("unknown sensor preset '" + std::string(name) + "'");
}

std::vector<std::string> sensor_preset_names() { return {"atik383l", "nokia-n9"}; }

void to_json(nlohmann::json& j, const SensorConfig& c) {
    j = nlohmann::json{{"name", c.name},
                       {"eta", c.eta},
                       {"zeta", c.zeta},
                       {"sigma_t_electrons", c.sigma_t},
                       {"offset_electrons", c.offset},
                       {"full_well_electrons", c.full_well},
                       {"bit_depth", c.bit_depth}};
}

void from_json(const nlohmann::json& j, SensorConfig& c) {
    try {
        c.name = j.at("name").get<std::string>();
        c.eta = j.at("eta").get<double>();
        c.zeta = j.at("zeta").get<double>();
        c.sigma_t = j.at("sigma_t_electrons").get<double>();
        c.offset = j.at("offset_electrons").get<double>();
        c.full_well = j.at("full_well_electrons").get<double>();
        c.bit_depth = j.at("bit_depth").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("sensor config JSON: ") + e.what());
    }
    c.validate();
}

SensorConfig load_sensor_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open sensor config " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
    return j.get<SensorConfig>();
}

void Frame::validate() const {
    if (bit_depth < 1 || bit_depth > 16) {
        throw std::invalid_argument("frame bit_depth must lie in [1, 16]");
    }
    if (codes.size() != width * height) {
        throw std::invalid_argument("frame code count does not match width * height");
    }
    const std::uint32_t top = max_code();
    for (auto c : codes) {
        if (c > top) {
            throw std::invalid_argument("frame code exceeds 2^bit_depth - 1");
        }
    }
}

PixelSignalModel::PixelSignalModel(double n_bar) : n_bar_(n_bar), sigma_q_(std::sqrt(n_bar)) {
    if (!(n_bar >= 0.0) || !std::isfinite(n_bar)) {
        throw std::invalid_argument("mean absorbed photons must be finite and non-negative");
    }
}

double absorbed_mean(double incident_mean, const SensorConfig& config) {
    if (!(incident_mean >= 0.0)) {
        throw std::invalid_argument("incident mean must be non-negative");
    }
    return config.eta * incident_mean;
}

NoiseDraws draw_noise(const PixelSignalModel& model, const SensorConfig& config, ChaChaStream& gen) noexcept {
    NoiseDraws d;
    d.photons = poisson(gen, model.n_bar());
    d.technical = config.sigma_t > 0.0 ? config.sigma_t * standard_normal(gen) : 0.0;
    return d;
}

std::uint16_t simulate_pixel(const SensorConfig& config, const NoiseDraws& draws) noexcept {
    double electrons = static_cast<double>(draws.photons) + draws.technical + config.offset;
    electrons = std::clamp(electrons, 0.0, config.full_well);
    const double code = std::round(config.zeta * electrons);
    const double top = static_cast<double>(config.max_code());
    return static_cast<std::uint16_t>(std::clamp(code, 0.0, top));
}

namespace {

ChaChaKey simulation_key(std::uint64_t seed, std::uint64_t frame_id) {
    // Words 4..7 are a fixed domain tag so simulation streams never coincide
    // with extractor matrix streams.
    return ChaChaKey{static_cast<std::uint32_t>(seed),     static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(frame_id), static_cast<std::uint32_t>(frame_id >> 32),
                     0x736e6573u, 0x732d726fu, 0x6c756d69u, 0x6e6f6974u};
}

std::size_t checked_pixels(std::size_t width, std::size_t height) {
    if (width == 0 || height == 0) {
        throw std::invalid_argument("frame width and height must be positive");
    }
    if (width > kMaxFramePixels / height) {
        throw std::invalid_argument("frame dimensions overflow the pixel limit");
    }
    return width * height;
}

}  // namespace

Frame simulate_frame(const SensorConfig& config, double n_bar, std::size_t width, std::size_t height,
                     std::uint64_t seed, std::uint64_t frame_id, std::size_t workers) {
    config.validate();
    const std::size_t n_pixels = checked_pixels(width, height);
    const PixelSignalModel model(n_bar);
    const ChaChaKey key = simulation_key(seed, frame_id);

    Frame frame;
    frame.width = width;
    frame.height = height;
    frame.bit_depth = config.bit_depth;
    frame.codes.resize(n_pixels);
    {
        std::ostringstream tag;
        tag << "sim:" << config.name << ":nbar=" << n_bar << ":seed=" << seed << ":frame=" << frame_id;
        frame.source = tag.str();
    }

    parallel_for(n_pixels, 4096, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            ChaChaStream gen(key, i);
            frame.codes[i] = simulate_pixel(config, draw_noise(model, config, gen));
        }
    });
    return frame;
}

std::vector<Frame> simulate_stack(const SensorConfig& config, double n_bar, std::size_t width,
                                  std::size_t height, std::size_t count, std::uint64_t seed,
                                  std::uint64_t first_frame_id, std::size_t workers) {
    std::vector<Frame> frames;
    frames.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        frames.push_back(simulate_frame(config, n_bar, width, height, seed, first_frame_id + i, workers));
    }
    return frames;
}

std::vector<Frame> sweep_intensities(const SensorConfig& config, std::span<const double> n_bars,
                                     std::size_t width, std::size_t height, std::uint64_t seed,
                                     std::size_t workers) {
    if (n_bars.empty()) {
        throw std::invalid_argument("intensity sweep needs at least one intensity");
    }
    std::vector<Frame> frames;
    frames.reserve(n_bars.size());
    for (std::size_t i = 0; i < n_bars.size(); ++i) {
        if (!(n_bars[i] >= 0.0)) {
            throw std::invalid_argument("sweep intensities must be non-negative");
        }
        frames.push_back(simulate_frame(config, n_bars[i], width, height, seed, i, workers));
    }
    return frames;
}

}  // namespace qrng
