#include "frame_source.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "qrng/ingest.hpp"

namespace fs = std::filesystem;

namespace qrng::cli {

namespace {

void absorb_meta(FrameSet& set, const nlohmann::json& meta) {
    if (!meta.is_object()) return;
    for (const auto& [key, value] : meta.items()) set.meta[key] = value;
    if (meta.contains("sensor_config")) {
        set.sensor = meta.at("sensor_config").get<SensorConfig>();
    } else if (meta.contains("sensor") && meta.at("sensor").is_string()) {
        try {
            set.sensor = sensor_preset(meta.at("sensor").get<std::string>());
        } catch (const std::invalid_argument&) {
            // Free-form sensor label; leave the config to the caller.
        }
    }
    if (meta.contains("n_bar_estimate") && meta.at("n_bar_estimate").is_number()) {
        set.n_bar = meta.at("n_bar_estimate").get<double>();
    }
}

void load_file(FrameSet& set, const fs::path& file) {
    if (file.extension() == ".pgm") {
        set.frames.push_back(read_pgm(file));
        if (auto meta = read_sidecar(file)) absorb_meta(set, *meta);
        return;
    }
    const auto sidecar = read_sidecar(file);
    if (!sidecar) {
        throw FormatError(file.string() + ": raw frames need a sidecar " + sidecar_path(file).string());
    }
    const auto header = sidecar->get<FrameFileHeader>();
    auto frames = read_raw(file, header);
    for (auto& f : frames) set.frames.push_back(std::move(f));
    absorb_meta(set, *sidecar);
}

}  // namespace

FrameSet load_frame_set(const fs::path& path) {
    FrameSet set;
    if (!fs::exists(path)) {
        throw std::runtime_error(path.string() + ": no such file or directory");
    }
    if (!fs::is_directory(path)) {
        load_file(set, path);
        return set;
    }
    std::vector<fs::path> files;
    const auto manifest = path / "manifest.json";
    if (fs::exists(manifest)) {
        std::ifstream in(manifest);
        const auto j = nlohmann::json::parse(in);
        for (const auto& name : j.at("files")) files.push_back(path / name.get<std::string>());
        absorb_meta(set, j);
    } else {
        for (const auto& entry : fs::directory_iterator(path)) {
            const auto ext = entry.path().extension();
            if (entry.is_regular_file() && (ext == ".pgm" || ext == ".raw")) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
    }
    if (files.empty()) {
        throw std::runtime_error(path.string() + ": no frame files found");
    }
    for (const auto& f : files) load_file(set, f);
    return set;
}

nlohmann::json frame_metadata(const SensorConfig& config, double n_bar, std::uint64_t seed) {
    return {{"sensor", config.name}, {"sensor_config", config}, {"n_bar_estimate", n_bar}, {"seed", seed}};
}

std::vector<fs::path> write_frame_set(const fs::path& dir, std::span<const Frame> frames, const std::string& format,
                                      const nlohmann::json& meta) {
    fs::create_directories(dir);
    std::vector<fs::path> written;
    nlohmann::json manifest = meta;
    manifest["files"] = nlohmann::json::array();
    if (format == "pgm") {
        for (std::size_t i = 0; i < frames.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "frame_%04zu.pgm", i);
            write_pgm(frames[i], dir / name);
            manifest["files"].push_back(name);
            written.push_back(dir / name);
        }
    } else if (format == "raw16le") {
        const FrameFileHeader header{FrameFormat::raw16le, frames.front().width, frames.front().height,
                                     frames.front().bit_depth, frames.size()};
        const auto file = dir / "frames.raw";
        write_raw(frames, header, file);
        nlohmann::json sidecar = header;
        for (const auto& [key, value] : meta.items()) sidecar[key] = value;
        write_sidecar(file, sidecar);
        manifest["files"].push_back("frames.raw");
        written.push_back(file);
    } else {
        throw std::invalid_argument("unknown output format '" + format + "' (pgm or raw16le)");
    }
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
    if (!out) throw std::runtime_error((dir / "manifest.json").string() + ": write failed");
    return written;
}

}  // namespace qrng::cli
