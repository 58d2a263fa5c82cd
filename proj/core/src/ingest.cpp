#include "qrng/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>

namespace qrng {

const char* to_string(FrameFormat f) noexcept {
    switch (f) {
        case FrameFormat::pgm16: return "pgm16";
        case FrameFormat::raw16le: return "raw16le";
        case FrameFormat::raw8: return "raw8";
    }
    return "unknown";
}

FrameFormat parse_frame_format(std::string_view name) {
    if (name == "pgm16" || name == "pgm") return FrameFormat::pgm16;
    if (name == "raw16le") return FrameFormat::raw16le;
    if (name == "raw8") return FrameFormat::raw8;
    throw std::invalid_argument("unknown frame format '" + std::string(name) + "'");
}

void FrameFileHeader::validate() const {
    const int limit = format == FrameFormat::raw8 ? 8 : 16;
    if (bit_depth < 1 || bit_depth > limit) {
        throw std::invalid_argument(std::string("bit depth inconsistent with format ") + to_string(format));
    }
    if (width == 0 || height == 0) {
        throw std::invalid_argument("frame header needs positive width and height");
    }
    if (width > kMaxFramePixels / height) {
        throw std::invalid_argument("frame header dimensions overflow the pixel limit");
    }
}

void to_json(nlohmann::json& j, const FrameFileHeader& h) {
    j = nlohmann::json{{"format", to_string(h.format)},
                       {"width", h.width},
                       {"height", h.height},
                       {"bit_depth", h.bit_depth},
                       {"frame_count", h.frame_count}};
}

void from_json(const nlohmann::json& j, FrameFileHeader& h) {
    h.format = parse_frame_format(j.at("format").get<std::string>());
    h.width = j.at("width").get<std::size_t>();
    h.height = j.at("height").get<std::size_t>();
    h.bit_depth = j.at("bit_depth").get<int>();
    h.frame_count = j.value("frame_count", std::size_t{1});
}

// ---------------------------------------------------------------------------
// PGM

namespace {

// Reads one whitespace-delimited decimal token, skipping '#' comments.
std::size_t read_header_number(std::istream& in, const std::string& label) {
    int c = in.get();
    for (;;) {
        while (c != EOF && std::isspace(c)) c = in.get();
        if (c == '#') {
            while (c != EOF && c != '\n' && c != '\r') c = in.get();
            continue;
        }
        break;
    }
    if (c == EOF || !std::isdigit(c)) {
        throw FormatError(label + ": malformed PGM header");
    }
    std::size_t value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + static_cast<std::size_t>(c - '0');
        if (value > (std::size_t{1} << 40)) {
            throw FormatError(label + ": PGM header value too large");
        }
        c = in.get();
    }
    if (c == EOF || !std::isspace(c)) {
        throw FormatError(label + ": malformed PGM header");
    }
    // The single whitespace character after maxval is consumed here as well.
    return value;
}

int bit_depth_for_maxval(std::size_t maxval) {
    int b = 0;
    while ((std::size_t{1} << b) < maxval + 1) ++b;
    return std::max(b, 1);
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return in;
}

}  // namespace

Frame read_pgm(std::istream& in, const std::string& label) {
    char magic[2];
    if (!in.read(magic, 2) || magic[0] != 'P' || magic[1] != '5') {
        throw FormatError(label + ": not a binary PGM (expected P5)");
    }
    const std::size_t width = read_header_number(in, label);
    const std::size_t height = read_header_number(in, label);
    const std::size_t maxval = read_header_number(in, label);
    if (maxval == 0 || maxval > 65535) {
        throw FormatError(label + ": PGM maxval must lie in [1, 65535]");
    }
    if (width == 0 || height == 0 || width > kMaxFramePixels / height) {
        throw FormatError(label + ": PGM dimensions out of range");
    }

    Frame frame;
    frame.width = width;
    frame.height = height;
    frame.bit_depth = bit_depth_for_maxval(maxval);
    frame.source = "pgm:" + label;
    const std::size_t n = width * height;
    const std::size_t bps = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> payload(n * bps);
    if (!in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()))) {
        throw FormatError(label + ": truncated PGM payload");
    }
    frame.codes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint16_t v = bps == 2 ? static_cast<std::uint16_t>(payload[2 * i] << 8 | payload[2 * i + 1])
                                         : payload[i];
        if (v > maxval) {
            throw FormatError(label + ": PGM sample exceeds maxval");
        }
        frame.codes[i] = v;
    }
    return frame;
}

Frame read_pgm(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_pgm(in, path.string());
}

void write_pgm(const Frame& frame, std::ostream& out) {
    frame.validate();
    const std::uint32_t maxval = frame.max_code();
    out << "P5\n" << frame.width << ' ' << frame.height << '\n' << maxval << '\n';
    std::vector<unsigned char> payload;
    if (maxval > 255) {
        payload.resize(frame.codes.size() * 2);
        for (std::size_t i = 0; i < frame.codes.size(); ++i) {
            payload[2 * i] = static_cast<unsigned char>(frame.codes[i] >> 8);
            payload[2 * i + 1] = static_cast<unsigned char>(frame.codes[i] & 0xFF);
        }
    } else {
        payload.assign(frame.codes.begin(), frame.codes.end());
    }
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (!out) {
        throw std::runtime_error("failed writing PGM data");
    }
}

void write_pgm(const Frame& frame, const std::filesystem::path& path) {
    auto out = open_out(path);
    try {
        write_pgm(frame, out);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Raw dumps

std::vector<Frame> read_raw(std::istream& in, const FrameFileHeader& header, const std::string& label) {
    header.validate();
    if (header.format == FrameFormat::pgm16) {
        throw std::invalid_argument("read_raw: header format must be raw16le or raw8");
    }
    std::vector<unsigned char> payload(header.payload_bytes());
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
        throw FormatError(label + ": raw payload shorter than declared (" + std::to_string(in.gcount()) +
                          " of " + std::to_string(payload.size()) + " bytes)");
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError(label + ": raw payload longer than declared");
    }

    const std::size_t n = header.width * header.height;
    const std::uint32_t top = (std::uint32_t{1} << header.bit_depth) - 1;
    const bool wide = header.format == FrameFormat::raw16le;
    std::vector<Frame> frames(header.frame_count);
    for (std::size_t f = 0; f < header.frame_count; ++f) {
        Frame& frame = frames[f];
        frame.width = header.width;
        frame.height = header.height;
        frame.bit_depth = header.bit_depth;
        frame.source = "raw:" + label + "#" + std::to_string(f);
        frame.codes.resize(n);
        const unsigned char* base = payload.data() + f * n * header.bytes_per_sample();
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint16_t v =
                wide ? static_cast<std::uint16_t>(base[2 * i] | base[2 * i + 1] << 8) : base[i];
            if (v > top) {
                throw FormatError(label + ": raw sample exceeds 2^bit_depth - 1");
            }
            frame.codes[i] = v;
        }
    }
    return frames;
}

std::vector<Frame> read_raw(const std::filesystem::path& path, const FrameFileHeader& header) {
    auto in = open_in(path);
    return read_raw(in, header, path.string());
}

void write_raw(std::span<const Frame> frames, const FrameFileHeader& header, std::ostream& out) {
    header.validate();
    if (header.format == FrameFormat::pgm16) {
        throw std::invalid_argument("write_raw: header format must be raw16le or raw8");
    }
    if (frames.size() != header.frame_count) {
        throw std::invalid_argument("write_raw: frame count does not match header");
    }
    const bool wide = header.format == FrameFormat::raw16le;
    for (const Frame& frame : frames) {
        frame.validate();
        if (frame.width != header.width || frame.height != header.height || frame.bit_depth > header.bit_depth) {
            throw std::invalid_argument("write_raw: frame does not match header geometry or bit depth");
        }
        std::vector<unsigned char> payload(frame.codes.size() * header.bytes_per_sample());
        for (std::size_t i = 0; i < frame.codes.size(); ++i) {
            if (wide) {
                payload[2 * i] = static_cast<unsigned char>(frame.codes[i] & 0xFF);
                payload[2 * i + 1] = static_cast<unsigned char>(frame.codes[i] >> 8);
            } else {
                payload[i] = static_cast<unsigned char>(frame.codes[i]);
            }
        }
        out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    }
    if (!out) {
        throw std::runtime_error("failed writing raw frame data");
    }
}

void write_raw(std::span<const Frame> frames, const FrameFileHeader& header, const std::filesystem::path& path) {
    auto out = open_out(path);
    try {
        write_raw(frames, header, out);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------

std::filesystem::path sidecar_path(const std::filesystem::path& frame_file) {
    auto p = frame_file;
    p += ".json";
    return p;
}

std::optional<nlohmann::json> read_sidecar(const std::filesystem::path& frame_file) {
    const auto path = sidecar_path(frame_file);
    std::ifstream in(path);
    if (!in) {
        return std::nullopt;
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_sidecar(const std::filesystem::path& frame_file, const nlohmann::json& meta) {
    const auto path = sidecar_path(frame_file);
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << meta.dump(2) << '\n';
}

}  // namespace qrng
