#include "roikit/kitti_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "roikit/geometry.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts are unsupported");

namespace roikit {
namespace {

std::vector<char> read_all_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const auto size = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<char> bytes(static_cast<size_t>(size));
    if (size > 0) in.read(bytes.data(), size);
    if (!in) throw FormatError("read failed on " + path.string());
    return bytes;
}

float f32_at(const char* base, size_t index) {
    float v;
    std::memcpy(&v, base + index * sizeof(float), sizeof(float));
    return v;
}

void append_f32(std::vector<char>& out, float v) {
    char raw[sizeof(float)];
    std::memcpy(raw, &v, sizeof(float));
    out.insert(out.end(), raw, raw + sizeof(float));
}

void write_all_bytes(const std::filesystem::path& path, const std::vector<char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed on " + path.string());
}

double parse_double(std::string_view token, const std::filesystem::path& path, size_t line_no) {
    double value = 0.0;
    const auto* first = token.data();
    const auto* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad number '" +
                          std::string(token) + "'");
    }
    return value;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream iss(line);
    std::string tok;
    while (iss >> tok) tokens.push_back(tok);
    return tokens;
}

}  // namespace

std::vector<RawPoint> read_point_cloud(const std::filesystem::path& path) {
    const auto bytes = read_all_bytes(path);
    if (bytes.size() % 16 != 0) {
        throw FormatError(path.string() + ": length " + std::to_string(bytes.size()) +
                          " is not a multiple of 16");
    }
    const size_t count = bytes.size() / 16;
    std::vector<RawPoint> points;
    points.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        RawPoint p;
        p.x = f32_at(bytes.data(), i * 4 + 0);
        p.y = f32_at(bytes.data(), i * 4 + 1);
        p.z = f32_at(bytes.data(), i * 4 + 2);
        p.r = f32_at(bytes.data(), i * 4 + 3);
        if (!p.finite()) {
            throw FormatError(path.string() + ": non-finite value in record " + std::to_string(i));
        }
        points.push_back(p);
    }
    return points;
}

void write_point_cloud(const std::filesystem::path& path, std::span<const RawPoint> points) {
    std::vector<char> bytes;
    bytes.reserve(points.size() * 16);
    for (const RawPoint& p : points) {
        append_f32(bytes, static_cast<float>(p.x));
        append_f32(bytes, static_cast<float>(p.y));
        append_f32(bytes, static_cast<float>(p.z));
        append_f32(bytes, static_cast<float>(p.r));
    }
    write_all_bytes(path, bytes);
}

std::vector<Point5> read_point5_cloud(const std::filesystem::path& path) {
    const auto bytes = read_all_bytes(path);
    if (bytes.size() % 20 != 0) {
        throw FormatError(path.string() + ": length " + std::to_string(bytes.size()) +
                          " is not a multiple of 20");
    }
    const size_t count = bytes.size() / 20;
    std::vector<Point5> points;
    points.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        Point5 p;
        p.x = f32_at(bytes.data(), i * 5 + 0);
        p.y = f32_at(bytes.data(), i * 5 + 1);
        p.z = f32_at(bytes.data(), i * 5 + 2);
        p.r = f32_at(bytes.data(), i * 5 + 3);
        p.d_da = f32_at(bytes.data(), i * 5 + 4);
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
            !std::isfinite(p.r) || !std::isfinite(p.d_da) || p.d_da < 0.0) {
            throw FormatError(path.string() + ": invalid value in record " + std::to_string(i));
        }
        points.push_back(p);
    }
    return points;
}

void write_point5_cloud(const std::filesystem::path& path, std::span<const Point5> points) {
    std::vector<char> bytes;
    bytes.reserve(points.size() * 20);
    for (const Point5& p : points) {
        append_f32(bytes, static_cast<float>(p.x));
        append_f32(bytes, static_cast<float>(p.y));
        append_f32(bytes, static_cast<float>(p.z));
        append_f32(bytes, static_cast<float>(p.r));
        append_f32(bytes, static_cast<float>(p.d_da));
    }
    write_all_bytes(path, bytes);
}

CalibrationSet read_calibration(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());

    bool have_p = false, have_r0 = false, have_tr = false;
    CalibrationSet calib;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;  // blank or unrelated line
        const std::string key = line.substr(0, colon);
        const auto tokens = split_ws(line.substr(colon + 1));

        auto fill = [&](double* dst, size_t expected) {
            if (tokens.size() != expected) {
                throw FormatError(path.string() + ":" + std::to_string(line_no) + ": key " + key +
                                  " has " + std::to_string(tokens.size()) + " values, expected " +
                                  std::to_string(expected));
            }
            for (size_t i = 0; i < expected; ++i) dst[i] = parse_double(tokens[i], path, line_no);
        };

        if (key == "P2") {
            double v[12];
            fill(v, 12);
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 4; ++c) calib.P(r, c) = v[r * 4 + c];
            have_p = true;
        } else if (key == "R0_rect") {
            double v[9];
            fill(v, 9);
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) calib.R0(r, c) = v[r * 3 + c];
            have_r0 = true;
        } else if (key == "Tr_velo_to_cam") {
            double v[12];
            fill(v, 12);
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 4; ++c) calib.Tr(r, c) = v[r * 4 + c];
            have_tr = true;
        }
    }
    if (!have_p) throw MissingCalibError("P2");
    if (!have_r0) throw MissingCalibError("R0_rect");
    if (!have_tr) throw MissingCalibError("Tr_velo_to_cam");
    calib.validate();
    return calib;
}

DepthRaster read_depth_raster(const std::filesystem::path& path) {
    const auto bytes = read_all_bytes(path);
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "DPR1", 4) != 0) {
        throw FormatError(path.string() + ": missing DPR1 magic");
    }
    uint32_t w = 0, h = 0;
    std::memcpy(&w, bytes.data() + 4, 4);
    std::memcpy(&h, bytes.data() + 8, 4);
    const size_t expected = 12 + size_t(w) * size_t(h) * sizeof(float);
    if (bytes.size() != expected) {
        throw FormatError(path.string() + ": payload is " + std::to_string(bytes.size() - 12) +
                          " bytes, expected " + std::to_string(expected - 12));
    }
    DepthRaster raster;
    raster.width = w;
    raster.height = h;
    raster.data.resize(size_t(w) * h);
    if (!raster.data.empty()) {
        std::memcpy(raster.data.data(), bytes.data() + 12, raster.data.size() * sizeof(float));
    }
    for (size_t i = 0; i < raster.data.size(); ++i) {
        if (!std::isfinite(raster.data[i]) || raster.data[i] < 0.0f) {
            throw FormatError(path.string() + ": invalid depth at cell " + std::to_string(i));
        }
    }
    return raster;
}

void write_depth_raster(const std::filesystem::path& path, const DepthRaster& raster) {
    if (raster.data.size() != size_t(raster.width) * raster.height) {
        throw FormatError("raster data length does not match width * height");
    }
    std::vector<char> bytes;
    bytes.reserve(12 + raster.data.size() * sizeof(float));
    bytes.insert(bytes.end(), {'D', 'P', 'R', '1'});
    char dims[8];
    std::memcpy(dims, &raster.width, 4);
    std::memcpy(dims + 4, &raster.height, 4);
    bytes.insert(bytes.end(), dims, dims + 8);
    for (float v : raster.data) append_f32(bytes, v);
    write_all_bytes(path, bytes);
}

namespace {

ClassLabel class_from_token(const std::string& token) {
    if (token == "Car") return ClassLabel::Car;
    if (token == "Pedestrian") return ClassLabel::Pedestrian;
    if (token == "Cyclist") return ClassLabel::Cyclist;
    return ClassLabel::Other;
}

}  // namespace

std::vector<LabeledBox> read_labels(const std::filesystem::path& path,
                                    const CalibrationSet& calib) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());

    std::vector<LabeledBox> boxes;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        // type trunc occl alpha  x1 y1 x2 y2  h w l  X Y Z  ry [score]
        if (tokens.size() < 15) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected >= 15 columns, got " +
                              std::to_string(tokens.size()));
        }
        LabeledBox entry;
        entry.label = class_from_token(tokens[0]);
        entry.dont_care = (tokens[0] == "DontCare");
        entry.truncation = parse_double(tokens[1], path, line_no);
        entry.occlusion = static_cast<int>(parse_double(tokens[2], path, line_no));

        double h = parse_double(tokens[8], path, line_no);
        double w = parse_double(tokens[9], path, line_no);
        double l = parse_double(tokens[10], path, line_no);
        const Vec3 loc_rect(parse_double(tokens[11], path, line_no),
                            parse_double(tokens[12], path, line_no),
                            parse_double(tokens[13], path, line_no));
        const double ry = parse_double(tokens[14], path, line_no);

        if (entry.dont_care && (h <= 0.0 || w <= 0.0 || l <= 0.0)) {
            h = w = l = 1.0;  // KITTI writes -1 dims for DontCare regions
        }
        if (h <= 0.0 || w <= 0.0 || l <= 0.0) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) +
                              ": non-positive box dimensions");
        }

        // KITTI stores the bottom-center in the rectified camera frame.
        Vec3 c = rect_to_lidar(loc_rect, calib);
        c.z() += h / 2.0;
        const double yaw = -ry - std::numbers::pi / 2.0;
        entry.box = Box3D(c, l, w, h, yaw);
        boxes.push_back(std::move(entry));
    }
    return boxes;
}

}  // namespace roikit
