#pragma once

// PNG encode/decode (libpng simplified API) and scene bundle I/O.
//
// A scene bundle is a directory holding rgb.png (8-bit RGB), depth.png
// (16-bit grayscale, millimeters) and intrinsics.json {fx, fy, cx, cy}.

#include <png.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "octoplace/error.hpp"
#include "octoplace/scene.hpp"

namespace octoplace {

namespace detail {

struct PngImage {
    png_image img{};
    PngImage() {
        img.version = PNG_IMAGE_VERSION;
    }
    ~PngImage() { png_image_free(&img); }
    PngImage(const PngImage&) = delete;
    PngImage& operator=(const PngImage&) = delete;
};

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace detail

/// Decodes any PNG into 8-bit RGB (palette/gray/alpha are converted).
inline SceneImage decode_png_rgb(std::span<const std::uint8_t> data, std::string id = {}) {
    detail::PngImage png;
    if (!png_image_begin_read_from_memory(&png.img, data.data(), data.size()))
        throw FormatError(std::string("png decode: ") + png.img.message);
    png.img.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(png.img));
    if (!png_image_finish_read(&png.img, nullptr, pixels.data(), 0, nullptr))
        throw FormatError(std::string("png decode: ") + png.img.message);
    return SceneImage(static_cast<int>(png.img.width), static_cast<int>(png.img.height), std::move(pixels),
                      std::move(id));
}

struct Gray16 {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> values;
};

/// Decodes a 16-bit single-channel PNG without any value transform.
inline Gray16 decode_png_gray16(std::span<const std::uint8_t> data) {
    detail::PngImage png;
    if (!png_image_begin_read_from_memory(&png.img, data.data(), data.size()))
        throw FormatError(std::string("png decode: ") + png.img.message);
    // 16-bit files are read as linear by libpng; requesting the same linear
    // gray format keeps the stored values untouched.
    if ((png.img.format & PNG_FORMAT_FLAG_COLOR) || (png.img.format & PNG_FORMAT_FLAG_ALPHA) ||
        !(png.img.format & PNG_FORMAT_FLAG_LINEAR))
        throw FormatError("depth image must be 16-bit grayscale");
    png.img.format = PNG_FORMAT_LINEAR_Y;
    Gray16 out;
    out.width = static_cast<int>(png.img.width);
    out.height = static_cast<int>(png.img.height);
    out.values.resize(static_cast<std::size_t>(out.width) * out.height);
    if (!png_image_finish_read(&png.img, nullptr, out.values.data(), 0, nullptr))
        throw FormatError(std::string("png decode: ") + png.img.message);
    return out;
}

inline std::vector<std::uint8_t> encode_png_rgb(const SceneImage& image) {
    detail::PngImage png;
    png.img.width = static_cast<png_uint_32>(image.width());
    png.img.height = static_cast<png_uint_32>(image.height());
    png.img.format = PNG_FORMAT_RGB;
    png_alloc_size_t size = 0;
    if (!png_image_write_get_memory_size(png.img, size, 0, image.bytes().data(), 0, nullptr))
        throw FormatError(std::string("png encode: ") + png.img.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&png.img, out.data(), &size, 0, image.bytes().data(), 0, nullptr))
        throw FormatError(std::string("png encode: ") + png.img.message);
    out.resize(size);
    return out;
}

inline std::vector<std::uint8_t> encode_png_gray16(const Gray16& gray) {
    detail::PngImage png;
    png.img.width = static_cast<png_uint_32>(gray.width);
    png.img.height = static_cast<png_uint_32>(gray.height);
    png.img.format = PNG_FORMAT_LINEAR_Y;
    png_alloc_size_t size = 0;
    if (!png_image_write_get_memory_size(png.img, size, 0, gray.values.data(), 0, nullptr))
        throw FormatError(std::string("png encode: ") + png.img.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&png.img, out.data(), &size, 0, gray.values.data(), 0, nullptr))
        throw FormatError(std::string("png encode: ") + png.img.message);
    out.resize(size);
    return out;
}

inline SceneImage load_png(const std::filesystem::path& path, std::string id = {}) {
    if (!std::filesystem::is_regular_file(path)) throw IoError("no such file: " + path.string());
    if (id.empty()) id = path.stem().string();
    return decode_png_rgb(detail::read_file_bytes(path), std::move(id));
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path.string());
}

/// Reads a scene bundle directory. The scene id is the directory name.
inline DepthScene load_depth_scene(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    const auto rgb_path = dir / "rgb.png";
    const auto depth_path = dir / "depth.png";
    const auto intr_path = dir / "intrinsics.json";
    for (const auto& p : {rgb_path, depth_path, intr_path})
        if (!fs::is_regular_file(p)) throw IoError("scene bundle is missing " + p.string());

    auto id = fs::absolute(dir).lexically_normal().filename().string();
    if (id.empty()) id = fs::absolute(dir).lexically_normal().parent_path().filename().string();
    SceneImage image = decode_png_rgb(detail::read_file_bytes(rgb_path), id);
    const Gray16 depth_mm = decode_png_gray16(detail::read_file_bytes(depth_path));
    if (depth_mm.width != image.width() || depth_mm.height != image.height())
        throw FormatError("depth is " + std::to_string(depth_mm.width) + "x" + std::to_string(depth_mm.height) +
                          " but rgb is " + std::to_string(image.width()) + "x" + std::to_string(image.height()));

    CameraIntrinsics intr;
    try {
        std::ifstream in(intr_path);
        const auto j = nlohmann::json::parse(in);
        intr.fx = j.at("fx").get<double>();
        intr.fy = j.at("fy").get<double>();
        intr.cx = j.at("cx").get<double>();
        intr.cy = j.at("cy").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("intrinsics.json: " + std::string(e.what()));
    }

    std::vector<double> meters(depth_mm.values.size());
    for (std::size_t i = 0; i < meters.size(); ++i) meters[i] = depth_mm.values[i] / 1000.0;
    return DepthScene(std::move(image), std::move(meters), intr);
}

/// Writes a scene bundle; depth is quantized to whole millimeters.
inline void save_depth_scene(const std::filesystem::path& dir, const DepthScene& scene) {
    std::filesystem::create_directories(dir);
    write_file_bytes(dir / "rgb.png", encode_png_rgb(scene.image()));
    Gray16 mm{scene.width(), scene.height(), {}};
    mm.values.reserve(scene.depth_values().size());
    for (double d : scene.depth_values()) {
        const double q = std::round(d * 1000.0);
        if (q > 65535.0) throw FormatError("depth exceeds 65.535 m and cannot be stored in millimeters");
        mm.values.push_back(static_cast<std::uint16_t>(q));
    }
    write_file_bytes(dir / "depth.png", encode_png_gray16(mm));
    const auto& k = scene.intrinsics();
    std::ofstream out(dir / "intrinsics.json", std::ios::trunc);
    out << nlohmann::json{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}}.dump(2) << '\n';
}

} // namespace octoplace
