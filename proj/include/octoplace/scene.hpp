#pragma once

// Scene data model shared by every stage.
//
// Conventions: pixel (x, y) is (column, row) with the origin at the top-left.
// The 3D camera frame is +x right, +y down, +z forward.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "octoplace/error.hpp"

namespace octoplace {

/// Immutable 8-bit RGB raster, row-major, 3 bytes per pixel.
class SceneImage {
public:
    SceneImage() = default;

    SceneImage(int width, int height, std::vector<std::uint8_t> pixels, std::string id = {})
        : width_(width), height_(height), pixels_(std::move(pixels)), id_(std::move(id)) {
        if (width_ < 1 || height_ < 1)
            throw FormatError("image dimensions must be positive, got " + std::to_string(width_) + "x" +
                              std::to_string(height_));
        if (pixels_.size() != static_cast<std::size_t>(width_) * height_ * 3)
            throw FormatError("pixel buffer holds " + std::to_string(pixels_.size()) + " bytes, expected " +
                              std::to_string(static_cast<std::size_t>(width_) * height_ * 3));
    }

    /// Uniformly filled image; mostly useful for fixtures.
    static SceneImage filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b,
                             std::string id = {}) {
        std::vector<std::uint8_t> px(static_cast<std::size_t>(width > 0 ? width : 0) * (height > 0 ? height : 0) * 3);
        for (std::size_t i = 0; i < px.size(); i += 3) {
            px[i] = r;
            px[i + 1] = g;
            px[i + 2] = b;
        }
        return SceneImage(width, height, std::move(px), std::move(id));
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    const std::string& id() const noexcept { return id_; }
    std::span<const std::uint8_t> bytes() const noexcept { return pixels_; }

    bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    /// Channel `c` of the pixel at row `row`, column `col`.
    std::uint8_t at(int row, int col, int c) const {
        return pixels_[(static_cast<std::size_t>(row) * width_ + col) * 3 + c];
    }

    SceneImage with_id(std::string id) const { return SceneImage(width_, height_, pixels_, std::move(id)); }

    /// Equality covers dimensions and pixels; the id is a label, not content.
    friend bool operator==(const SceneImage& a, const SceneImage& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.pixels_ == b.pixels_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
    std::string id_;
};

struct CameraIntrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;

    void validate() const {
        if (!(fx > 0.0) || !(fy > 0.0))
            throw FormatError("focal lengths must be positive (fx=" + std::to_string(fx) +
                              ", fy=" + std::to_string(fy) + ")");
    }

    friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

/// RGB image + metric depth + pinhole intrinsics. Depth 0 marks missing data.
class DepthScene {
public:
    DepthScene(SceneImage image, std::vector<double> depth, CameraIntrinsics intrinsics)
        : image_(std::move(image)), depth_(std::move(depth)), intrinsics_(intrinsics) {
        intrinsics_.validate();
        if (depth_.size() != static_cast<std::size_t>(image_.width()) * image_.height())
            throw FormatError("depth map has " + std::to_string(depth_.size()) + " values, image has " +
                              std::to_string(static_cast<std::size_t>(image_.width()) * image_.height()) +
                              " pixels");
        for (double d : depth_)
            if (!(d >= 0.0)) throw FormatError("depth values must be non-negative and finite");
    }

    const SceneImage& image() const noexcept { return image_; }
    const CameraIntrinsics& intrinsics() const noexcept { return intrinsics_; }
    int width() const noexcept { return image_.width(); }
    int height() const noexcept { return image_.height(); }

    /// Depth in meters at row `row`, column `col`.
    double depth(int row, int col) const { return depth_[static_cast<std::size_t>(row) * image_.width() + col]; }
    std::span<const double> depth_values() const noexcept { return depth_; }

    friend bool operator==(const DepthScene& a, const DepthScene& b) {
        return a.image_ == b.image_ && a.image_.id() == b.image_.id() && a.depth_ == b.depth_ &&
               a.intrinsics_ == b.intrinsics_;
    }

private:
    SceneImage image_;
    std::vector<double> depth_;
    CameraIntrinsics intrinsics_;
};

/// Half-open pixel box [x0, x1) x [y0, y1).
struct BoundingBox {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const noexcept { return x1 - x0; }
    int height() const noexcept { return y1 - y0; }

    bool valid_for(int image_width, int image_height) const noexcept {
        return 0 <= x0 && x0 < x1 && x1 <= image_width && 0 <= y0 && y0 < y1 && y1 <= image_height;
    }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Placement2D {
    int x = 0;
    int y = 0;
    std::string noun;
    double heat = 0.0;

    friend bool operator==(const Placement2D&, const Placement2D&) = default;
};

struct Placement3D {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Placement3D&, const Placement3D&) = default;
};

inline SceneImage crop(const SceneImage& image, const BoundingBox& box) {
    if (!box.valid_for(image.width(), image.height()))
        throw ContractViolation("crop box (" + std::to_string(box.x0) + "," + std::to_string(box.y0) + "," +
                                std::to_string(box.x1) + "," + std::to_string(box.y1) + ") invalid for " +
                                std::to_string(image.width()) + "x" + std::to_string(image.height()) + " image");
    const auto src = image.bytes();
    std::vector<std::uint8_t> out;
    out.reserve(static_cast<std::size_t>(box.width()) * box.height() * 3);
    for (int row = box.y0; row < box.y1; ++row) {
        const auto begin = (static_cast<std::size_t>(row) * image.width() + box.x0) * 3;
        out.insert(out.end(), src.begin() + begin, src.begin() + begin + static_cast<std::size_t>(box.width()) * 3);
    }
    return SceneImage(box.width(), box.height(), std::move(out), image.id());
}

} // namespace octoplace
