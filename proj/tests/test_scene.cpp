#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "octoplace/image_io.hpp"
#include "octoplace/scene.hpp"

using namespace octoplace;
namespace fs = std::filesystem;

namespace {

SceneImage counting_image(int w, int h) {
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>(i * 7 + 3);
    return SceneImage(w, h, std::move(px), "counting");
}

fs::path temp_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("octoplace_scene_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_bundle(const fs::path& dir, int w, int h, int depth_w, int depth_h, double depth_m, double fx) {
    fs::create_directories(dir);
    write_file_bytes(dir / "rgb.png", encode_png_rgb(counting_image(w, h)));
    Gray16 g{depth_w, depth_h, std::vector<std::uint16_t>(static_cast<std::size_t>(depth_w) * depth_h,
                                                         static_cast<std::uint16_t>(depth_m * 1000))};
    write_file_bytes(dir / "depth.png", encode_png_gray16(g));
    std::ofstream(dir / "intrinsics.json") << R"({"fx": )" << fx << R"(, "fy": 1, "cx": 0, "cy": 0})";
}

} // namespace

TEST(SceneImage, RejectsBadDimensions) {
    EXPECT_THROW(SceneImage(0, 1, {}), FormatError);
    EXPECT_THROW(SceneImage(2, 2, std::vector<std::uint8_t>(11)), FormatError);
}

TEST(Crop, FullBoxIsIdentity) {
    const auto img = counting_image(4, 4);
    EXPECT_EQ(crop(img, {0, 0, 4, 4}), img);
}

TEST(Crop, CenterPatch) {
    const auto img = counting_image(4, 4);
    const auto patch = crop(img, {1, 1, 3, 3});
    ASSERT_EQ(patch.width(), 2);
    ASSERT_EQ(patch.height(), 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int c = 0; c < 3; ++c) EXPECT_EQ(patch.at(i, j, c), img.at(1 + i, 1 + j, c));
}

TEST(Crop, EmptyBoxIsContractViolation) {
    const auto img = counting_image(4, 4);
    EXPECT_THROW(crop(img, {2, 2, 2, 3}), ContractViolation);
    EXPECT_THROW(crop(img, {0, 0, 5, 4}), ContractViolation);
    EXPECT_THROW(crop(img, {-1, 0, 2, 2}), ContractViolation);
}

TEST(Crop, NestedCropsCompose) {
    std::mt19937 rng(7);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    for (int iter = 0; iter < 500; ++iter) {
        const int w = pick(1, 12), h = pick(1, 12);
        const auto img = counting_image(w, h);
        BoundingBox a;
        a.x0 = pick(0, w - 1);
        a.x1 = pick(a.x0 + 1, w);
        a.y0 = pick(0, h - 1);
        a.y1 = pick(a.y0 + 1, h);
        BoundingBox b; // inside `a`, in a's coordinates
        b.x0 = pick(0, a.width() - 1);
        b.x1 = pick(b.x0 + 1, a.width());
        b.y0 = pick(0, a.height() - 1);
        b.y1 = pick(b.y0 + 1, a.height());
        const BoundingBox translated{a.x0 + b.x0, a.y0 + b.y0, a.x0 + b.x1, a.y0 + b.y1};
        ASSERT_EQ(crop(crop(img, a), b), crop(img, translated));
    }
}

TEST(LoadDepthScene, ReadsBundle) {
    const auto dir = temp_dir("ok") / "scene1";
    write_bundle(dir, 4, 4, 4, 4, 2.0, 1.0);
    const auto scene = load_depth_scene(dir);
    EXPECT_EQ(scene.width(), 4);
    EXPECT_EQ(scene.height(), 4);
    EXPECT_DOUBLE_EQ(scene.depth(1, 1), 2.0);
    EXPECT_EQ(scene.image(), counting_image(4, 4));
    EXPECT_EQ(scene.image().id(), "scene1");
    EXPECT_EQ(scene.intrinsics(), (CameraIntrinsics{1, 1, 0, 0}));
    // Loading is deterministic.
    EXPECT_EQ(load_depth_scene(dir), scene);
    fs::remove_all(dir.parent_path());
}

TEST(LoadDepthScene, DimensionMismatchIsFormatError) {
    const auto dir = temp_dir("mismatch");
    write_bundle(dir, 4, 4, 4, 3, 2.0, 1.0);
    EXPECT_THROW(load_depth_scene(dir), FormatError);
    fs::remove_all(dir);
}

TEST(LoadDepthScene, ZeroFocalLengthIsFormatError) {
    const auto dir = temp_dir("fx0");
    write_bundle(dir, 4, 4, 4, 4, 2.0, 0.0);
    EXPECT_THROW(load_depth_scene(dir), FormatError);
    fs::remove_all(dir);
}

TEST(LoadDepthScene, MissingFilesAreIoErrors) {
    const auto dir = temp_dir("missing");
    EXPECT_THROW(load_depth_scene(dir), IoError);
    EXPECT_THROW(load_depth_scene(dir / "nope"), IoError);
    fs::remove_all(dir);
}

TEST(LoadDepthScene, RgbDepthImageRejectedAsDepth) {
    const auto dir = temp_dir("rgbdepth");
    write_bundle(dir, 2, 2, 2, 2, 1.0, 1.0);
    write_file_bytes(dir / "depth.png", encode_png_rgb(counting_image(2, 2)));
    EXPECT_THROW(load_depth_scene(dir), FormatError);
    fs::remove_all(dir);
}

TEST(DepthScene, SaveLoadKeepsMillimeterDepth) {
    const auto dir = temp_dir("save");
    std::vector<double> depth = {0.0, 1.234, 65.535, 0.001};
    const DepthScene scene(counting_image(2, 2).with_id(dir.filename().string()), depth, {500, 501, 1.5, 0.5});
    save_depth_scene(dir, scene);
    EXPECT_EQ(load_depth_scene(dir), scene);
    fs::remove_all(dir);
}

TEST(DepthScene, ValidatesInvariants) {
    EXPECT_THROW(DepthScene(counting_image(2, 2), {1, 1, 1}, {}), FormatError);
    EXPECT_THROW(DepthScene(counting_image(2, 2), {1, 1, 1, -0.5}, {}), FormatError);
    EXPECT_THROW(DepthScene(counting_image(2, 2), {1, 1, 1, 1}, {1, -1, 0, 0}), FormatError);
}
