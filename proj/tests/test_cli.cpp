#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "octoplace/octoplace.hpp"
#include "support/golden.hpp"
#include "support/study.hpp"

using namespace octoplace;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int status;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(OCTOPLACE_CLI) + " " + args + " 2>/dev/null";
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) return {-1, {}};
    std::string out;
    char buf[4096];
    while (const auto n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
    const int st = ::pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("octoplace_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
                std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        const auto scene = golden::kitchen();
        write_file_bytes(dir_ / "kitchen.png", encode_png_rgb(scene.image));
        scene.store.save(dir_ / "fixtures.json");
        std::ofstream(dir_ / "config.json") << R"({"backends": {"default": "fixture:fixtures.json"}})";
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string p(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

} // namespace

TEST_F(Cli, PlacePrintsPlacement) {
    const auto r = run("place " + p("kitchen.png") + " cupcake --config " + p("config.json") + " --trace " +
                       p("trace.json"));
    ASSERT_EQ(r.status, 0) << r.out;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["image_id"], "kitchen");
    EXPECT_EQ(j["placement"]["noun"], "plate");
    EXPECT_EQ(j["placement"]["x"], 26);
    EXPECT_EQ(j["placement"]["y"], 14);
    const auto trace = json::parse(read_text(dir_ / "trace.json"));
    EXPECT_EQ(trace["selected_noun"], "plate");
    EXPECT_EQ(trace["selection_prompt"], golden::kitchen().expected.selection_prompt);
}

TEST_F(Cli, MissingImageExits2) {
    EXPECT_EQ(run("place " + p("nope.png") + " cupcake --config " + p("config.json")).status, 2);
    EXPECT_EQ(run("place " + p("kitchen.png") + " cupcake --config " + p("nope.json")).status, 2);
}

TEST_F(Cli, SceneBundleGivesPoint) {
    const auto scene = golden::kitchen();
    const std::vector<double> depth(scene.image.width() * scene.image.height(), 2.0);
    save_depth_scene(dir_ / "bundle", DepthScene(scene.image, depth, {50.0, 50.0, 20.0, 15.0}));
    const auto r = run("place " + p("kitchen.png") + " cupcake --config " + p("config.json") + " --scene " +
                       p("bundle"));
    ASSERT_EQ(r.status, 0) << r.out;
    const auto pt = json::parse(r.out)["point3d"];
    EXPECT_DOUBLE_EQ(pt["z"].get<double>(), 2.0);
    EXPECT_DOUBLE_EQ(pt["x"].get<double>(), (26 - 20.0) * 2.0 / 50.0);
    EXPECT_DOUBLE_EQ(pt["y"].get<double>(), (14 - 15.0) * 2.0 / 50.0);

    save_depth_scene(dir_ / "hole", DepthScene(scene.image, std::vector<double>(depth.size(), 0.0),
                                               {50.0, 50.0, 20.0, 15.0}));
    const auto miss = run("place " + p("kitchen.png") + " cupcake --config " + p("config.json") + " --scene " +
                          p("hole"));
    EXPECT_EQ(miss.status, 4);
    EXPECT_TRUE(json::parse(miss.out)["point3d"].is_null());
}

TEST_F(Cli, BackendFailureExits3) {
    const auto scene = golden::kitchen();
    auto j = scene.store.to_json();
    j.erase(request_digest({Capability::ground, &scene.image, "plate"}));
    FixtureStore::from_json(j).save(dir_ / "fixtures.json");
    const auto r = run("place " + p("kitchen.png") + " cupcake --config " + p("config.json") + " --trace " +
                       p("trace.json"));
    EXPECT_EQ(r.status, 3);
    EXPECT_EQ(json::parse(read_text(dir_ / "trace.json"))["selected_noun"], "plate");
}

TEST_F(Cli, ScheduleAndReport) {
    {
        std::ofstream out(dir_ / "annotations.csv");
        write_annotations_csv(out, study::make_grid(100, default_object_list(), 573));
    }
    ASSERT_EQ(run("eval schedule --annotations " + p("annotations.csv") + " --out " + p("schedule.json") +
                  " --seed 9")
                  .status,
              0);
    const auto tasks = load_schedule(dir_ / "schedule.json");
    ASSERT_EQ(tasks.size(), 300u);

    std::ofstream(dir_ / "empty.jsonl").close();
    const auto empty = run("eval report --log " + p("empty.jsonl") + " --schedule " + p("schedule.json"));
    ASSERT_EQ(empty.status, 0);
    EXPECT_EQ(empty.out, report_csv(build_report({}, tasks)));

    {
        std::ofstream log(dir_ / "log.jsonl");
        for (const auto& j : study::judge(tasks, study::figure_counts())) log << judgment_to_line(j) << '\n';
    }
    const auto r = run("eval report --log " + p("log.jsonl") + " --schedule " + p("schedule.json") + " --out " +
                       p("report.csv"));
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(r.out, "octopus_vs_natural at_least_as_natural: 0.57\n");
    EXPECT_NE(read_text(dir_ / "report.csv").find("octopus_vs_natural,100,0.06,0.51,0.43\n"), std::string::npos);
}

TEST_F(Cli, OversizedScheduleFails) {
    {
        std::ofstream out(dir_ / "annotations.csv");
        write_annotations_csv(out, study::make_grid(1, {"a", "b"}, 0));
    }
    EXPECT_NE(run("eval schedule --annotations " + p("annotations.csv") + " --out " + p("s.json")).status, 0);
    EXPECT_EQ(run("eval schedule --annotations " + p("annotations.csv") + " --out " + p("s.json") +
                  " --size natural_vs_unnatural=1 --size natural_vs_random=1 --size octopus_vs_unnatural=1"
                  " --size octopus_vs_random=1 --size octopus_vs_natural=2")
                  .status,
              0);
}
