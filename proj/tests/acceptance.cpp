// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include "octoplace/octoplace.hpp"
#include "support/golden.hpp"
#include "support/oracles.hpp"
#include "support/study.hpp"

using namespace octoplace;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
    bool ok = true;
    std::string detail;
    void fail(const std::string& why) {
        if (ok) detail = why;
        ok = false;
    }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Verdict golden_end_to_end() {
    Verdict v;
    double slowest = 0.0;
    for (const auto& scene : golden::all_scenes()) {
        for (bool parallel : {false, true}) {
            PipelineConfig cfg;
            cfg.parallel = parallel;
            const Backends b(std::make_shared<FixtureTransport>(scene.store));
            const auto t0 = Clock::now();
            const auto trace = place(scene.image, scene.object, b, cfg);
            const double dt = seconds_since(t0);
            slowest = std::max(slowest, dt);
            if (const auto d = golden::diff(trace, scene.expected); !d.empty()) v.fail(scene.name + " trace differs");
            if (dt >= 1.0) v.fail(scene.name + " took " + std::to_string(dt) + " s");
        }
    }
    if (v.ok) v.detail = "3 scenes bit-exact, slowest " + std::to_string(slowest * 1000) + " ms";
    return v;
}

std::string random_word(std::mt19937_64& rng) {
    std::string w(3 + rng() % 8, 'a');
    for (auto& c : w) c = static_cast<char>('a' + rng() % 26);
    return w;
}

Verdict template_fidelity() {
    Verdict v;
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 20; ++i) {
        std::vector<std::string> nouns(1 + rng() % 6);
        for (auto& n : nouns) n = random_word(rng);
        std::string object = random_word(rng);
        if (rng() % 3 == 0) object += " " + random_word(rng);

        std::ostringstream q;
        q << "Is there a " << nouns[0] << " in the image?";
        if (build_vqa_question(nouns[0]) != q.str()) v.fail("VQA question for '" + nouns[0] + "'");

        std::ostringstream s;
        s << "Give a one word response to fill in the blank using only one of these options: {";
        for (std::size_t k = 0; k < nouns.size(); ++k) s << (k ? ", " : "") << nouns[k];
        s << "}. The " << object << " was located on the ____.";
        if (build_selection_prompt(nouns, object) != s.str()) v.fail("selection prompt for '" + object + "'");
    }
    if (v.ok) v.detail = "20 randomized inputs";
    return v;
}

Verdict geometry_oracle() {
    Verdict v;
    std::mt19937_64 rng(7);
    int hits = 0;
    long double worst_t = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto s = oracle::random_scene(rng, 50);
        const auto want = oracle::brute_force_first_hit(s.mesh, s.ray);
        std::optional<Placement3D> got;
        try {
            got = raycast_mesh(s.mesh, s.ray);
        } catch (const MissError&) {
        }
        if (got.has_value() != want.has_value()) {
            v.fail("hit/miss disagreement on scene " + std::to_string(i));
            continue;
        }
        if (!got) continue;
        ++hits;
        const auto hit = first_hit(s.mesh, s.ray);
        if (!hit || hit->triangle != want->triangle) v.fail("triangle disagreement on scene " + std::to_string(i));
        if (!hit) continue;
        worst_t = std::max(worst_t, std::abs(static_cast<long double>(hit->t) - want->t));
        const Vec3 expect = s.ray.at(hit->t);
        if (got->x != expect.x || got->y != expect.y || got->z != expect.z) v.fail("point is not origin + t*dir");
    }
    if (worst_t >= 1e-9L) v.fail("max |t - t*| = " + std::to_string(static_cast<double>(worst_t)));

    double worst_px = 0.0;
    std::uniform_real_distribution<double> f(50.0, 1500.0), z(0.05, 30.0);
    for (int i = 0; i < 1000; ++i) {
        const int w = 1 + static_cast<int>(rng() % 64), h = 1 + static_cast<int>(rng() % 48);
        const CameraIntrinsics k{f(rng), f(rng), std::uniform_real_distribution<double>(0, w)(rng),
                                 std::uniform_real_distribution<double>(0, h)(rng)};
        std::vector<double> d(static_cast<std::size_t>(w * h));
        for (auto& x : d) x = z(rng);
        const DepthScene scene(SceneImage::filled(w, h, 0, 0, 0), d, k);
        const int x = static_cast<int>(rng() % w), y = static_cast<int>(rng() % h);
        const auto p = place3d(scene, Placement2D{x, y, "floor", 1.0});
        worst_px = std::max({worst_px, std::abs(k.fx * p.x / p.z + k.cx - x), std::abs(k.fy * p.y / p.z + k.cy - y)});
    }
    if (worst_px >= 1e-6) v.fail("unprojection error " + std::to_string(worst_px) + " px");
    if (v.ok) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "1000 meshes (%d hits), max |dt| %.3Le; 1000 pixels, max error %.3e px", hits,
                      worst_t, worst_px);
        v.detail = buf;
    }
    return v;
}

Verdict exclusion_arithmetic() {
    Verdict v;
    const auto counts = usable_pairs(study::make_grid(100, default_object_list(), 573));
    for (auto m : kAllMethods)
        if (counts.at(m) != 927) v.fail(method_name(m) + " has " + std::to_string(counts.at(m)));
    if (v.ok) v.detail = "927 usable pairs for each of 4 methods";
    return v;
}

Verdict figure_replay() {
    Verdict v;
    const auto tasks = build_schedule(study::make_grid(100, default_object_list(), 573), default_schedule_sizes(), 3);
    const auto report = build_report(study::judge(tasks, study::figure_counts()), tasks);
    const std::array<std::array<double, 3>, 5> want = {{{0.98, 0.00, 0.02},
                                                         {0.96, 0.04, 0.00},
                                                         {0.86, 0.14, 0.00},
                                                         {0.86, 0.12, 0.02},
                                                         {0.06, 0.51, 0.43}}};
    for (std::size_t i = 0; i < want.size(); ++i) {
        const auto& row = report.rows.at(i);
        if (!row) {
            v.fail(comparison_name(kAllComparisons[i]) + " has no judgments");
            continue;
        }
        if (std::abs(row->win - want[i][0]) >= 1e-9 || std::abs(row->tie - want[i][1]) >= 1e-9 ||
            std::abs(row->lose - want[i][2]) >= 1e-9)
            v.fail(comparison_name(kAllComparisons[i]) + " proportions differ");
    }
    if (!report.octopus_at_least_as_natural || *report.octopus_at_least_as_natural != 0.57)
        v.fail("at_least_as_natural is not exactly 0.57");
    if (v.ok) v.detail = "5 rows within 1e-9, at_least_as_natural = 0.57";
    return v;
}

Verdict blinding() {
    Verdict v;
    const auto records = study::make_grid(40, default_object_list(), 200);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        const auto tasks = build_schedule(records, default_schedule_sizes(), rng());
        auto flipped_tasks = tasks;
        std::vector<JudgmentRecord> a, b;
        for (std::size_t k = 0; k < tasks.size(); ++k) {
            const auto side = static_cast<Side>(rng() % 3);
            a.push_back(record_judgment(tasks[k], side, "e", "ts"));
            auto& ft = flipped_tasks[k];
            std::swap(ft.left, ft.right);
            ft.left_is_first_method = !ft.left_is_first_method;
            b.push_back(record_judgment(ft, side == Side::left    ? Side::right
                                                : side == Side::right ? Side::left
                                                                      : Side::tie,
                                        "e", "ts"));
        }
        if (report_json(build_report(a, tasks)) != report_json(build_report(b, flipped_tasks)))
            v.fail("schedule " + std::to_string(i) + " changed under flip");
    }
    if (v.ok) v.detail = "100 random schedules";
    return v;
}

std::string fixture_run() {
    std::string out;
    for (const auto& scene : golden::all_scenes()) {
        for (bool parallel : {false, true}) {
            PipelineConfig cfg;
            cfg.parallel = parallel;
            const Backends b(std::make_shared<FixtureTransport>(scene.store));
            out += trace_to_json(place(scene.image, scene.object, b, cfg), false).dump() + "\n";
        }
    }
    const auto tasks = build_schedule(study::make_grid(100, default_object_list(), 573), default_schedule_sizes(), 11);
    const auto report = build_report(study::judge(tasks, study::figure_counts()), tasks);
    out += schedule_to_json(tasks).dump() + "\n" + report_csv(report) + report_json(report).dump() + "\n";
    return out;
}

Verdict determinism() {
    Verdict v;
    const auto a = fixture_run();
    const auto b = fixture_run();
    if (a != b) v.fail("outputs differ between runs");
    if (v.ok) v.detail = std::to_string(a.size()) + " bytes identical across two runs";
    return v;
}

class SlowTransport : public Transport {
public:
    explicit SlowTransport(FixtureStore store) : inner_(std::move(store)) {}
    nlohmann::json call(const Request& r) const override {
        std::this_thread::sleep_for(std::chrono::milliseconds(3));
        return inner_.call(r);
    }

private:
    FixtureTransport inner_;
};

Verdict latency() {
    Verdict v;
    double worst = 0.0;
    for (const auto& scene : golden::all_scenes()) {
        for (auto make : std::vector<std::function<std::shared_ptr<const Transport>()>>{
                 [&] { return std::make_shared<FixtureTransport>(scene.store); },
                 [&] { return std::make_shared<SlowTransport>(scene.store); }}) {
            const Backends b(make());
            const auto t0 = Clock::now();
            const auto trace = place(scene.image, scene.object, b);
            const double wall = seconds_since(t0);
            double sum = 0.0;
            for (const auto& stage : pipeline_stages()) {
                const auto it = trace.stage_latencies.find(stage);
                if (it == trace.stage_latencies.end()) {
                    v.fail(scene.name + " lacks stage " + stage);
                    continue;
                }
                sum += it->second;
            }
            const double internal = std::abs(sum - trace.total_seconds) / trace.total_seconds;
            worst = std::max(worst, internal);
            if (internal > 0.05) v.fail(scene.name + " stage sum off total by " + std::to_string(internal * 100) + "%");
            if (wall > 0.02) {
                const double external = std::abs(sum - wall) / wall;
                worst = std::max(worst, external);
                if (external > 0.05)
                    v.fail(scene.name + " stage sum off caller wall-clock by " + std::to_string(external * 100) + "%");
            }
        }
    }
    if (v.ok) v.detail = "8 stages in every trace, worst deviation " + std::to_string(worst * 100) + "%";
    return v;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"golden end-to-end", golden_end_to_end},
        {"template fidelity", template_fidelity},
        {"geometry oracle", geometry_oracle},
        {"exclusion arithmetic", exclusion_arithmetic},
        {"figure replay", figure_replay},
        {"blinding", blinding},
        {"determinism", determinism},
        {"latency instrumentation", latency},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v.fail(std::string("exception: ") + e.what());
        }
        failures += !v.ok;
        std::printf("%s %s: %s\n", v.ok ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
