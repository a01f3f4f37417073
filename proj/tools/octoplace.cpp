// octoplace command-line entry point.
//
//   octoplace place <image.png> <object> --config cfg.json [--trace out.json] [--scene bundle/]
//   octoplace eval schedule --annotations a.csv --out schedule.json [--seed N] [--size cmp=N ...]
//   octoplace eval serve --schedule schedule.json --log judgments.jsonl [--images dir] [--port N]
//   octoplace eval report --log judgments.jsonl --schedule schedule.json [--out report.csv]
//
// Exit codes: 0 ok, 1 usage/other, 2 unreadable or malformed input,
// 3 pipeline (backend) failure, 4 no 3D point for the placement.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "octoplace/octoplace.hpp"

namespace {

using namespace octoplace;

int run_place(const std::string& image_path, const std::string& object, const std::string& config_path,
              const std::string& trace_path, const std::string& scene_path) {
    const auto cfg = load_run_config(config_path);
    std::optional<DepthScene> scene;
    if (!scene_path.empty()) scene = load_depth_scene(scene_path);
    const SceneImage image = load_png(image_path);
    const Backends backends = make_backends(cfg);

    PlacementTrace trace;
    try {
        trace = place(image, object, backends, cfg.pipeline);
    } catch (const PipelineError& e) {
        std::cerr << "octoplace: pipeline failed at stage " << e.stage() << ": " << e.what() << '\n';
        if (!trace_path.empty()) std::ofstream(trace_path) << trace_to_json(e.trace()).dump(2) << '\n';
        return 3;
    }
    if (!trace_path.empty()) {
        std::ofstream out(trace_path, std::ios::trunc);
        if (!out) throw IoError("cannot write trace " + trace_path);
        out << trace_to_json(trace).dump(2) << '\n';
    }

    nlohmann::ordered_json result;
    result["image_id"] = trace.image_id;
    result["object"] = trace.object;
    result["placement"] = placement_to_json(trace.placement);
    int status = 0;
    if (scene) {
        try {
            const auto p = place3d(*scene, trace.placement);
            result["point3d"] = {{"x", p.x}, {"y", p.y}, {"z", p.z}};
        } catch (const Error& e) {
            std::cerr << "octoplace: " << e.what() << '\n';
            result["point3d"] = nullptr;
            status = 4;
        }
    }
    std::cout << result.dump(2) << '\n';
    return status;
}

int run_schedule(const std::string& annotations, const std::string& out, std::uint64_t seed,
                 const std::vector<std::string>& size_overrides) {
    const auto records = load_annotations_csv(annotations);
    auto sizes = default_schedule_sizes();
    for (const auto& s : size_overrides) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw FormatError("--size expects comparison=N, got " + s);
        sizes[parse_comparison(s.substr(0, eq))] = std::stoul(s.substr(eq + 1));
    }
    const auto usable = usable_pairs(records);
    const auto tasks = build_schedule(records, sizes, seed);
    save_schedule(out, tasks);
    std::cerr << "usable pairs per method: " << usable.begin()->second << "; scheduled " << tasks.size()
              << " tasks\n";
    return 0;
}

std::atomic<httplib::Server*> g_server{nullptr};

int run_serve(const std::string& schedule_path, const std::string& log_path, const std::string& images,
              int port, const std::string& static_dir) {
    auto schedule = load_schedule(schedule_path);
    auto log = std::make_shared<JudgmentLog>(log_path);
    JudgmentService service(std::move(schedule), log, images);
    httplib::Server server;
    register_routes(server, service, static_dir);
    if (!server.bind_to_port("0.0.0.0", port)) {
        std::cerr << "octoplace: cannot bind port " << port << '\n';
        return 1;
    }
    g_server = &server;
    std::signal(SIGINT, [](int) {
        if (auto* s = g_server.load()) s->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (auto* s = g_server.load()) s->stop();
    });
    std::cerr << "octoplace: serving " << service.schedule().size() << " tasks on port " << port << '\n';
    server.listen_after_bind();
    g_server = nullptr;
    return 0;
}

int run_report(const std::string& log_path, const std::string& schedule_path, const std::string& out) {
    const auto tasks = load_schedule(schedule_path);
    const auto judgments = load_judgment_log(log_path);
    const auto report = build_report(judgments, tasks);
    const auto csv = report_csv(report);
    std::ostream* aggregate = &std::cerr;
    if (out.empty()) {
        std::cout << csv;
    } else {
        std::ofstream f(out, std::ios::trunc);
        if (!f) throw IoError("cannot write report " + out);
        f << csv;
        aggregate = &std::cout;
    }
    *aggregate << "octopus_vs_natural at_least_as_natural: "
               << (report.octopus_at_least_as_natural ? format_number(*report.octopus_at_least_as_natural) : "n/a")
               << '\n';
    return 0;
}

int default_port() {
    if (const char* p = std::getenv("OCTO_PORT")) return std::atoi(p);
    return 8089;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Open-vocabulary virtual object placement"};
    app.require_subcommand(1);

    auto* place_cmd = app.add_subcommand("place", "Place an object in an image");
    std::string image_path, object, config_path, trace_path, scene_path;
    place_cmd->add_option("image", image_path, "Scene image (PNG)")->required();
    place_cmd->add_option("object", object, "Object to place")->required();
    place_cmd->add_option("--config", config_path, "Pipeline config (JSON)")->required();
    place_cmd->add_option("--trace", trace_path, "Write the full trace here");
    place_cmd->add_option("--scene", scene_path, "Scene bundle for the 3D point");

    auto* eval = app.add_subcommand("eval", "Pairwise evaluation study");
    eval->require_subcommand(1);

    auto* sched = eval->add_subcommand("schedule", "Build the blinded comparison schedule");
    std::string annotations, schedule_out;
    std::uint64_t seed = 0;
    std::vector<std::string> sizes;
    sched->add_option("--annotations", annotations, "Annotations CSV")->required();
    sched->add_option("--out", schedule_out, "Schedule JSON to write")->required();
    sched->add_option("--seed", seed, "Sampling / blinding seed");
    sched->add_option("--size", sizes, "Override tasks per comparison, e.g. octopus_vs_natural=100");

    auto* serve = eval->add_subcommand("serve", "Serve the judgment API");
    std::string schedule_path, log_path, images_dir, static_dir;
    int port = default_port();
    serve->add_option("--schedule", schedule_path, "Schedule JSON")->required();
    serve->add_option("--log", log_path, "Judgment log (JSON lines)")->required();
    serve->add_option("--images", images_dir, "Directory with <id>.png or <id>/rgb.png");
    serve->add_option("--static", static_dir, "Directory with the judgment UI");
    serve->add_option("--port", port, "Port (default $OCTO_PORT or 8089)");

    auto* report = eval->add_subcommand("report", "Summarize judgments per comparison");
    std::string report_out;
    report->add_option("--log", log_path, "Judgment log (JSON lines)")->required();
    report->add_option("--schedule", schedule_path, "Schedule JSON")->required();
    report->add_option("--out", report_out, "Write the CSV here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*place_cmd) return run_place(image_path, object, config_path, trace_path, scene_path);
        if (*sched) return run_schedule(annotations, schedule_out, seed, sizes);
        if (*serve) return run_serve(schedule_path, log_path, images_dir, port, static_dir);
        if (*report) return run_report(log_path, schedule_path, report_out);
    } catch (const IoError& e) {
        std::cerr << "octoplace: " << e.what() << '\n';
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "octoplace: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "octoplace: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
