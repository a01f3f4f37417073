#pragma once

// Pipeline configuration file:
//
//   {
//     "backends": {"default": "fixture:fixtures.json", "complete": "http"},
//     "min_area": 100,
//     "selection_retries": 1,
//     "parallel": true
//   }
//
// Backend specs are `fixture:<path>` (relative to the config file) or `http`
// (endpoint from OCTO_BACKEND_URL_<CAPABILITY>).

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "octoplace/backends.hpp"
#include "octoplace/error.hpp"
#include "octoplace/fixture_backend.hpp"
#include "octoplace/http_backend.hpp"
#include "octoplace/pipeline.hpp"

namespace octoplace {

struct RunConfig {
    PipelineConfig pipeline;
    std::map<Capability, std::string> backend_specs;
    std::filesystem::path base_dir;
};

inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    cfg.base_dir = base_dir;
    try {
        std::string fallback;
        if (j.contains("backends")) {
            const auto& b = j.at("backends");
            if (b.contains("default")) fallback = b.at("default").get<std::string>();
            for (const auto& [key, value] : b.items()) {
                if (key == "default") continue;
                const auto cap = parse_capability(key);
                if (!cap) throw FormatError("unknown capability '" + key + "' in config");
                cfg.backend_specs[*cap] = value.get<std::string>();
            }
        }
        for (auto c : kAllCapabilities)
            if (!cfg.backend_specs.count(c)) cfg.backend_specs[c] = fallback.empty() ? "http" : fallback;
        cfg.pipeline.min_area = j.value("min_area", cfg.pipeline.min_area);
        cfg.pipeline.selection_retries = j.value("selection_retries", cfg.pipeline.selection_retries);
        cfg.pipeline.parallel = j.value("parallel", cfg.pipeline.parallel);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
    if (cfg.pipeline.min_area < 0) throw FormatError("config: min_area must be >= 0");
    if (cfg.pipeline.selection_retries < 0) throw FormatError("config: selection_retries must be >= 0");
    return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    try {
        return parse_run_config(nlohmann::json::parse(in), path.parent_path());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("config " + path.string() + ": " + e.what());
    }
}

/// Instantiates the transports named by the config. Fixture files shared by
/// several capabilities are loaded once.
inline Backends make_backends(const RunConfig& cfg) {
    Backends backends;
    std::map<std::filesystem::path, std::shared_ptr<const FixtureTransport>> fixtures;
    for (const auto& [cap, spec] : cfg.backend_specs) {
        if (spec == "http") {
            backends.route(cap, std::make_shared<HttpTransport>(cap, endpoint_from_env(cap)));
        } else if (spec.rfind("fixture:", 0) == 0) {
            std::filesystem::path p = spec.substr(8);
            if (p.is_relative()) p = cfg.base_dir / p;
            auto& t = fixtures[p];
            if (!t) t = std::make_shared<FixtureTransport>(FixtureStore::load(p));
            backends.route(cap, t);
        } else {
            throw FormatError("backend spec must be 'http' or 'fixture:<path>', got '" + spec + "'");
        }
    }
    return backends;
}

} // namespace octoplace
