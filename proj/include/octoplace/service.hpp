#pragma once

// Judgment study service. Task payloads are blinded: method identities stay
// on the server and only pixel positions are sent to evaluators.
//
//   GET  /api/task/next?evaluator=ID  -> {task_id, object, left, right, remaining}
//   POST /api/judgment                 {task_id, evaluator, side} -> {status}
//   GET  /api/report                   -> summaries
//   GET  /api/image/{id}               -> PNG

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "octoplace/error.hpp"
#include "octoplace/evaluation.hpp"
#include "octoplace/image_io.hpp"

namespace octoplace {

struct ApiResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

class JudgmentService {
public:
    /// `images_dir` holds `<id>.png` or `<id>/rgb.png` per image id.
    JudgmentService(std::vector<PairTask> schedule, std::shared_ptr<JudgmentLog> log,
                    std::filesystem::path images_dir = {})
        : schedule_(std::move(schedule)), log_(std::move(log)), images_dir_(std::move(images_dir)) {
        for (std::size_t i = 0; i < schedule_.size(); ++i) index_[schedule_[i].task_id] = i;
    }

    const std::vector<PairTask>& schedule() const noexcept { return schedule_; }

    /// Blinded payload for the evaluator's next unjudged task.
    nlohmann::ordered_json next_task(const std::string& evaluator) {
        if (evaluator.empty()) throw ContractViolation("evaluator query parameter is required");
        std::lock_guard lock(mutex_);
        auto& cursor = cursors_[evaluator];
        while (cursor < schedule_.size() && log_->judged(schedule_[cursor].task_id, evaluator)) ++cursor;
        std::size_t remaining = 0;
        for (std::size_t i = cursor; i < schedule_.size(); ++i)
            remaining += !log_->judged(schedule_[i].task_id, evaluator);
        if (cursor == schedule_.size()) return {{"task_id", nullptr}, {"remaining", 0}};
        const auto& t = schedule_[cursor];
        const std::string url = "/api/image/" + t.image_id;
        return {{"task_id", t.task_id},
                {"object", t.object},
                {"left", {{"image_url", url}, {"x", t.left.x}, {"y", t.left.y}}},
                {"right", {{"image_url", url}, {"x", t.right.x}, {"y", t.right.y}}},
                {"remaining", remaining}};
    }

    JudgmentRecord submit(const std::string& task_id, const std::string& evaluator, Side side) {
        const auto it = index_.find(task_id);
        if (it == index_.end()) throw DataError("unknown task " + task_id);
        return log_->record(schedule_[it->second], side, evaluator);
    }

    Report report() const { return build_report(log_->snapshot(), schedule_); }

    std::optional<std::filesystem::path> image_path(const std::string& id) const {
        if (images_dir_.empty() || id.empty() || id.find('/') != std::string::npos || id.find("..") != std::string::npos)
            return std::nullopt;
        for (auto p : {images_dir_ / (id + ".png"), images_dir_ / id / "rgb.png"})
            if (std::filesystem::is_regular_file(p)) return p;
        return std::nullopt;
    }

    // HTTP-agnostic handlers ------------------------------------------------

    ApiResponse handle_next(const std::string& evaluator) {
        if (evaluator.empty()) return error(400, "evaluator query parameter is required");
        return {200, next_task(evaluator).dump()};
    }

    ApiResponse handle_judgment(const std::string& body) {
        std::string task_id, evaluator;
        Side side;
        try {
            const auto j = nlohmann::json::parse(body);
            task_id = j.at("task_id").get<std::string>();
            evaluator = j.at("evaluator").get<std::string>();
            side = parse_side(j.at("side").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            return error(400, std::string("malformed judgment: ") + e.what());
        } catch (const FormatError& e) {
            return error(400, e.what());
        }
        if (evaluator.empty()) return error(400, "evaluator must be non-empty");
        try {
            submit(task_id, evaluator, side);
        } catch (const ConflictError& e) {
            return error(409, e.what());
        } catch (const DataError& e) {
            return error(404, e.what());
        } catch (const IoError& e) {
            return error(500, e.what());
        }
        return {200, nlohmann::json{{"status", "ok"}}.dump()};
    }

    ApiResponse handle_report() const { return {200, report_json(report()).dump()}; }

    ApiResponse handle_image(const std::string& id) const {
        const auto p = image_path(id);
        if (!p) return error(404, "no image " + id);
        const auto bytes = detail::read_file_bytes(*p);
        return {200, std::string(bytes.begin(), bytes.end()), "image/png"};
    }

    static ApiResponse error(int status, const std::string& message) {
        return {status, nlohmann::json{{"status", "error"}, {"error", message}}.dump()};
    }

private:
    std::vector<PairTask> schedule_;
    std::map<std::string, std::size_t> index_;
    std::shared_ptr<JudgmentLog> log_;
    std::filesystem::path images_dir_;
    std::mutex mutex_;
    std::map<std::string, std::size_t> cursors_;
};

/// Wires the service onto an httplib server; `static_dir`, when given, is
/// mounted at / for the browser UI.
inline void register_routes(httplib::Server& server, JudgmentService& service,
                            const std::filesystem::path& static_dir = {}) {
    // SO_REUSEADDR only, so a second server on a busy port fails to bind.
    server.set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
    });
    auto send = [](httplib::Response& res, const ApiResponse& r) {
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    server.Get("/api/task/next", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.handle_next(req.has_param("evaluator") ? req.get_param_value("evaluator") : ""));
    });
    server.Post("/api/judgment", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.handle_judgment(req.body));
    });
    server.Get("/api/report", [&service, send](const httplib::Request&, httplib::Response& res) {
        send(res, service.handle_report());
    });
    server.Get(R"(/api/image/([^/]+))", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.handle_image(req.matches[1]));
    });
    if (!static_dir.empty()) server.set_mount_point("/", static_dir.string());
}

} // namespace octoplace
