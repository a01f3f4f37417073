#pragma once

// Content-addressed canned responses: digest -> response object, using the
// same response schemas as the HTTP wire format.

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "octoplace/backends.hpp"
#include "octoplace/error.hpp"

namespace octoplace {

class FixtureStore {
public:
    FixtureStore() = default;

    static FixtureStore from_json(const nlohmann::json& j) {
        if (!j.is_object()) throw FormatError("fixture file must hold a JSON object");
        FixtureStore store;
        for (const auto& [digest, response] : j.items()) store.entries_[digest] = response;
        return store;
    }

    static FixtureStore load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open fixture file " + path.string());
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("fixture file " + path.string() + ": " + e.what());
        }
    }

    /// Registers `response` for `request`; returns the digest it is stored under.
    std::string put(const Request& request, nlohmann::json response) {
        auto digest = request_digest(request);
        entries_[digest] = std::move(response);
        return digest;
    }

    const nlohmann::json* find(const std::string& digest) const {
        const auto it = entries_.find(digest);
        return it == entries_.end() ? nullptr : &it->second;
    }

    std::size_t size() const noexcept { return entries_.size(); }

    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [k, v] : entries_) j[k] = v;
        return j;
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw IoError("cannot write fixture file " + path.string());
        out << to_json().dump(2) << '\n';
    }

private:
    std::map<std::string, nlohmann::json> entries_;
};

struct FixtureCall {
    Capability capability;
    std::string digest;
    std::string text;
};

/// Serves responses from an immutable FixtureStore and logs every call.
class FixtureTransport final : public Transport {
public:
    explicit FixtureTransport(std::shared_ptr<const FixtureStore> store) : store_(std::move(store)) {}
    explicit FixtureTransport(FixtureStore store)
        : store_(std::make_shared<const FixtureStore>(std::move(store))) {}

    nlohmann::json call(const Request& request) const override {
        auto digest = request_digest(request);
        {
            std::lock_guard lock(mutex_);
            calls_.push_back({request.capability, digest, request.text});
        }
        const auto* hit = store_->find(digest);
        if (!hit) throw FixtureMiss(capability_name(request.capability), digest);
        return *hit;
    }

    std::vector<FixtureCall> calls() const {
        std::lock_guard lock(mutex_);
        return calls_;
    }

    std::size_t call_count(Capability cap) const {
        std::lock_guard lock(mutex_);
        std::size_t n = 0;
        for (const auto& c : calls_) n += c.capability == cap;
        return n;
    }

private:
    std::shared_ptr<const FixtureStore> store_;
    mutable std::mutex mutex_;
    mutable std::vector<FixtureCall> calls_;
};

} // namespace octoplace
