#pragma once

// Remote model adapter: POST /v1/<capability> with {image: base64 PNG, text}.

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <optional>
#include <string>
#include <utility>

#include <openssl/evp.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "octoplace/backends.hpp"
#include "octoplace/error.hpp"
#include "octoplace/image_io.hpp"

namespace octoplace {

inline std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

struct HttpEndpoint {
    std::string base_url;            ///< scheme://host[:port][/prefix]
    std::optional<std::string> token; ///< sent as a bearer token when present
    double timeout_s = 120.0;
    bool require_token = false;
};

inline std::string env_or(const char* name, std::string fallback = {}) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

/// Endpoint settings from OCTO_BACKEND_URL_<CAP>, OCTO_BACKEND_TOKEN_<CAP>
/// and OCTO_BACKEND_TIMEOUT_S. The completion capability always requires a token.
inline HttpEndpoint endpoint_from_env(Capability cap) {
    std::string upper = capability_name(cap);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    HttpEndpoint ep;
    ep.base_url = env_or(("OCTO_BACKEND_URL_" + upper).c_str());
    if (auto t = env_or(("OCTO_BACKEND_TOKEN_" + upper).c_str()); !t.empty()) ep.token = t;
    if (auto t = env_or("OCTO_BACKEND_TIMEOUT_S"); !t.empty()) {
        try {
            ep.timeout_s = std::stod(t);
        } catch (const std::exception&) {
            throw FormatError("OCTO_BACKEND_TIMEOUT_S is not a number: " + t);
        }
    }
    ep.require_token = cap == Capability::complete;
    return ep;
}

class HttpTransport final : public Transport {
public:
    HttpTransport(Capability cap, HttpEndpoint endpoint) : cap_(cap), endpoint_(std::move(endpoint)) {}

    nlohmann::json call(const Request& request) const override {
        const auto name = capability_name(cap_);
        if (endpoint_.base_url.empty()) throw BackendError(name, "no endpoint URL configured");
        if (endpoint_.require_token && !endpoint_.token) throw BackendError(name, "missing credential");

        const auto [host, prefix] = split_url(endpoint_.base_url);
        httplib::Client client(host);
        const auto secs = static_cast<time_t>(endpoint_.timeout_s);
        const auto usecs = static_cast<time_t>((endpoint_.timeout_s - static_cast<double>(secs)) * 1e6);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);
        httplib::Headers headers;
        if (endpoint_.token) headers.emplace("Authorization", "Bearer " + *endpoint_.token);

        nlohmann::json body = nlohmann::json::object();
        if (request.image) body["image"] = base64_encode(encode_png_rgb(*request.image));
        if (!request.text.empty()) body["text"] = request.text;

        auto res = client.Post(prefix + "/v1/" + name, headers, body.dump(), "application/json");
        if (!res) throw BackendError(name, "unreachable: " + httplib::to_string(res.error()));
        if (res->status != 200) throw BackendError(name, "HTTP status " + std::to_string(res->status));
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw ProtocolError(name, std::string("malformed JSON: ") + e.what());
        }
    }

private:
    static std::pair<std::string, std::string> split_url(const std::string& url) {
        const auto scheme = url.find("://");
        const auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
        if (path_start == std::string::npos) return {url, ""};
        std::string prefix = url.substr(path_start);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
        return {url.substr(0, path_start), prefix};
    }

    Capability cap_;
    HttpEndpoint endpoint_;
};

} // namespace octoplace
