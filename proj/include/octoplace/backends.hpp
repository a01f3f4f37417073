#pragma once

// Capability interfaces for the six external models the pipeline chains,
// the response schemas shared by every adapter, and boundary validation.
//
// Adapters only move bytes: they turn a Request into the capability's JSON
// response object. Decoding and validation happen here, once, so that fixture
// and HTTP adapters reject exactly the same malformed data.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include <nlohmann/json.hpp>

#include "octoplace/error.hpp"
#include "octoplace/scene.hpp"

namespace octoplace {

enum class Capability { segment, caption, tag_pos, answer_yes_no, complete, ground };

inline constexpr std::array<Capability, 6> kAllCapabilities = {
    Capability::segment,       Capability::caption,  Capability::tag_pos,
    Capability::answer_yes_no, Capability::complete, Capability::ground};

inline std::string capability_name(Capability c) {
    switch (c) {
    case Capability::segment: return "segment";
    case Capability::caption: return "caption";
    case Capability::tag_pos: return "tag_pos";
    case Capability::answer_yes_no: return "answer_yes_no";
    case Capability::complete: return "complete";
    case Capability::ground: return "ground";
    }
    return "unknown";
}

inline std::optional<Capability> parse_capability(std::string_view name) {
    for (auto c : kAllCapabilities)
        if (capability_name(c) == name) return c;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Response types

/// Binary region mask with the same dimensions as the segmented image.
class RegionMask {
public:
    RegionMask(int width, int height, std::vector<std::uint8_t> mask)
        : width_(width), height_(height), mask_(std::move(mask)) {
        if (width_ < 1 || height_ < 1 || mask_.size() != static_cast<std::size_t>(width_) * height_)
            throw ContractViolation("mask buffer does not match its dimensions");
        area_ = static_cast<std::size_t>(std::count_if(mask_.begin(), mask_.end(), [](auto v) { return v != 0; }));
        if (area_ == 0) throw ContractViolation("region mask must contain at least one pixel");
    }

    /// Mask whose true pixels are the given (row, col) positions.
    static RegionMask from_pixels(int width, int height, const std::vector<std::pair<int, int>>& rows_cols) {
        std::vector<std::uint8_t> m(static_cast<std::size_t>(width) * height, 0);
        for (auto [r, c] : rows_cols) m.at(static_cast<std::size_t>(r) * width + c) = 1;
        return RegionMask(width, height, std::move(m));
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t area() const noexcept { return area_; }
    bool at(int row, int col) const { return mask_[static_cast<std::size_t>(row) * width_ + col] != 0; }

    /// Run-length encoding "WxH:r0,r1,..." over row-major pixels; runs
    /// alternate starting with a (possibly zero-length) run of false.
    std::string to_rle() const {
        std::string out = std::to_string(width_) + "x" + std::to_string(height_) + ":";
        bool current = false;
        std::size_t run = 0;
        bool first = true;
        auto flush = [&] {
            if (!first) out += ',';
            out += std::to_string(run);
            first = false;
        };
        for (auto v : mask_) {
            if ((v != 0) != current) {
                flush();
                current = !current;
                run = 0;
            }
            ++run;
        }
        flush();
        return out;
    }

    static RegionMask from_rle(std::string_view rle) {
        const auto colon = rle.find(':');
        const auto cross = rle.find('x');
        if (colon == std::string_view::npos || cross == std::string_view::npos || cross > colon)
            throw FormatError("mask RLE must look like WxH:r0,r1,...");
        const int w = parse_int(rle.substr(0, cross));
        const int h = parse_int(rle.substr(cross + 1, colon - cross - 1));
        if (w < 1 || h < 1) throw FormatError("mask RLE dimensions must be positive");
        std::vector<std::uint8_t> m;
        m.reserve(static_cast<std::size_t>(w) * h);
        std::uint8_t value = 0;
        auto rest = rle.substr(colon + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const int run = parse_int(rest.substr(0, comma));
            if (run < 0 || m.size() + static_cast<std::size_t>(run) > static_cast<std::size_t>(w) * h)
                throw FormatError("mask RLE runs overflow the mask");
            m.insert(m.end(), static_cast<std::size_t>(run), value);
            value ^= 1;
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (m.size() != static_cast<std::size_t>(w) * h) throw FormatError("mask RLE runs do not cover the mask");
        try {
            return RegionMask(w, h, std::move(m));
        } catch (const ContractViolation& e) {
            throw FormatError(e.what());
        }
    }

    friend bool operator==(const RegionMask&, const RegionMask&) = default;

private:
    static int parse_int(std::string_view s) {
        if (s.empty() || s.size() > 9) throw FormatError("bad integer in mask RLE");
        int v = 0;
        for (char ch : s) {
            if (ch < '0' || ch > '9') throw FormatError("bad integer in mask RLE");
            v = v * 10 + (ch - '0');
        }
        return v;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> mask_;
    std::size_t area_ = 0;
};

struct PosTaggedToken {
    std::string token;
    std::string tag;

    friend bool operator==(const PosTaggedToken&, const PosTaggedToken&) = default;
};

enum class YesNo { yes, no };

struct YesNoAnswer {
    YesNo answer = YesNo::no;
    double confidence = 1.0;

    friend bool operator==(const YesNoAnswer&, const YesNoAnswer&) = default;
};

/// Per-pixel similarity in [0, 1], row-major.
class Heatmap {
public:
    Heatmap(int width, int height, std::vector<double> values)
        : width_(width), height_(height), values_(std::move(values)) {
        if (width_ < 1 || height_ < 1 || values_.size() != static_cast<std::size_t>(width_) * height_)
            throw ContractViolation("heatmap values do not match its dimensions");
        for (double v : values_)
            if (!(v >= 0.0 && v <= 1.0)) throw ContractViolation("heatmap values must lie in [0, 1]");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    double at(int row, int col) const { return values_[static_cast<std::size_t>(row) * width_ + col]; }
    const std::vector<double>& values() const noexcept { return values_; }

    friend bool operator==(const Heatmap&, const Heatmap&) = default;

private:
    int width_;
    int height_;
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Requests and content digests

struct Request {
    Capability capability;
    const SceneImage* image = nullptr; ///< absent for text-only capabilities
    std::string text;                  ///< empty when absent
};

namespace detail {

inline std::string hex(const unsigned char* p, std::size_t n) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(n * 2, '0');
    for (std::size_t i = 0; i < n; ++i) {
        out[2 * i] = digits[p[i] >> 4];
        out[2 * i + 1] = digits[p[i] & 0xF];
    }
    return out;
}

} // namespace detail

/// SHA-256 over the capability name, the text field and the raw image
/// pixels (with dimensions), each length-framed. Lowercase hex.
inline std::string request_digest(const Request& req) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw Error("internal", "sha256 unavailable");
    auto feed = [&](std::string_view s) { EVP_DigestUpdate(ctx.get(), s.data(), s.size()); };
    const std::string cap = capability_name(req.capability);
    feed("octoplace/1\n");
    feed("capability:" + std::to_string(cap.size()) + ":");
    feed(cap);
    feed("\ntext:" + std::to_string(req.text.size()) + ":");
    feed(req.text);
    if (req.image) {
        feed("\nimage:" + std::to_string(req.image->width()) + "x" + std::to_string(req.image->height()) + ":");
        const auto px = req.image->bytes();
        EVP_DigestUpdate(ctx.get(), px.data(), px.size());
    } else {
        feed("\nimage:none");
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    return detail::hex(md, len);
}

// ---------------------------------------------------------------------------
// Boundary decoding. Every function throws ProtocolError on schema or
// invariant violations.

/// Leading alphabetic token, lowercased, punctuation stripped.
inline YesNo map_yes_no(std::string_view raw) {
    std::size_t i = 0;
    while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
    std::string token;
    for (; i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i])); ++i)
        if (std::isalpha(static_cast<unsigned char>(raw[i])))
            token += static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i])));
    if (token == "yes") return YesNo::yes;
    if (token == "no") return YesNo::no;
    throw ProtocolError("answer_yes_no", "cannot map model output \"" + std::string(raw) + "\" to yes/no");
}

/// Bilinear resample (pixel-center aligned, edge clamped) of a row-major map.
inline std::vector<double> resize_bilinear(const std::vector<double>& src, int src_w, int src_h, int dst_w,
                                           int dst_h) {
    if (src_w == dst_w && src_h == dst_h) return src;
    std::vector<double> out(static_cast<std::size_t>(dst_w) * dst_h);
    const double sx = static_cast<double>(src_w) / dst_w;
    const double sy = static_cast<double>(src_h) / dst_h;
    for (int y = 0; y < dst_h; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(src_h - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, src_h - 1);
        const double wy = fy - y0;
        for (int x = 0; x < dst_w; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(src_w - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, src_w - 1);
            const double wx = fx - x0;
            auto s = [&](int r, int c) { return src[static_cast<std::size_t>(r) * src_w + c]; };
            const double top = s(y0, x0) * (1.0 - wx) + s(y0, x1) * wx;
            const double bottom = s(y1, x0) * (1.0 - wx) + s(y1, x1) * wx;
            out[static_cast<std::size_t>(y) * dst_w + x] = top * (1.0 - wy) + bottom * wy;
        }
    }
    return out;
}

/// Min-max normalization to [0, 1]; a constant map becomes all zeros.
inline void normalize_min_max(std::vector<double>& values) {
    if (values.empty()) return;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double min = *lo;
    const double range = *hi - min;
    for (double& v : values) v = range > 0.0 ? std::clamp((v - min) / range, 0.0, 1.0) : 0.0;
}

namespace decode {

template <class F>
auto guarded(Capability cap, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ProtocolError&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(capability_name(cap), e.what());
    } catch (const FormatError& e) {
        throw ProtocolError(capability_name(cap), e.what());
    } catch (const ContractViolation& e) {
        throw ProtocolError(capability_name(cap), e.what());
    }
}

inline std::vector<RegionMask> segment(const nlohmann::json& j, const SceneImage& image) {
    return guarded(Capability::segment, [&] {
        std::vector<RegionMask> masks;
        for (const auto& s : j.at("masks")) {
            auto m = RegionMask::from_rle(s.get<std::string>());
            if (m.width() != image.width() || m.height() != image.height())
                throw ProtocolError("segment", "mask is " + std::to_string(m.width()) + "x" +
                                                   std::to_string(m.height()) + ", image is " +
                                                   std::to_string(image.width()) + "x" +
                                                   std::to_string(image.height()));
            masks.push_back(std::move(m));
        }
        return masks;
    });
}

inline std::string text(Capability cap, const nlohmann::json& j, bool require_non_empty) {
    return guarded(cap, [&] {
        auto t = j.at("text").get<std::string>();
        if (require_non_empty && t.empty()) throw ProtocolError(capability_name(cap), "empty text");
        return t;
    });
}

inline std::vector<PosTaggedToken> tag_pos(const nlohmann::json& j) {
    return guarded(Capability::tag_pos, [&] {
        std::vector<PosTaggedToken> out;
        for (const auto& pair : j.at("tokens")) {
            if (!pair.is_array() || pair.size() != 2) throw ProtocolError("tag_pos", "token entries are [token, tag]");
            PosTaggedToken t{pair[0].get<std::string>(), pair[1].get<std::string>()};
            if (t.token.empty()) throw ProtocolError("tag_pos", "empty token");
            out.push_back(std::move(t));
        }
        return out;
    });
}

inline YesNoAnswer answer_yes_no(const nlohmann::json& j) {
    return guarded(Capability::answer_yes_no, [&] {
        YesNoAnswer a;
        a.answer = map_yes_no(j.at("answer").get<std::string>());
        if (j.contains("confidence") && !j.at("confidence").is_null()) {
            a.confidence = j.at("confidence").get<double>();
            if (!(a.confidence >= 0.0 && a.confidence <= 1.0))
                throw ProtocolError("answer_yes_no", "confidence outside [0, 1]");
        }
        return a;
    });
}

inline Heatmap ground(const nlohmann::json& j, const SceneImage& image) {
    return guarded(Capability::ground, [&] {
        const auto& h = j.at("heatmap");
        const int w = h.at("w").get<int>();
        const int ht = h.at("h").get<int>();
        if (w < 1 || ht < 1) throw ProtocolError("ground", "heatmap dimensions must be positive");
        std::vector<double> values;
        values.reserve(static_cast<std::size_t>(w) * ht);
        for (const auto& v : h.at("values")) {
            if (!v.is_number()) throw ProtocolError("ground", "heatmap contains a non-number (NaN?)");
            const double d = v.get<double>();
            if (!std::isfinite(d)) throw ProtocolError("ground", "heatmap contains a non-finite value");
            values.push_back(d);
        }
        if (values.size() != static_cast<std::size_t>(w) * ht)
            throw ProtocolError("ground", "heatmap has " + std::to_string(values.size()) + " values for " +
                                              std::to_string(w) + "x" + std::to_string(ht));
        auto resized = resize_bilinear(values, w, ht, image.width(), image.height());
        normalize_min_max(resized);
        return Heatmap(image.width(), image.height(), std::move(resized));
    });
}

} // namespace decode

// ---------------------------------------------------------------------------
// Adapters

/// Transport for one or more capabilities: returns the raw JSON response
/// object for a request, or throws BackendError.
class Transport {
public:
    virtual ~Transport() = default;
    virtual nlohmann::json call(const Request& request) const = 0;
};

/// The six capabilities, each routed to a transport, with boundary
/// validation applied to every response. Thread-safe as long as the
/// transports are.
class Backends {
public:
    Backends() = default;

    /// Routes every capability to the same transport.
    explicit Backends(std::shared_ptr<const Transport> all) {
        for (auto& t : routes_) t = all;
    }

    void route(Capability cap, std::shared_ptr<const Transport> t) { routes_[static_cast<std::size_t>(cap)] = std::move(t); }

    std::vector<RegionMask> segment(const SceneImage& image) const {
        return decode::segment(call({Capability::segment, &image, {}}), image);
    }

    std::string caption(const SceneImage& patch) const {
        return decode::text(Capability::caption, call({Capability::caption, &patch, {}}), true);
    }

    std::vector<PosTaggedToken> tag_pos(const std::string& text) const {
        if (text.empty()) throw ContractViolation("tag_pos requires non-empty text");
        return decode::tag_pos(call({Capability::tag_pos, nullptr, text}));
    }

    YesNoAnswer answer_yes_no(const SceneImage& image, const std::string& question) const {
        if (question.empty()) throw ContractViolation("answer_yes_no requires a question");
        return decode::answer_yes_no(call({Capability::answer_yes_no, &image, question}));
    }

    std::string complete(const std::string& prompt) const {
        if (prompt.empty()) throw ContractViolation("complete requires a prompt");
        return decode::text(Capability::complete, call({Capability::complete, nullptr, prompt}), false);
    }

    Heatmap ground(const SceneImage& image, const std::string& text) const {
        if (text.empty()) throw ContractViolation("ground requires text");
        return decode::ground(call({Capability::ground, &image, text}), image);
    }

private:
    nlohmann::json call(const Request& req) const {
        const auto& t = routes_[static_cast<std::size_t>(req.capability)];
        if (!t) throw BackendError(capability_name(req.capability), "no backend configured");
        return t->call(req);
    }

    std::array<std::shared_ptr<const Transport>, kAllCapabilities.size()> routes_{};
};

} // namespace octoplace
