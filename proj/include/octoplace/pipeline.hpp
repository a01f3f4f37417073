#pragma once

// Placement pipeline: regions -> patches -> captions -> nouns -> verified
// nouns -> LLM-selected noun -> grounded pixel.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <exception>
#include <future>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "octoplace/backends.hpp"
#include "octoplace/error.hpp"
#include "octoplace/scene.hpp"

namespace octoplace {

/// Noun the captioner never mentions reliably; always offered as a candidate.
inline constexpr std::string_view kFloorNoun = "floor";

struct NounCandidate {
    std::string noun;
    std::vector<int> sources; ///< indices into PlacementTrace::captions
    bool verified = false;
    bool injected = false;

    friend bool operator==(const NounCandidate&, const NounCandidate&) = default;
};

struct PipelineConfig {
    int min_area = 100;        ///< regions with fewer mask pixels are dropped
    int selection_retries = 1; ///< extra completions after an unparseable answer
    bool parallel = true;      ///< fan out captioning and VQA
};

/// Ordered stage names used as keys of PlacementTrace::stage_latencies.
inline const std::vector<std::string>& pipeline_stages() {
    static const std::vector<std::string> stages = {"segment", "boxes",  "crop",   "caption",
                                                    "tag_pos", "filter", "select", "ground"};
    return stages;
}

struct PlacementTrace {
    std::string image_id;
    std::string object;
    std::vector<BoundingBox> boxes;
    std::vector<std::string> captions;
    std::vector<NounCandidate> candidates;
    std::string selection_prompt;
    std::vector<std::string> selection_responses;
    bool selection_fallback = false;
    std::string selected_noun;
    Placement2D placement;
    std::map<std::string, double> stage_latencies; ///< seconds
    double total_seconds = 0.0;
};

/// A pipeline run failed; carries the stage and everything computed before it.
class PipelineError : public Error {
public:
    PipelineError(std::string kind, std::string stage, const std::string& what, PlacementTrace trace)
        : Error(std::move(kind), stage + ": " + what), stage_(std::move(stage)), trace_(std::move(trace)) {}

    const std::string& stage() const noexcept { return stage_; }
    const PlacementTrace& trace() const noexcept { return trace_; }

private:
    std::string stage_;
    PlacementTrace trace_;
};

namespace detail {

inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

/// Applies `fn` to every item, optionally on separate threads. Results keep
/// input order; if several calls throw, the lowest-index exception wins.
template <class T, class F>
auto ordered_map(const std::vector<T>& items, F fn, bool parallel) {
    using R = decltype(fn(items.front()));
    std::vector<R> out;
    out.reserve(items.size());
    if (!parallel || items.size() < 2) {
        for (const auto& item : items) out.push_back(fn(item));
        return out;
    }
    std::vector<std::future<R>> futures;
    futures.reserve(items.size());
    for (const auto& item : items) futures.push_back(std::async(std::launch::async, [&fn, &item] { return fn(item); }));
    std::exception_ptr first_error;
    for (auto& f : futures) {
        try {
            out.push_back(f.get());
        } catch (...) {
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

} // namespace detail

/// Tight box per region, in input order; regions with area < min_area are dropped.
inline std::vector<BoundingBox> regions_to_boxes(const std::vector<RegionMask>& regions, int min_area) {
    std::vector<BoundingBox> boxes;
    for (const auto& m : regions) {
        if (static_cast<long long>(m.area()) < min_area) continue;
        BoundingBox b{m.width(), m.height(), 0, 0};
        for (int r = 0; r < m.height(); ++r)
            for (int c = 0; c < m.width(); ++c)
                if (m.at(r, c)) {
                    b.x0 = std::min(b.x0, c);
                    b.y0 = std::min(b.y0, r);
                    b.x1 = std::max(b.x1, c + 1);
                    b.y1 = std::max(b.y1, r + 1);
                }
        boxes.push_back(b);
    }
    return boxes;
}

/// Lowercased tokens tagged NN*, first occurrence only.
inline std::vector<std::string> extract_nouns(std::string_view /*caption*/, const std::vector<PosTaggedToken>& tagged) {
    std::vector<std::string> nouns;
    for (const auto& t : tagged) {
        if (t.tag.rfind("NN", 0) != 0) continue;
        auto noun = detail::ascii_lower(t.token);
        if (std::find(nouns.begin(), nouns.end(), noun) == nouns.end()) nouns.push_back(std::move(noun));
    }
    return nouns;
}

inline std::string build_vqa_question(std::string_view noun) {
    if (noun.empty()) throw ContractViolation("VQA question needs a noun");
    return "Is there a " + std::string(noun) + " in the image?";
}

inline std::string build_selection_prompt(const std::vector<std::string>& nouns, std::string_view object) {
    if (nouns.empty()) throw ContractViolation("selection prompt needs at least one noun");
    if (object.empty()) throw ContractViolation("selection prompt needs an object");
    std::string options;
    for (std::size_t i = 0; i < nouns.size(); ++i) {
        if (i) options += ", ";
        options += nouns[i];
    }
    return "Give a one word response to fill in the blank using only one of these options: {" + options +
           "}. The " + std::string(object) + " was located on the ____.";
}

/// First token of the completion (lowercased, punctuation and articles
/// stripped) that names a candidate noun.
inline std::string parse_selection(std::string_view response, const std::vector<std::string>& nouns) {
    if (nouns.empty()) throw ContractViolation("parse_selection needs candidate nouns");
    const auto lowered = detail::ascii_lower(response);
    std::size_t i = 0;
    while (i < lowered.size()) {
        while (i < lowered.size() && std::isspace(static_cast<unsigned char>(lowered[i]))) ++i;
        std::size_t j = i;
        while (j < lowered.size() && !std::isspace(static_cast<unsigned char>(lowered[j]))) ++j;
        std::string_view token(lowered.data() + i, j - i);
        while (!token.empty() && std::ispunct(static_cast<unsigned char>(token.front()))) token.remove_prefix(1);
        while (!token.empty() && std::ispunct(static_cast<unsigned char>(token.back()))) token.remove_suffix(1);
        i = j;
        if (token.empty() || token == "the" || token == "a" || token == "an") continue;
        if (std::find(nouns.begin(), nouns.end(), token) != nouns.end()) return std::string(token);
    }
    throw SelectionMismatch(std::string(response));
}

struct Brightest {
    int x = 0;
    int y = 0;
    double heat = 0.0;

    friend bool operator==(const Brightest&, const Brightest&) = default;
};

/// Argmax of the heatmap; ties go to the lowest row-major index.
inline Brightest brightest_pixel(const Heatmap& heatmap) {
    const auto& v = heatmap.values();
    const auto it = std::max_element(v.begin(), v.end()); // first maximum
    const auto idx = static_cast<int>(it - v.begin());
    return {idx % heatmap.width(), idx / heatmap.width(), *it};
}

/// Folds duplicate nouns into one candidate (sources merged, flags OR-ed),
/// keeping first-appearance order.
inline std::vector<NounCandidate> merge_candidates(const std::vector<NounCandidate>& nouns) {
    std::vector<NounCandidate> merged;
    for (const auto& c : nouns) {
        auto it = std::find_if(merged.begin(), merged.end(), [&](const auto& m) { return m.noun == c.noun; });
        if (it == merged.end()) {
            merged.push_back(c);
            continue;
        }
        for (int s : c.sources)
            if (std::find(it->sources.begin(), it->sources.end(), s) == it->sources.end()) it->sources.push_back(s);
        it->injected = it->injected || c.injected;
        it->verified = it->verified || c.verified;
    }
    return merged;
}

/// Asks the VQA capability about every distinct noun once. Returns the merged
/// candidate list with `verified` set from the answers.
inline std::vector<NounCandidate> verify_nouns(const SceneImage& image, const std::vector<NounCandidate>& nouns,
                                               const Backends& backends, bool parallel = true) {
    auto merged = merge_candidates(nouns);
    const auto answers = detail::ordered_map(
        merged,
        [&](const NounCandidate& c) {
            try {
                return backends.answer_yes_no(image, build_vqa_question(c.noun));
            } catch (const ProtocolError& e) {
                throw ProtocolError(e.capability(), e.what(), c.noun);
            } catch (const BackendError& e) {
                throw BackendError(e.capability(), e.what(), c.noun);
            }
        },
        parallel);
    for (std::size_t i = 0; i < merged.size(); ++i) merged[i].verified = answers[i].answer == YesNo::yes;
    return merged;
}

/// Candidates the VQA capability confirms, each marked verified.
inline std::vector<NounCandidate> filter_nouns(const SceneImage& image, const std::vector<NounCandidate>& nouns,
                                               const Backends& backends, bool parallel = true) {
    auto all = verify_nouns(image, nouns, backends, parallel);
    std::erase_if(all, [](const NounCandidate& c) { return !c.verified; });
    return all;
}

/// Adds the floor candidate, or flags an existing one as injected.
inline void inject_floor(std::vector<NounCandidate>& candidates) {
    auto it = std::find_if(candidates.begin(), candidates.end(), [](const auto& c) { return c.noun == kFloorNoun; });
    if (it != candidates.end())
        it->injected = true;
    else
        candidates.push_back({std::string(kFloorNoun), {}, false, true});
}

/// Runs the whole 2D placement pipeline for `object` in `image`.
inline PlacementTrace place(const SceneImage& image, const std::string& object, const Backends& backends,
                            const PipelineConfig& config = {}) {
    if (object.empty()) throw ContractViolation("object name must be non-empty");

    using Clock = std::chrono::steady_clock;
    PlacementTrace trace;
    trace.image_id = image.id();
    trace.object = object;

    const auto start = Clock::now();
    auto mark = start;
    std::string stage;
    // Stages are timed back to back so their latencies partition the run.
    auto finish = [&](const std::string& name) {
        const auto now = Clock::now();
        trace.stage_latencies[name] = std::chrono::duration<double>(now - mark).count();
        mark = now;
    };

    try {
        stage = "segment";
        const auto regions = backends.segment(image);
        finish(stage);

        stage = "boxes";
        trace.boxes = regions_to_boxes(regions, config.min_area);
        finish(stage);

        stage = "crop";
        std::vector<SceneImage> patches;
        patches.reserve(trace.boxes.size());
        for (const auto& b : trace.boxes) patches.push_back(crop(image, b));
        finish(stage);

        stage = "caption";
        trace.captions = detail::ordered_map(
            patches, [&](const SceneImage& p) { return backends.caption(p); }, config.parallel);
        finish(stage);

        stage = "tag_pos";
        const auto tagged = detail::ordered_map(
            trace.captions, [&](const std::string& c) { return backends.tag_pos(c); }, config.parallel);
        std::vector<NounCandidate> raw;
        for (std::size_t i = 0; i < trace.captions.size(); ++i)
            for (auto& noun : extract_nouns(trace.captions[i], tagged[i]))
                raw.push_back({std::move(noun), {static_cast<int>(i)}, false, false});
        trace.candidates = merge_candidates(raw);
        inject_floor(trace.candidates);
        finish(stage);

        stage = "filter";
        trace.candidates = verify_nouns(image, trace.candidates, backends, config.parallel);
        std::vector<std::string> verified;
        for (const auto& c : trace.candidates)
            if (c.verified) verified.push_back(c.noun);
        if (verified.empty())
            throw PipelineError("pipeline_empty", stage, "no candidate noun survived verification", trace);
        finish(stage);

        stage = "select";
        trace.selection_prompt = build_selection_prompt(verified, object);
        for (int attempt = 0; attempt <= std::max(0, config.selection_retries) && trace.selected_noun.empty();
             ++attempt) {
            trace.selection_responses.push_back(backends.complete(trace.selection_prompt));
            try {
                trace.selected_noun = parse_selection(trace.selection_responses.back(), verified);
            } catch (const SelectionMismatch&) {
            }
        }
        if (trace.selected_noun.empty()) {
            trace.selection_fallback = true;
            const bool floor_ok = std::find(verified.begin(), verified.end(), kFloorNoun) != verified.end();
            trace.selected_noun = floor_ok ? std::string(kFloorNoun) : verified.front();
        }
        finish(stage);

        stage = "ground";
        const auto heat = backends.ground(image, trace.selected_noun);
        const auto best = brightest_pixel(heat);
        trace.placement = {best.x, best.y, trace.selected_noun, best.heat};
        finish(stage);
    } catch (const PipelineError&) {
        throw;
    } catch (const Error& e) {
        finish(stage);
        trace.total_seconds = std::chrono::duration<double>(mark - start).count();
        throw PipelineError(e.kind(), stage, e.what(), std::move(trace));
    }
    trace.total_seconds = std::chrono::duration<double>(mark - start).count();
    return trace;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json box_to_json(const BoundingBox& b) {
    return {{"x0", b.x0}, {"y0", b.y0}, {"x1", b.x1}, {"y1", b.y1}};
}

inline nlohmann::ordered_json placement_to_json(const Placement2D& p) {
    return {{"x", p.x}, {"y", p.y}, {"noun", p.noun}, {"heat", p.heat}};
}

/// JSON mirror of the trace, keys in declaration order. Latencies are
/// optional so that runs can be compared byte for byte.
inline nlohmann::ordered_json trace_to_json(const PlacementTrace& t, bool include_latencies = true) {
    nlohmann::ordered_json j;
    j["image_id"] = t.image_id;
    j["object"] = t.object;
    j["boxes"] = nlohmann::ordered_json::array();
    for (const auto& b : t.boxes) j["boxes"].push_back(box_to_json(b));
    j["captions"] = t.captions;
    j["candidates"] = nlohmann::ordered_json::array();
    for (const auto& c : t.candidates)
        j["candidates"].push_back(
            {{"noun", c.noun}, {"sources", c.sources}, {"verified", c.verified}, {"injected", c.injected}});
    j["selection_prompt"] = t.selection_prompt;
    j["selection_responses"] = t.selection_responses;
    j["selection_fallback"] = t.selection_fallback;
    j["selected_noun"] = t.selected_noun;
    j["placement"] = placement_to_json(t.placement);
    if (include_latencies) {
        nlohmann::ordered_json lat = nlohmann::ordered_json::object();
        for (const auto& s : pipeline_stages())
            if (auto it = t.stage_latencies.find(s); it != t.stage_latencies.end()) lat[s] = it->second;
        j["stage_latencies"] = std::move(lat);
        j["total_seconds"] = t.total_seconds;
    }
    return j;
}

} // namespace octoplace
