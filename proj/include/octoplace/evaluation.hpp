#pragma once

// Pairwise preference study: placement records for the four methods,
// exclusion bookkeeping, the blinded comparison schedule, judgments and
// win/tie/lose summaries.

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "octoplace/error.hpp"
#include "octoplace/scene.hpp"

namespace octoplace {

enum class Method { natural, unnatural, random, octopus };

inline constexpr std::array<Method, 4> kAllMethods = {Method::natural, Method::unnatural, Method::random,
                                                      Method::octopus};

inline std::string method_name(Method m) {
    switch (m) {
    case Method::natural: return "natural";
    case Method::unnatural: return "unnatural";
    case Method::random: return "random";
    case Method::octopus: return "octopus";
    }
    return "unknown";
}

inline Method parse_method(std::string_view s) {
    for (auto m : kAllMethods)
        if (method_name(m) == s) return m;
    throw FormatError("unknown placement method '" + std::string(s) + "'");
}

/// The five method duels, first-listed method first. Unnatural vs random is
/// deliberately absent.
enum class Comparison { natural_vs_unnatural, natural_vs_random, octopus_vs_unnatural, octopus_vs_random, octopus_vs_natural };

inline constexpr std::array<Comparison, 5> kAllComparisons = {
    Comparison::natural_vs_unnatural, Comparison::natural_vs_random, Comparison::octopus_vs_unnatural,
    Comparison::octopus_vs_random, Comparison::octopus_vs_natural};

inline std::pair<Method, Method> comparison_methods(Comparison c) {
    switch (c) {
    case Comparison::natural_vs_unnatural: return {Method::natural, Method::unnatural};
    case Comparison::natural_vs_random: return {Method::natural, Method::random};
    case Comparison::octopus_vs_unnatural: return {Method::octopus, Method::unnatural};
    case Comparison::octopus_vs_random: return {Method::octopus, Method::random};
    case Comparison::octopus_vs_natural: return {Method::octopus, Method::natural};
    }
    return {Method::natural, Method::natural};
}

inline std::string comparison_name(Comparison c) {
    const auto [a, b] = comparison_methods(c);
    return method_name(a) + "_vs_" + method_name(b);
}

inline Comparison parse_comparison(std::string_view s) {
    for (auto c : kAllComparisons)
        if (comparison_name(c) == s) return c;
    throw FormatError("unknown comparison '" + std::string(s) + "'");
}

/// The 15 indoor objects used in the study.
inline std::vector<std::string> default_object_list() {
    return {"apple", "cake",  "cup", "plate",    "vase",  "stool",   "painting", "lamp",
            "book",  "bag",   "computer", "pencil", "shoes", "cushion", "cat"};
}

struct PlacementRecord {
    std::string image_id;
    std::string object;
    Method method = Method::natural;
    int x = 0;
    int y = 0;
    bool excluded = false;

    friend bool operator==(const PlacementRecord&, const PlacementRecord&) = default;
};

// ---------------------------------------------------------------------------
// Seeded randomness. mt19937_64 output is fully specified by the standard;
// the helpers below avoid the implementation-defined distributions so
// schedules reproduce across standard libraries.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 seeded_rng(std::uint64_t seed) { return std::mt19937_64(splitmix64(seed)); }

/// Uniform integer in [0, n) by rejection sampling.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    if (n == 0) throw ContractViolation("uniform_index over an empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r;
    do r = rng();
    while (r >= limit);
    return r % n;
}

/// Uniformly random pixel of `image`, fully determined by `seed`.
inline PlacementRecord random_placement(const SceneImage& image, std::uint64_t seed, std::string object = {}) {
    auto rng = seeded_rng(seed);
    const auto idx = uniform_index(rng, static_cast<std::uint64_t>(image.width()) * image.height());
    return {image.id(), std::move(object), Method::random, static_cast<int>(idx % image.width()),
            static_cast<int>(idx / image.width()), false};
}

// ---------------------------------------------------------------------------
// Exclusion bookkeeping

using ImageObject = std::pair<std::string, std::string>;

/// Groups records by (image, object) and checks that every combination has
/// exactly one record per method with a consistent exclusion flag.
inline std::map<ImageObject, std::array<const PlacementRecord*, 4>> index_records(
    const std::vector<PlacementRecord>& records) {
    std::map<ImageObject, std::array<const PlacementRecord*, 4>> grid;
    for (const auto& r : records) {
        auto& slot = grid[{r.image_id, r.object}][static_cast<std::size_t>(r.method)];
        if (slot)
            throw DataError("duplicate " + method_name(r.method) + " record for (" + r.image_id + ", " + r.object + ")");
        slot = &r;
    }
    for (const auto& [key, slots] : grid) {
        for (auto m : kAllMethods)
            if (!slots[static_cast<std::size_t>(m)])
                throw DataError("missing " + method_name(m) + " record for (" + key.first + ", " + key.second + ")");
        const bool excluded = slots[0]->excluded;
        for (const auto* r : slots)
            if (r->excluded != excluded)
                throw DataError("inconsistent exclusion across methods for (" + key.first + ", " + key.second + ")");
    }
    return grid;
}

/// Non-excluded (image, object) combinations, sorted.
inline std::vector<ImageObject> usable_combinations(const std::vector<PlacementRecord>& records) {
    std::vector<ImageObject> out;
    for (const auto& [key, slots] : index_records(records))
        if (!slots[0]->excluded) out.push_back(key);
    return out;
}

/// Usable combination count for each method (identical across methods).
inline std::map<Method, std::size_t> usable_pairs(const std::vector<PlacementRecord>& records) {
    const auto grid = index_records(records);
    std::map<Method, std::size_t> counts;
    for (auto m : kAllMethods) counts[m] = 0;
    for (const auto& [key, slots] : grid)
        for (const auto* r : slots)
            if (!r->excluded) ++counts[r->method];
    return counts;
}

/// Annotations CSV: image_id,object,method,x,y,excluded (header row required).
inline std::vector<PlacementRecord> parse_annotations_csv(std::istream& in) {
    std::vector<PlacementRecord> out;
    std::string line;
    int lineno = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (header) {
            header = false;
            if (f != std::vector<std::string>{"image_id", "object", "method", "x", "y", "excluded"})
                throw FormatError("annotations header must be image_id,object,method,x,y,excluded");
            continue;
        }
        if (f.size() != 6) throw FormatError("annotations line " + std::to_string(lineno) + ": expected 6 fields");
        PlacementRecord r;
        r.image_id = f[0];
        r.object = f[1];
        r.method = parse_method(f[2]);
        auto parse_int = [&](const std::string& s) {
            int v = 0;
            const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || p != s.data() + s.size())
                throw FormatError("annotations line " + std::to_string(lineno) + ": bad integer '" + s + "'");
            return v;
        };
        r.x = parse_int(f[3]);
        r.y = parse_int(f[4]);
        const int ex = parse_int(f[5]);
        if (ex != 0 && ex != 1) throw FormatError("annotations line " + std::to_string(lineno) + ": excluded is 0/1");
        r.excluded = ex == 1;
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<PlacementRecord> load_annotations_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open annotations " + path.string());
    return parse_annotations_csv(in);
}

inline void write_annotations_csv(std::ostream& out, const std::vector<PlacementRecord>& records) {
    out << "image_id,object,method,x,y,excluded\n";
    for (const auto& r : records)
        out << r.image_id << ',' << r.object << ',' << method_name(r.method) << ',' << r.x << ',' << r.y << ','
            << (r.excluded ? 1 : 0) << '\n';
}

// ---------------------------------------------------------------------------
// Schedule

struct ShownPlacement {
    Method method = Method::natural;
    int x = 0;
    int y = 0;

    friend bool operator==(const ShownPlacement&, const ShownPlacement&) = default;
};

struct PairTask {
    std::string task_id;
    Comparison comparison = Comparison::octopus_vs_natural;
    std::string object;
    std::string image_id;
    ShownPlacement left;
    ShownPlacement right;
    bool left_is_first_method = true;

    friend bool operator==(const PairTask&, const PairTask&) = default;
};

/// Tasks per comparison; defaults to 100 for octopus vs natural, 50 otherwise.
inline std::map<Comparison, std::size_t> default_schedule_sizes() {
    std::map<Comparison, std::size_t> sizes;
    for (auto c : kAllComparisons) sizes[c] = c == Comparison::octopus_vs_natural ? 100 : 50;
    return sizes;
}

/// Samples usable combinations without replacement for each comparison and
/// randomizes left/right. The combined task list is shuffled so that task
/// order and ids reveal nothing about the comparison.
inline std::vector<PairTask> build_schedule(const std::vector<PlacementRecord>& records,
                                            const std::map<Comparison, std::size_t>& sizes, std::uint64_t seed) {
    const auto grid = index_records(records);
    std::vector<ImageObject> usable;
    for (const auto& [key, slots] : grid)
        if (!slots[0]->excluded) usable.push_back(key);

    auto rng = seeded_rng(seed);
    std::vector<PairTask> tasks;
    for (auto c : kAllComparisons) {
        const auto it = sizes.find(c);
        const std::size_t n = it == sizes.end() ? 0 : it->second;
        if (n > usable.size())
            throw ContractViolation("requested " + std::to_string(n) + " " + comparison_name(c) + " tasks but only " +
                                    std::to_string(usable.size()) + " usable pairs exist");
        std::vector<std::size_t> order(usable.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        const auto [first, second] = comparison_methods(c);
        for (std::size_t k = 0; k < n; ++k) {
            std::swap(order[k], order[k + uniform_index(rng, order.size() - k)]);
            const auto& key = usable[order[k]];
            const auto& slots = grid.at(key);
            const auto* a = slots[static_cast<std::size_t>(first)];
            const auto* b = slots[static_cast<std::size_t>(second)];
            PairTask t;
            t.comparison = c;
            t.image_id = key.first;
            t.object = key.second;
            t.left_is_first_method = uniform_index(rng, 2) == 0;
            const ShownPlacement pa{a->method, a->x, a->y};
            const ShownPlacement pb{b->method, b->x, b->y};
            t.left = t.left_is_first_method ? pa : pb;
            t.right = t.left_is_first_method ? pb : pa;
            tasks.push_back(std::move(t));
        }
    }
    for (std::size_t i = tasks.size(); i > 1; --i) std::swap(tasks[i - 1], tasks[uniform_index(rng, i)]);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        std::string id = std::to_string(i + 1);
        tasks[i].task_id = "t" + std::string(id.size() < 4 ? 4 - id.size() : 0, '0') + id;
    }
    return tasks;
}

inline nlohmann::ordered_json task_to_json(const PairTask& t) {
    auto shown = [](const ShownPlacement& p) {
        return nlohmann::ordered_json{{"method", method_name(p.method)}, {"x", p.x}, {"y", p.y}};
    };
    return {{"task_id", t.task_id},       {"comparison", comparison_name(t.comparison)},
            {"object", t.object},         {"image_id", t.image_id},
            {"left", shown(t.left)},      {"right", shown(t.right)},
            {"left_is_first_method", t.left_is_first_method}};
}

inline PairTask task_from_json(const nlohmann::json& j) {
    try {
        auto shown = [](const nlohmann::json& s) {
            return ShownPlacement{parse_method(s.at("method").get<std::string>()), s.at("x").get<int>(),
                                  s.at("y").get<int>()};
        };
        PairTask t;
        t.task_id = j.at("task_id").get<std::string>();
        t.comparison = parse_comparison(j.at("comparison").get<std::string>());
        t.object = j.at("object").get<std::string>();
        t.image_id = j.at("image_id").get<std::string>();
        t.left = shown(j.at("left"));
        t.right = shown(j.at("right"));
        t.left_is_first_method = j.at("left_is_first_method").get<bool>();
        const auto [first, second] = comparison_methods(t.comparison);
        const auto expect_left = t.left_is_first_method ? first : second;
        const auto expect_right = t.left_is_first_method ? second : first;
        if (t.left.method != expect_left || t.right.method != expect_right)
            throw FormatError("task " + t.task_id + ": left/right methods do not match its comparison");
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("schedule task: ") + e.what());
    }
}

inline nlohmann::ordered_json schedule_to_json(const std::vector<PairTask>& tasks) {
    nlohmann::ordered_json j;
    j["tasks"] = nlohmann::ordered_json::array();
    for (const auto& t : tasks) j["tasks"].push_back(task_to_json(t));
    return j;
}

inline std::vector<PairTask> schedule_from_json(const nlohmann::json& j) {
    std::vector<PairTask> tasks;
    std::set<std::string> ids;
    try {
        for (const auto& t : j.at("tasks")) {
            tasks.push_back(task_from_json(t));
            if (!ids.insert(tasks.back().task_id).second)
                throw FormatError("duplicate task id " + tasks.back().task_id);
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("schedule: ") + e.what());
    }
    return tasks;
}

inline void save_schedule(const std::filesystem::path& path, const std::vector<PairTask>& tasks) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write schedule " + path.string());
    out << schedule_to_json(tasks).dump(2) << '\n';
}

inline std::vector<PairTask> load_schedule(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open schedule " + path.string());
    try {
        return schedule_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("schedule " + path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Judgments

enum class Side { left, right, tie };
enum class Outcome { first_method_wins, second_method_wins, tie };

inline std::string side_name(Side s) { return s == Side::left ? "left" : s == Side::right ? "right" : "tie"; }

inline Side parse_side(std::string_view s) {
    if (s == "left") return Side::left;
    if (s == "right") return Side::right;
    if (s == "tie") return Side::tie;
    throw FormatError("side must be left, right or tie");
}

inline std::string outcome_name(Outcome o) {
    switch (o) {
    case Outcome::first_method_wins: return "first_method_wins";
    case Outcome::second_method_wins: return "second_method_wins";
    case Outcome::tie: return "tie";
    }
    return "unknown";
}

inline Outcome parse_outcome(std::string_view s) {
    for (auto o : {Outcome::first_method_wins, Outcome::second_method_wins, Outcome::tie})
        if (outcome_name(o) == s) return o;
    throw FormatError("unknown outcome '" + std::string(s) + "'");
}

struct JudgmentRecord {
    std::string task_id;
    Outcome outcome = Outcome::tie;
    std::string evaluator;
    std::string timestamp; ///< ISO 8601, UTC

    friend bool operator==(const JudgmentRecord&, const JudgmentRecord&) = default;
};

/// Maps a left/right verdict back onto the comparison's method order.
inline Outcome unblind(const PairTask& task, Side side) {
    if (side == Side::tie) return Outcome::tie;
    const bool chose_first = (side == Side::left) == task.left_is_first_method;
    return chose_first ? Outcome::first_method_wins : Outcome::second_method_wins;
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point tp = std::chrono::system_clock::now()) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline JudgmentRecord record_judgment(const PairTask& task, Side side, std::string evaluator,
                                      std::string timestamp = utc_timestamp()) {
    if (evaluator.empty()) throw ContractViolation("evaluator id must be non-empty");
    return {task.task_id, unblind(task, side), std::move(evaluator), std::move(timestamp)};
}

inline std::string judgment_to_line(const JudgmentRecord& r) {
    return nlohmann::ordered_json{{"task_id", r.task_id},
                                  {"outcome", outcome_name(r.outcome)},
                                  {"evaluator", r.evaluator},
                                  {"timestamp", r.timestamp}}
        .dump();
}

inline JudgmentRecord judgment_from_line(std::string_view line) {
    try {
        const auto j = nlohmann::json::parse(line);
        return {j.at("task_id").get<std::string>(), parse_outcome(j.at("outcome").get<std::string>()),
                j.at("evaluator").get<std::string>(), j.at("timestamp").get<std::string>()};
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("judgment log line: ") + e.what());
    }
}

inline std::vector<JudgmentRecord> load_judgment_log(const std::filesystem::path& path) {
    std::vector<JudgmentRecord> out;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open judgment log " + path.string());
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(judgment_from_line(line));
    return out;
}

/// Append-only judgment store, one JSON line per record. A record is fsync'ed
/// to the log before record() returns. Safe for concurrent writers.
class JudgmentLog {
public:
    /// In-memory only.
    JudgmentLog() = default;

    /// Opens (creating if needed) the log and replays any existing records.
    explicit JudgmentLog(std::filesystem::path path) : path_(std::move(path)) {
        if (std::filesystem::exists(*path_))
            for (auto& r : load_judgment_log(*path_)) {
                seen_.insert({r.task_id, r.evaluator});
                records_.push_back(std::move(r));
            }
        fd_ = ::open(path_->c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
        if (fd_ < 0) throw IoError("cannot open judgment log " + path_->string() + " for append");
    }

    ~JudgmentLog() {
        if (fd_ >= 0) ::close(fd_);
    }
    JudgmentLog(const JudgmentLog&) = delete;
    JudgmentLog& operator=(const JudgmentLog&) = delete;

    bool judged(const std::string& task_id, const std::string& evaluator) const {
        std::lock_guard lock(mutex_);
        return seen_.count({task_id, evaluator}) > 0;
    }

    JudgmentRecord record(const PairTask& task, Side side, const std::string& evaluator,
                          std::string timestamp = utc_timestamp()) {
        auto rec = record_judgment(task, side, evaluator, std::move(timestamp));
        std::lock_guard lock(mutex_);
        if (seen_.count({rec.task_id, rec.evaluator}))
            throw ConflictError("task " + rec.task_id + " already judged by " + rec.evaluator);
        if (fd_ >= 0) {
            const std::string line = judgment_to_line(rec) + "\n";
            std::size_t off = 0;
            while (off < line.size()) {
                const auto n = ::write(fd_, line.data() + off, line.size() - off);
                if (n < 0) throw IoError("write to judgment log failed");
                off += static_cast<std::size_t>(n);
            }
            if (::fsync(fd_) != 0) throw IoError("fsync of judgment log failed");
        }
        seen_.insert({rec.task_id, rec.evaluator});
        records_.push_back(rec);
        return rec;
    }

    std::vector<JudgmentRecord> snapshot() const {
        std::lock_guard lock(mutex_);
        return records_;
    }

private:
    std::optional<std::filesystem::path> path_;
    int fd_ = -1;
    mutable std::mutex mutex_;
    std::set<std::pair<std::string, std::string>> seen_;
    std::vector<JudgmentRecord> records_;
};

// ---------------------------------------------------------------------------
// Summaries

struct ComparisonSummary {
    Comparison comparison = Comparison::octopus_vs_natural;
    std::size_t n = 0;
    std::size_t wins = 0;
    std::size_t ties = 0;
    std::size_t losses = 0;
    double win = 0.0; ///< proportions of the first-listed method
    double tie = 0.0;
    double lose = 0.0;
};

inline ComparisonSummary summarize(const std::vector<Outcome>& outcomes, Comparison comparison) {
    if (outcomes.empty()) throw EmptyComparisonError("no judgments for " + comparison_name(comparison));
    ComparisonSummary s;
    s.comparison = comparison;
    s.n = outcomes.size();
    for (auto o : outcomes) {
        s.wins += o == Outcome::first_method_wins;
        s.ties += o == Outcome::tie;
        s.losses += o == Outcome::second_method_wins;
    }
    const auto n = static_cast<double>(s.n);
    s.win = static_cast<double>(s.wins) / n;
    s.tie = static_cast<double>(s.ties) / n;
    s.lose = static_cast<double>(s.losses) / n;
    return s;
}

/// Outcomes of `comparison`'s tasks, pooled over all evaluators.
inline std::vector<Outcome> outcomes_for(const std::vector<JudgmentRecord>& judgments,
                                         const std::vector<PairTask>& tasks, Comparison comparison) {
    std::map<std::string, Comparison> by_id;
    for (const auto& t : tasks) by_id[t.task_id] = t.comparison;
    std::vector<Outcome> out;
    for (const auto& j : judgments) {
        const auto it = by_id.find(j.task_id);
        if (it == by_id.end()) throw DataError("judgment refers to unknown task " + j.task_id);
        if (it->second == comparison) out.push_back(j.outcome);
    }
    return out;
}

inline ComparisonSummary summarize(const std::vector<JudgmentRecord>& judgments, const std::vector<PairTask>& tasks,
                                   Comparison comparison) {
    return summarize(outcomes_for(judgments, tasks, comparison), comparison);
}

/// Share of duels where the first-listed method won or tied.
inline double at_least_as_natural(const ComparisonSummary& s) {
    if (s.n > 0 && s.wins + s.ties + s.losses == s.n)
        return static_cast<double>(s.wins + s.ties) / static_cast<double>(s.n);
    return s.win + s.tie;
}

/// Shortest decimal that round-trips the double.
inline std::string format_number(double v) {
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

struct Report {
    std::vector<std::optional<ComparisonSummary>> rows; ///< one per kAllComparisons entry
    std::optional<double> octopus_at_least_as_natural;
};

inline Report build_report(const std::vector<JudgmentRecord>& judgments, const std::vector<PairTask>& tasks) {
    Report r;
    for (auto c : kAllComparisons) {
        const auto outcomes = outcomes_for(judgments, tasks, c);
        if (outcomes.empty()) {
            r.rows.emplace_back();
            continue;
        }
        r.rows.emplace_back(summarize(outcomes, c));
        if (c == Comparison::octopus_vs_natural) r.octopus_at_least_as_natural = at_least_as_natural(*r.rows.back());
    }
    return r;
}

/// CSV `comparison,n,win,tie,lose`; comparisons without judgments get n=0 and
/// blank proportions.
inline std::string report_csv(const Report& report) {
    std::string out = "comparison,n,win,tie,lose\n";
    for (std::size_t i = 0; i < kAllComparisons.size(); ++i) {
        out += comparison_name(kAllComparisons[i]) + ",";
        const auto& row = report.rows[i];
        if (!row) {
            out += "0,,,\n";
            continue;
        }
        out += std::to_string(row->n) + "," + format_number(row->win) + "," + format_number(row->tie) + "," +
               format_number(row->lose) + "\n";
    }
    return out;
}

inline nlohmann::ordered_json report_json(const Report& report) {
    nlohmann::ordered_json j;
    j["comparisons"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < kAllComparisons.size(); ++i) {
        const auto& row = report.rows[i];
        nlohmann::ordered_json r{{"comparison", comparison_name(kAllComparisons[i])}, {"n", row ? row->n : 0}};
        if (row) {
            r["win"] = row->win;
            r["tie"] = row->tie;
            r["lose"] = row->lose;
        }
        j["comparisons"].push_back(std::move(r));
    }
    j["octopus_at_least_as_natural"] =
        report.octopus_at_least_as_natural ? nlohmann::ordered_json(*report.octopus_at_least_as_natural) : nlohmann::ordered_json(nullptr);
    return j;
}

} // namespace octoplace
