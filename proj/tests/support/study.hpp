#pragma once

// Synthetic study data: annotation grids with a chosen number of exclusions
// and judgment logs with chosen win/tie/lose counts.

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "octoplace/evaluation.hpp"

namespace study {

using namespace octoplace;

/// images x objects grid, four records per combination, `exclusions`
/// combinations excluded (chosen by `seed`). Images are 64x48.
inline std::vector<PlacementRecord> make_grid(int images, const std::vector<std::string>& objects, int exclusions,
                                              std::uint64_t seed = 1) {
    const int combos = images * static_cast<int>(objects.size());
    std::vector<int> order(static_cast<std::size_t>(combos));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> excluded(static_cast<std::size_t>(combos), false);
    for (int i = 0; i < exclusions; ++i) excluded[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;

    std::vector<PlacementRecord> records;
    for (int i = 0; i < images; ++i)
        for (std::size_t o = 0; o < objects.size(); ++o) {
            const auto combo = static_cast<std::size_t>(i) * objects.size() + o;
            const std::string id = "img" + std::to_string(i);
            for (auto m : kAllMethods) {
                PlacementRecord r{id, objects[o], m, static_cast<int>(rng() % 64), static_cast<int>(rng() % 48),
                                  excluded[combo]};
                records.push_back(r);
            }
        }
    return records;
}

using Counts = std::tuple<int, int, int>; ///< wins, ties, losses of the first-listed method

/// Counts behind the published bar chart.
inline std::map<Comparison, Counts> figure_counts() {
    return {{Comparison::natural_vs_unnatural, {49, 0, 1}},
            {Comparison::natural_vs_random, {48, 2, 0}},
            {Comparison::octopus_vs_unnatural, {43, 7, 0}},
            {Comparison::octopus_vs_random, {43, 6, 1}},
            {Comparison::octopus_vs_natural, {6, 51, 43}}};
}

/// The side an evaluator must click to produce `outcome` on `task`.
inline Side side_for(const PairTask& task, Outcome outcome) {
    if (outcome == Outcome::tie) return Side::tie;
    const bool first = outcome == Outcome::first_method_wins;
    return first == task.left_is_first_method ? Side::left : Side::right;
}

/// Judges every task once so that each comparison receives `counts`;
/// outcomes are assigned in schedule order (wins, then ties, then losses).
inline std::vector<JudgmentRecord> judge(const std::vector<PairTask>& tasks, const std::map<Comparison, Counts>& counts,
                                         const std::string& evaluator = "e1") {
    std::map<Comparison, int> seen;
    std::vector<JudgmentRecord> out;
    for (const auto& t : tasks) {
        const auto it = counts.find(t.comparison);
        if (it == counts.end()) continue;
        const auto [w, ti, l] = it->second;
        const int k = seen[t.comparison]++;
        Outcome o;
        if (k < w)
            o = Outcome::first_method_wins;
        else if (k < w + ti)
            o = Outcome::tie;
        else if (k < w + ti + l)
            o = Outcome::second_method_wins;
        else
            continue;
        out.push_back(record_judgment(t, side_for(t, o), evaluator, "2024-01-01T00:00:00Z"));
    }
    return out;
}

} // namespace study
