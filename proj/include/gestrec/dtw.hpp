#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gestrec/errors.hpp"
#include "gestrec/hmm.hpp"
#include "gestrec/quantizer.hpp"

namespace gestrec {

// Local cost between two symbols: Euclidean distance between their basis
// vectors on the grid (respects directional geometry), or a plain 0/1
// mismatch cost.
enum class DtwLocalCost { grid_euclidean, zero_one };

// Cumulative dynamic-time-warping distance with steps (i-1,j), (i,j-1),
// (i-1,j-1) and no path normalization. Symmetric; zero exactly when the two
// sequences are equal up to consecutive-duplicate expansion.
inline double dtw_distance(const ObsSeq& a, const ObsSeq& b, const QuantizerGrid& grid,
                           DtwLocalCost cost_kind = DtwLocalCost::grid_euclidean) {
    if (a.alphabet_size() != static_cast<int>(grid.size()) ||
        b.alphabet_size() != static_cast<int>(grid.size()))
        throw DimensionError("sequence alphabet does not match quantizer grid");
    const auto& sa = a.symbols();
    const auto& sb = b.symbols();
    const std::size_t n = sa.size();
    const std::size_t m = sb.size();

    auto local = [&](std::size_t i, std::size_t j) {
        if (cost_kind == DtwLocalCost::zero_one) return sa[i] == sb[j] ? 0.0 : 1.0;
        return distance(grid.basis_for(sa[i]), grid.basis_for(sb[j]));
    };

    // Two-row DP over the n x m cumulative-cost table.
    std::vector<double> prev(m), cur(m);
    prev[0] = local(0, 0);
    for (std::size_t j = 1; j < m; ++j) prev[j] = prev[j - 1] + local(0, j);
    for (std::size_t i = 1; i < n; ++i) {
        cur[0] = prev[0] + local(i, 0);
        for (std::size_t j = 1; j < m; ++j)
            cur[j] = local(i, j) + std::min(prev[j], std::min(cur[j - 1], prev[j - 1]));
        prev.swap(cur);
    }
    return prev[m - 1];
}

// Labeled training sequences for the 1-nearest-neighbor baseline.
struct DtwTemplateSet {
    std::vector<std::pair<std::string, ObsSeq>> templates;
    QuantizerGrid grid;
    DtwLocalCost cost_kind = DtwLocalCost::grid_euclidean;
};

// Label of the template with minimal warped distance; ties go to the
// earliest template.
inline std::pair<std::string, double> dtw_classify(const DtwTemplateSet& ts, const ObsSeq& y) {
    if (ts.templates.empty()) throw DataError("empty template set");
    std::size_t best = 0;
    double best_dist = dtw_distance(ts.templates[0].second, y, ts.grid, ts.cost_kind);
    for (std::size_t i = 1; i < ts.templates.size(); ++i) {
        const double d = dtw_distance(ts.templates[i].second, y, ts.grid, ts.cost_kind);
        if (d < best_dist) {
            best = i;
            best_dist = d;
        }
    }
    return {ts.templates[best].first, best_dist};
}

}  // namespace gestrec
