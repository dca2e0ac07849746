#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "modest/types.hpp"

namespace modest {

struct ErrorPoint {
    std::uint64_t step = 0;
    double error_avg = 0.0;
    double error_max = 0.0;
};

using ErrorCurve = std::vector<ErrorPoint>;

/// Geometric checkpoint grid: `points` values from min(100, n) to n,
/// deduplicated and ascending. n itself is always included.
inline std::vector<std::uint64_t> checkpoint_grid(std::uint64_t n, std::size_t points = 40) {
    std::vector<std::uint64_t> grid;
    if (n == 0) return grid;
    const double lo = static_cast<double>(std::min<std::uint64_t>(100, n));
    const double hi = static_cast<double>(n);
    for (std::size_t j = 0; j < points; ++j) {
        const double frac = points <= 1 ? 1.0 : static_cast<double>(j) / (points - 1);
        const double value = lo * std::pow(hi / lo, frac);
        grid.push_back(static_cast<std::uint64_t>(std::llround(value)));
    }
    grid.push_back(n);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    while (!grid.empty() && grid.front() == 0) grid.erase(grid.begin());
    return grid;
}

}  // namespace modest
