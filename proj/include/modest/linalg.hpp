#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "modest/types.hpp"

namespace modest {

/// Solves the dense square system A x = b by Gaussian elimination with
/// partial pivoting. A is row-major n x n. Throws SolverError on a
/// numerically singular matrix.
inline NumVec solve_linear_system(std::vector<NumVec> a, NumVec b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(a[col][col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::abs(a[r][col]);
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best < 1e-300) throw SolverError("solve_linear_system: singular matrix");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        const double inv = 1.0 / a[col][col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] * inv;
            if (f == 0.0) continue;
            a[r][col] = 0.0;
            for (std::size_t c = col + 1; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    NumVec x(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) acc -= a[ri][c] * x[c];
        x[ri] = acc / a[ri][ri];
    }
    return x;
}

}  // namespace modest
