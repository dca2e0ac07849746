#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <vector>

#include "modest/mdp.hpp"
#include "modest/types.hpp"

namespace modest {

/// Dense LP in the form
///   minimize c.x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= lower.
struct LinearProgram {
    std::size_t num_vars = 0;
    NumVec c;
    std::vector<NumVec> a_eq;
    NumVec b_eq;
    std::vector<NumVec> a_ub;
    NumVec b_ub;
    NumVec lower;  // defaults to zero when empty

    void dump(std::ostream& out) const {
        out << "min";
        for (std::size_t j = 0; j < num_vars; ++j) out << ' ' << c[j] << " x" << j;
        out << '\n';
        for (std::size_t i = 0; i < a_eq.size(); ++i) {
            out << "eq:";
            for (std::size_t j = 0; j < num_vars; ++j)
                if (a_eq[i][j] != 0.0) out << ' ' << a_eq[i][j] << " x" << j;
            out << " = " << b_eq[i] << '\n';
        }
        for (std::size_t i = 0; i < a_ub.size(); ++i) {
            out << "ub:";
            for (std::size_t j = 0; j < num_vars; ++j)
                if (a_ub[i][j] != 0.0) out << ' ' << a_ub[i][j] << " x" << j;
            out << " <= " << b_ub[i] << '\n';
        }
        for (std::size_t j = 0; j < num_vars; ++j)
            if (!lower.empty() && lower[j] != 0.0) out << "bound: x" << j << " >= " << lower[j] << '\n';
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* lp_status_name(LpStatus status) {
    switch (status) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        case LpStatus::IterationLimit: return "iteration-limit";
    }
    return "unknown";
}

/// Bland's rule is cycle-free; the hybrid rule uses Dantzig pricing and
/// falls back to Bland after a stretch of degenerate pivots. Both are
/// deterministic.
enum class PivotRule { Bland, DantzigWithBlandFallback };

struct LpSolution {
    NumVec x;
    double objective = 0.0;
    LpStatus status = LpStatus::Optimal;
    std::size_t iterations = 0;
};

namespace detail {

class SimplexTableau {
  public:
    SimplexTableau(const LinearProgram& lp, PivotRule rule) : rule_(rule) {
        const std::size_t n = lp.num_vars;
        lower_ = lp.lower.empty() ? NumVec(n, 0.0) : lp.lower;
        num_structural_ = n;
        num_slack_ = lp.a_ub.size();
        const std::size_t m = lp.a_eq.size() + lp.a_ub.size();

        // Shift x = lower + y and materialize rows with nonnegative rhs.
        struct RawRow {
            NumVec a;
            double b;
            bool is_eq;
            std::size_t slack;  // slack column offset for ub rows
        };
        std::vector<RawRow> raw;
        raw.reserve(m);
        for (std::size_t i = 0; i < lp.a_eq.size(); ++i) {
            double b = lp.b_eq[i];
            for (std::size_t j = 0; j < n; ++j) b -= lp.a_eq[i][j] * lower_[j];
            raw.push_back({lp.a_eq[i], b, true, SIZE_MAX});
        }
        for (std::size_t i = 0; i < lp.a_ub.size(); ++i) {
            double b = lp.b_ub[i];
            for (std::size_t j = 0; j < n; ++j) b -= lp.a_ub[i][j] * lower_[j];
            raw.push_back({lp.a_ub[i], b, false, i});
        }

        // One artificial per equality row and per ub row whose slack cannot
        // start basic (negative rhs).
        std::size_t num_art = 0;
        for (const auto& row : raw)
            if (row.is_eq || row.b < 0.0) ++num_art;
        art_begin_ = num_structural_ + num_slack_;
        width_ = art_begin_ + num_art + 1;  // + rhs column
        rows_.assign(raw.size(), NumVec(width_, 0.0));
        basis_.assign(raw.size(), SIZE_MAX);

        std::size_t next_art = art_begin_;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            auto& row = rows_[i];
            double sign = 1.0;
            if (raw[i].b < 0.0) sign = -1.0;
            for (std::size_t j = 0; j < n; ++j) row[j] = sign * raw[i].a[j];
            if (!raw[i].is_eq) row[num_structural_ + raw[i].slack] = sign;
            row[width_ - 1] = sign * raw[i].b;
            if (raw[i].is_eq || sign < 0.0) {
                row[next_art] = 1.0;
                basis_[i] = next_art++;
            } else {
                basis_[i] = num_structural_ + raw[i].slack;
            }
        }
    }

    LpSolution solve(const LinearProgram& lp, std::size_t max_iterations) {
        LpSolution result;

        // Phase 1: minimize the sum of artificials.
        obj_.assign(width_, 0.0);
        for (std::size_t j = art_begin_; j + 1 < width_; ++j) obj_[j] = 1.0;
        price_out();
        const LpStatus phase1 = iterate(max_iterations, /*allow_artificials=*/true);
        result.iterations = iterations_;
        if (phase1 == LpStatus::IterationLimit) {
            result.status = phase1;
            return result;
        }
        if (-obj_[width_ - 1] > 1e-7) {
            result.status = LpStatus::Infeasible;
            return result;
        }
        purge_artificials();

        // Phase 2: original objective over the feasible tableau.
        obj_.assign(width_, 0.0);
        for (std::size_t j = 0; j < num_structural_; ++j) obj_[j] = lp.c[j];
        price_out();
        const LpStatus phase2 = iterate(max_iterations, /*allow_artificials=*/false);
        result.iterations = iterations_;
        if (phase2 != LpStatus::Optimal) {
            result.status = phase2;
            return result;
        }

        result.x.assign(num_structural_, 0.0);
        for (std::size_t i = 0; i < rows_.size(); ++i)
            if (basis_[i] < num_structural_) result.x[basis_[i]] = rows_[i][width_ - 1];
        double objective = 0.0;
        for (std::size_t j = 0; j < num_structural_; ++j) {
            result.x[j] += lower_[j];
            objective += lp.c[j] * result.x[j];
        }
        result.objective = objective;
        result.status = LpStatus::Optimal;
        return result;
    }

  private:
    static constexpr double kReducedCostTol = 1e-9;
    static constexpr double kPivotTol = 1e-9;

    /// Rewrites the objective row in terms of the current basis.
    void price_out() {
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const double cost = obj_[basis_[i]];
            if (cost == 0.0) continue;
            const auto& row = rows_[i];
            for (std::size_t j = 0; j < width_; ++j) obj_[j] -= cost * row[j];
        }
    }

    LpStatus iterate(std::size_t max_iterations, bool allow_artificials) {
        const std::size_t limit = art_begin_ + (allow_artificials ? num_artificials() : 0);
        std::size_t degenerate_streak = 0;
        bool bland_mode = rule_ == PivotRule::Bland;
        while (true) {
            if (iterations_ >= max_iterations) return LpStatus::IterationLimit;

            // Entering column.
            std::size_t enter = SIZE_MAX;
            if (bland_mode) {
                for (std::size_t j = 0; j < limit; ++j) {
                    if (obj_[j] < -kReducedCostTol) {
                        enter = j;
                        break;
                    }
                }
            } else {
                double best = -kReducedCostTol;
                for (std::size_t j = 0; j < limit; ++j) {
                    if (obj_[j] < best) {
                        best = obj_[j];
                        enter = j;
                    }
                }
            }
            if (enter == SIZE_MAX) return LpStatus::Optimal;

            // Leaving row: minimum ratio, ties by smallest basis index.
            std::size_t leave = SIZE_MAX;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < rows_.size(); ++i) {
                const double a = rows_[i][enter];
                if (a <= kPivotTol) continue;
                const double ratio = rows_[i][width_ - 1] / a;
                if (ratio < best_ratio - 1e-12 ||
                    (ratio <= best_ratio + 1e-12 &&
                     (leave == SIZE_MAX || basis_[i] < basis_[leave]))) {
                    best_ratio = std::min(best_ratio, ratio);
                    leave = i;
                }
            }
            if (leave == SIZE_MAX) return LpStatus::Unbounded;

            if (best_ratio <= 1e-12) {
                if (++degenerate_streak >= 64) bland_mode = true;
            } else {
                degenerate_streak = 0;
                if (rule_ == PivotRule::DantzigWithBlandFallback) bland_mode = false;
            }

            pivot(leave, enter);
            ++iterations_;
        }
    }

    void pivot(std::size_t pivot_row, std::size_t pivot_col) {
        auto& prow = rows_[pivot_row];
        const double inv = 1.0 / prow[pivot_col];
        for (auto& v : prow) v *= inv;
        prow[pivot_col] = 1.0;
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (i == pivot_row) continue;
            eliminate(rows_[i], prow, pivot_col);
        }
        eliminate(obj_, prow, pivot_col);
        basis_[pivot_row] = pivot_col;
    }

    static void eliminate(NumVec& row, const NumVec& prow, std::size_t pivot_col) {
        const double factor = row[pivot_col];
        if (factor == 0.0) return;
        const std::size_t w = row.size();
        for (std::size_t j = 0; j < w; ++j) row[j] -= factor * prow[j];
        row[pivot_col] = 0.0;
    }

    /// Pivots basic artificials out after phase 1; redundant rows (all-zero
    /// over real columns) are deleted.
    void purge_artificials() {
        for (std::size_t i = 0; i < rows_.size();) {
            if (basis_[i] < art_begin_) {
                ++i;
                continue;
            }
            std::size_t enter = SIZE_MAX;
            for (std::size_t j = 0; j < art_begin_; ++j) {
                if (std::abs(rows_[i][j]) > 1e-7) {
                    enter = j;
                    break;
                }
            }
            if (enter == SIZE_MAX) {
                rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(i));
                basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
            } else {
                pivot(i, enter);
                ++i;
            }
        }
        // Artificial columns stay zeroed out of later pivots.
        for (auto& row : rows_)
            for (std::size_t j = art_begin_; j + 1 < width_; ++j) row[j] = 0.0;
    }

    std::size_t num_artificials() const { return width_ - 1 - art_begin_; }

    PivotRule rule_;
    std::vector<NumVec> rows_;
    NumVec obj_;
    std::vector<std::size_t> basis_;
    NumVec lower_;
    std::size_t num_structural_ = 0;
    std::size_t num_slack_ = 0;
    std::size_t art_begin_ = 0;
    std::size_t width_ = 0;
    std::size_t iterations_ = 0;
};

}  // namespace detail

/// Two-phase dense simplex. Deterministic: identical inputs produce
/// identical vertices.
inline LpSolution solve_lp(const LinearProgram& lp,
                           PivotRule rule = PivotRule::DantzigWithBlandFallback,
                           std::size_t max_iterations = 0) {
    if (lp.c.size() != lp.num_vars) throw InvalidConfigError("objective size mismatch");
    if (lp.a_eq.size() != lp.b_eq.size() || lp.a_ub.size() != lp.b_ub.size())
        throw InvalidConfigError("constraint size mismatch");
    if (max_iterations == 0)
        max_iterations = 2000 * (lp.a_eq.size() + lp.a_ub.size() + lp.num_vars + 16);
    detail::SimplexTableau tableau(lp, rule);
    return tableau.solve(lp, max_iterations);
}

// ---------------------------------------------------------------------------
// MDP-specific builders
// ---------------------------------------------------------------------------

/// Occupancy over (s, a, s') triples: q(s,a,s') = p(s'|s,a) lambda(s,a).
struct ExtendedOccupancy {
    Table3 q;

    double total_mass() const {
        double acc = 0.0;
        for (double v : q.flat()) acc += v;
        return acc;
    }

    /// Worst violation of sum_{a,s} q(j,a,s) = sum_{s,a} q(s,a,j).
    double flow_residual() const {
        const std::size_t S = q.dim0(), A = q.dim1();
        double worst = 0.0;
        for (std::size_t j = 0; j < S; ++j) {
            double out = 0.0, in = 0.0;
            for (std::size_t a = 0; a < A; ++a) {
                for (std::size_t sp = 0; sp < S; ++sp) out += q(j, a, sp);
                for (std::size_t s = 0; s < S; ++s) in += q(s, a, j);
            }
            worst = std::max(worst, std::abs(out - in));
        }
        return worst;
    }
};

inline std::size_t extended_var_index(std::size_t s, std::size_t a, std::size_t sp,
                                      std::size_t num_actions, std::size_t num_states) {
    return (s * num_actions + a) * num_states + sp;
}

/// Extended LP over q(s,a,s') for maximizing sum r(s,a) q(s,a,s') across
/// every model inside the confidence intervals [p_hat - B, p_hat + B].
/// Interval coefficients are clipped to [0,1]; rows already implied by
/// q >= 0 (clipped upper bound 1 or lower bound 0) are omitted. The total
/// mass constraint sum q = 1 is imposed explicitly; the simplex membership
/// in the source formulation leaves it implicit.
inline LinearProgram build_extended_lp(const Table2& reward, const Table3& p_hat,
                                       const Table3& halfwidth, double eta) {
    const std::size_t S = p_hat.dim0(), A = p_hat.dim1();
    if (eta < 0.0) throw InvalidConfigError("eta must be nonnegative");
    if (eta * static_cast<double>(S * A) > 1.0 + 1e-12)
        throw InvalidConfigError("eta * S * A exceeds 1: restricted simplex is empty");
    const std::size_t n = S * A * S;
    LinearProgram lp;
    lp.num_vars = n;
    lp.c.assign(n, 0.0);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < A; ++a)
            for (std::size_t sp = 0; sp < S; ++sp)
                lp.c[extended_var_index(s, a, sp, A, S)] = -reward(s, a);

    // Flow conservation per state.
    for (std::size_t j = 0; j < S; ++j) {
        NumVec row(n, 0.0);
        for (std::size_t a = 0; a < A; ++a)
            for (std::size_t sp = 0; sp < S; ++sp) row[extended_var_index(j, a, sp, A, S)] += 1.0;
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a) row[extended_var_index(s, a, j, A, S)] -= 1.0;
        lp.a_eq.push_back(std::move(row));
        lp.b_eq.push_back(0.0);
    }
    // Total mass.
    lp.a_eq.emplace_back(n, 1.0);
    lp.b_eq.push_back(1.0);

    // Interval rows per (s, a, j).
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const std::size_t base = extended_var_index(s, a, 0, A, S);
            for (std::size_t j = 0; j < S; ++j) {
                const double b = halfwidth(s, a, j);
                if (b < 0.0) throw InvalidConfigError("negative confidence half-width");
                const double ub = std::min(1.0, p_hat(s, a, j) + b);
                const double lb = std::max(0.0, p_hat(s, a, j) - b);
                if (ub < 1.0 - 1e-12) {
                    NumVec row(n, 0.0);
                    for (std::size_t sp = 0; sp < S; ++sp) row[base + sp] = -ub;
                    row[base + j] += 1.0;
                    lp.a_ub.push_back(std::move(row));
                    lp.b_ub.push_back(0.0);
                }
                if (lb > 1e-12) {
                    NumVec row(n, 0.0);
                    for (std::size_t sp = 0; sp < S; ++sp) row[base + sp] = lb;
                    row[base + j] -= 1.0;
                    lp.a_ub.push_back(std::move(row));
                    lp.b_ub.push_back(0.0);
                }
            }
            if (eta > 0.0) {
                NumVec row(n, 0.0);
                for (std::size_t sp = 0; sp < S; ++sp) row[base + sp] = -1.0;
                lp.a_ub.push_back(std::move(row));
                lp.b_ub.push_back(-eta);
            }
        }
    }
    return lp;
}

/// State-action occupancy phi(s,a) = sum_{s'} q(s,a,s').
inline OccupancyMeasure extract_occupancy(const ExtendedOccupancy& extended) {
    const std::size_t S = extended.q.dim0(), A = extended.q.dim1();
    OccupancyMeasure occ{Table2(S, A, 0.0), OccupancyMeasure::Validity::FlowFeasible};
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < A; ++a) {
            double acc = 0.0;
            for (std::size_t sp = 0; sp < S; ++sp) acc += extended.q(s, a, sp);
            occ.lam(s, a) = std::max(acc, 0.0);
        }
    return occ;
}

/// pi(a|s) proportional to phi(s,a); states with no mass get the uniform row.
inline StationaryPolicy extract_policy(const OccupancyMeasure& occ) {
    const std::size_t S = occ.lam.rows(), A = occ.lam.cols();
    StationaryPolicy policy{Table2(S, A, 0.0)};
    for (std::size_t s = 0; s < S; ++s) {
        double total = 0.0;
        for (std::size_t a = 0; a < A; ++a) total += occ.lam(s, a);
        if (total <= 0.0) {
            for (std::size_t a = 0; a < A; ++a) policy.action_probs(s, a) = 1.0 / static_cast<double>(A);
        } else {
            for (std::size_t a = 0; a < A; ++a) policy.action_probs(s, a) = occ.lam(s, a) / total;
        }
    }
    return policy;
}

struct ExtendedLpResult {
    ExtendedOccupancy occupancy;
    double objective = 0.0;  // in the maximize sense
    LpStatus status = LpStatus::Infeasible;
    double eta_used = 0.0;
    int eta_downgrades = 0;
    std::size_t iterations = 0;
};

/// Solves the extended LP, relaxing eta by factors of 10 (down to 0) if the
/// restricted problem is infeasible. Downgrades are reported for run logs.
inline ExtendedLpResult solve_extended_lp(const Table2& reward, const Table3& p_hat,
                                          const Table3& halfwidth, double eta,
                                          PivotRule rule = PivotRule::DantzigWithBlandFallback) {
    const std::size_t S = p_hat.dim0(), A = p_hat.dim1();
    ExtendedLpResult result;
    double current_eta = eta;
    for (int downgrade = 0;; ++downgrade) {
        LinearProgram lp = build_extended_lp(reward, p_hat, halfwidth, current_eta);
        LpSolution sol = solve_lp(lp, rule);
        result.status = sol.status;
        result.eta_used = current_eta;
        result.eta_downgrades = downgrade;
        result.iterations += sol.iterations;
        if (sol.status == LpStatus::Optimal) {
            result.occupancy.q = Table3(S, A, S, 0.0);
            for (std::size_t i = 0; i < sol.x.size(); ++i)
                result.occupancy.q.flat()[i] = std::max(sol.x[i], 0.0);
            result.objective = -sol.objective;
            return result;
        }
        if (sol.status != LpStatus::Infeasible) return result;
        if (current_eta == 0.0) return result;
        current_eta = current_eta > 1e-10 ? current_eta / 10.0 : 0.0;
    }
}

/// Known-model LP: maximize sum r(s,a) lambda(s,a) over the stationary
/// distributions of `mdp` with lambda >= eta.
inline LinearProgram build_known_model_lp(const TabularMdp& mdp, const Table2& reward,
                                          double eta) {
    const std::size_t S = mdp.num_states, A = mdp.num_actions;
    if (eta < 0.0) throw InvalidConfigError("eta must be nonnegative");
    if (eta * static_cast<double>(S * A) > 1.0 + 1e-12)
        throw InvalidConfigError("eta * S * A exceeds 1: restricted simplex is empty");
    const std::size_t n = S * A;
    LinearProgram lp;
    lp.num_vars = n;
    lp.c.assign(n, 0.0);
    lp.lower.assign(n, eta);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < A; ++a) lp.c[s * A + a] = -reward(s, a);
    for (std::size_t j = 0; j < S; ++j) {
        NumVec row(n, 0.0);
        for (std::size_t a = 0; a < A; ++a) row[j * A + a] += 1.0;
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a) row[s * A + a] -= mdp.transitions(s, a, j);
        lp.a_eq.push_back(std::move(row));
        lp.b_eq.push_back(0.0);
    }
    lp.a_eq.emplace_back(n, 1.0);
    lp.b_eq.push_back(1.0);
    return lp;
}

inline OccupancyMeasure solve_known_model_lp(const TabularMdp& mdp, const Table2& reward,
                                             double eta,
                                             PivotRule rule = PivotRule::DantzigWithBlandFallback) {
    LinearProgram lp = build_known_model_lp(mdp, reward, eta);
    LpSolution sol = solve_lp(lp, rule);
    if (sol.status != LpStatus::Optimal)
        throw SolverError(std::string("known-model LP not solvable: ") +
                          lp_status_name(sol.status));
    OccupancyMeasure occ{Table2(mdp.num_states, mdp.num_actions, 0.0),
                         OccupancyMeasure::Validity::FlowFeasible};
    for (std::size_t i = 0; i < sol.x.size(); ++i) occ.lam.flat()[i] = std::max(sol.x[i], 0.0);
    return occ;
}

}  // namespace modest
