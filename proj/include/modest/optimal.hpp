#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "modest/estimation.hpp"
#include "modest/lp.hpp"
#include "modest/mdp.hpp"
#include "modest/objectives.hpp"
#include "modest/rng.hpp"
#include "modest/types.hpp"

namespace modest {

struct OptimalAllocation {
    Table2 lam_star;
    ObjectiveKind kind = ObjectiveKind::Entropy;
    double objective_value = 0.0;  // natural sense (entropy values are entropies)
    std::size_t iterations = 0;
    double fw_gap = 0.0;           // duality gap at the returned iterate
    double mu_used = 0.0;
    double entropy_bias_bound = 0.0;  // mu S A W, for the mu-guarded entropies
};

/// Step-size rule for the offline Frank-Wolfe solver. Exact line search is
/// the default: the classic 2/(k+2) schedule stalls well short of the gap
/// tolerances used by the reproduction runs.
enum class FwStepRule { LineSearch, Classic };

/// Feasible set: the stationary-distribution polytope of a known model, or
/// the bare probability simplex (used for the unconstrained sanity checks).
enum class FwDomain { FlowFeasible, SimplexOnly };

namespace detail {

/// argmin over the eta-restricted simplex of <g, lambda>: floor everywhere,
/// remaining mass on the smallest gradient entry.
inline Table2 simplex_linear_minimizer(const Table2& grad, double eta) {
    const std::size_t cells = grad.size();
    Table2 vertex(grad.rows(), grad.cols(), eta);
    std::size_t best = 0;
    for (std::size_t i = 1; i < cells; ++i)
        if (grad.flat()[i] < grad.flat()[best]) best = i;
    vertex.flat()[best] += 1.0 - eta * static_cast<double>(cells);
    return vertex;
}

}  // namespace detail

/// Offline Frank-Wolfe over the restricted stationary-distribution polytope
/// with known-model LP subproblems. Minimizes surrogate objectives and
/// maximizes entropies behind a single minimize contract. Returns the best
/// iterate by objective value together with its duality-gap certificate.
inline OptimalAllocation exact_fw(const TabularMdp& mdp, ObjectiveSpec spec, double eta,
                                  std::size_t iterations,
                                  FwStepRule step_rule = FwStepRule::LineSearch,
                                  FwDomain domain = FwDomain::FlowFeasible,
                                  double gap_tolerance = 1e-10) {
    const std::size_t S = mdp.num_states, A = mdp.num_actions;
    if (eta < 0.0 || eta * static_cast<double>(S * A) > 1.0 + 1e-12)
        throw InvalidConfigError("eta outside [0, 1/(SA)]");

    OptimalAllocation out;
    out.kind = spec.kind;
    if (spec.is_entropy()) {
        if (spec.mu <= 0.0) spec.mu = 1e-12;  // mu = 0 would make the gradient unbounded
        out.mu_used = spec.mu;
        const double w_max =
            *std::max_element(spec.weights.flat().begin(), spec.weights.flat().end());
        out.entropy_bias_bound = spec.mu * static_cast<double>(S * A) * w_max;
    }
    spec.eta = eta;
    const double sign = spec.sign();

    const auto value_of = [&](const Table2& lam) { return sign * spec.value(lam); };
    const auto grad_of = [&](const Table2& lam) {
        Table2 g = spec.gradient(lam);
        if (sign < 0.0)
            for (auto& x : g.flat()) x = -x;
        return g;
    };
    const auto linear_minimizer = [&](const Table2& grad) {
        if (domain == FwDomain::SimplexOnly) return detail::simplex_linear_minimizer(grad, eta);
        Table2 reward = grad;
        for (auto& x : reward.flat()) x = -x;
        return solve_known_model_lp(mdp, reward, eta).lam;
    };

    // start from the uniform-policy stationary distribution when it clears
    // the eta floor, otherwise from a feasible vertex
    Table2 lam(S, A, 1.0 / static_cast<double>(S * A));
    if (domain == FwDomain::FlowFeasible) {
        lam = stationary_distribution(mdp, uniform_policy(S, A)).lam;
        bool ok = true;
        for (double x : lam.flat()) ok = ok && x >= eta;
        if (!ok) lam = solve_known_model_lp(mdp, Table2(S, A, 0.0), eta).lam;
    }

    Table2 best_lam = lam;
    double best_value = value_of(lam);
    for (std::size_t k = 0; k < iterations; ++k) {
        const Table2 grad = grad_of(lam);
        const Table2 vertex = linear_minimizer(grad);
        Table2 direction(S, A, 0.0);
        double gap = 0.0;
        for (std::size_t i = 0; i < lam.size(); ++i) {
            direction.flat()[i] = vertex.flat()[i] - lam.flat()[i];
            gap += grad.flat()[i] * (lam.flat()[i] - vertex.flat()[i]);
        }
        if (gap <= gap_tolerance) break;

        double beta = 2.0 / static_cast<double>(k + 2);
        if (step_rule == FwStepRule::LineSearch) {
            // bisection on the directional derivative, convex in beta
            const auto slope = [&](double b) {
                Table2 probe = lam;
                for (std::size_t i = 0; i < probe.size(); ++i)
                    probe.flat()[i] += b * direction.flat()[i];
                const Table2 g = grad_of(probe);
                double acc = 0.0;
                for (std::size_t i = 0; i < g.size(); ++i)
                    acc += g.flat()[i] * direction.flat()[i];
                return acc;
            };
            if (slope(1.0) <= 0.0) {
                beta = 1.0;
            } else {
                double lo = 0.0, hi = 1.0;
                for (int iter = 0; iter < 60; ++iter) {
                    const double mid = 0.5 * (lo + hi);
                    (slope(mid) <= 0.0 ? lo : hi) = mid;
                }
                beta = 0.5 * (lo + hi);
            }
        }
        for (std::size_t i = 0; i < lam.size(); ++i) lam.flat()[i] += beta * direction.flat()[i];
        const double value = value_of(lam);
        if (value < best_value) {
            best_value = value;
            best_lam = lam;
        }
        out.iterations = k + 1;
    }

    // gap certificate at the returned iterate
    const Table2 grad = grad_of(best_lam);
    const Table2 vertex = linear_minimizer(grad);
    double gap = 0.0;
    for (std::size_t i = 0; i < best_lam.size(); ++i)
        gap += grad.flat()[i] * (best_lam.flat()[i] - vertex.flat()[i]);
    out.fw_gap = std::max(gap, 0.0);
    out.lam_star = best_lam;
    out.objective_value = spec.value(best_lam);
    return out;
}

/// MaxEnt allocation: unit-weight state-action entropy.
inline OptimalAllocation maxent_allocation(const TabularMdp& mdp, double mu, std::size_t iterations,
                                           FwStepRule step_rule = FwStepRule::LineSearch) {
    return exact_fw(mdp, make_entropy(mdp.num_states, mdp.num_actions, mu), 0.0, iterations,
                    step_rule);
}

/// Weighted-MaxEnt allocation with oracle weights V / sqrt(S log(SA/delta)).
inline OptimalAllocation weighted_maxent_allocation(const TabularMdp& mdp, double mu,
                                                    std::size_t iterations, double delta = 0.1,
                                                    FwStepRule step_rule = FwStepRule::LineSearch) {
    const Table2 weights = modest_weights(noise_table(mdp), mdp.num_states, delta);
    return exact_fw(mdp, make_weighted_entropy(weights, mu), 0.0, iterations, step_rule);
}

/// Model-estimation allocation: the asymptotic average surrogate over the
/// eta-restricted polytope.
inline OptimalAllocation modest_allocation(const TabularMdp& mdp, double eta,
                                           std::size_t iterations,
                                           FwStepRule step_rule = FwStepRule::LineSearch) {
    return exact_fw(mdp, make_asymptotic_avg(noise_table(mdp), eta), eta, iterations, step_rule);
}

/// Fixed-allocation evaluation: draw max{floor(n lambda(s,a)), 1} i.i.d.
/// next states from each true row, build the plug-in estimate, and return
/// the average l1 error.
inline double fixed_allocation_error(const TabularMdp& mdp, const Table2& lam_star, std::uint64_t n,
                           std::uint64_t seed) {
    if (n < 1) throw InvalidConfigError("n must be at least 1");
    const std::size_t S = mdp.num_states, A = mdp.num_actions;
    Rng rng(seed);
    Table3 p_hat(S, A, S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const auto row = mdp.row(s, a);
            const std::uint64_t draws = std::max<std::uint64_t>(
                static_cast<std::uint64_t>(std::floor(static_cast<double>(n) * lam_star(s, a))),
                1);
            for (std::uint64_t i = 0; i < draws; ++i) p_hat(s, a, rng.categorical(row)) += 1.0;
            for (std::size_t sp = 0; sp < S; ++sp)
                p_hat(s, a, sp) /= static_cast<double>(draws);
        }
    }
    return error_avg(p_hat, mdp.transitions);
}

/// lambda matrix as CSV: one row per state, one column per action.
inline void write_allocation_csv(const Table2& lam, std::ostream& out) {
    out.precision(10);
    for (std::size_t s = 0; s < lam.rows(); ++s) {
        for (std::size_t a = 0; a < lam.cols(); ++a) {
            if (a > 0) out << ',';
            out << lam(s, a);
        }
        out << '\n';
    }
}

}  // namespace modest
