#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "modest/mdp.hpp"
#include "modest/types.hpp"

namespace modest {

/// Visit counters T(s,a), T(s,a,s') and the total step count.
struct Counters {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    Table2 pair_counts;        // T(s, a)
    Table3 transition_counts;  // T(s, a, s')
    std::uint64_t total = 0;

    Counters() = default;
    Counters(std::size_t S, std::size_t A)
        : num_states(S),
          num_actions(A),
          pair_counts(S, A, 0.0),
          transition_counts(S, A, S, 0.0) {}
};

inline void update(Counters& counters, std::size_t s, std::size_t a, std::size_t next) {
    counters.pair_counts(s, a) += 1.0;
    counters.transition_counts(s, a, next) += 1.0;
    counters.total += 1;
}

inline void update(Counters& counters, const TrajectoryStep& step) {
    update(counters, step.state, step.action, step.next_state);
}

/// max{T, 1}
inline double positive_count(double count) { return std::max(count, 1.0); }

/// Plug-in transition estimate with per-transition empirical variances.
/// Unvisited pairs carry the uniform convention row and are flagged; their
/// variance rows stay zero (the raw frequency row is all zeros).
struct EmpiricalModel {
    Table3 p_hat;
    Table3 sigma2_hat;
    std::vector<char> visited;  // flattened (s, a)

    bool pair_visited(std::size_t s, std::size_t a) const {
        return visited[s * p_hat.dim1() + a] != 0;
    }
};

inline EmpiricalModel empirical_model(const Counters& counters) {
    const std::size_t S = counters.num_states, A = counters.num_actions;
    EmpiricalModel model{Table3(S, A, S, 0.0), Table3(S, A, S, 0.0), std::vector<char>(S * A, 0)};
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const double count = counters.pair_counts(s, a);
            const double denom = positive_count(count);
            for (std::size_t sp = 0; sp < S; ++sp) {
                const double freq = counters.transition_counts(s, a, sp) / denom;
                model.p_hat(s, a, sp) = freq;
                model.sigma2_hat(s, a, sp) = freq * (1.0 - freq);
            }
            if (count > 0.0) {
                model.visited[s * A + a] = 1;
            } else {
                for (std::size_t sp = 0; sp < S; ++sp)
                    model.p_hat(s, a, sp) = 1.0 / static_cast<double>(S);
            }
        }
    }
    return model;
}

namespace detail {

/// log of the argument, floored so the result is always >= 1.
inline double safe_log(double arg) { return std::log(std::max(arg, std::exp(1.0))); }

}  // namespace detail

/// Per-(s,a,s') empirical-Bernstein half-widths
///   B = 2 sqrt(sigma2 * l / T+) + 6 l / T+,  l = log(6 S A T+ / delta).
struct ConfidenceSet {
    Table3 halfwidth;
    double delta = 0.0;
    std::uint64_t t = 0;
};

inline ConfidenceSet bernstein_halfwidths(const Counters& counters, const EmpiricalModel& model,
                                          double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidConfigError("delta must lie in (0, 1)");
    const std::size_t S = counters.num_states, A = counters.num_actions;
    ConfidenceSet set{Table3(S, A, S, 0.0), delta, counters.total};
    const double sa = static_cast<double>(S * A);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const double tp = positive_count(counters.pair_counts(s, a));
            const double ell = detail::safe_log(6.0 * sa * tp / delta);
            const double slack = 6.0 * ell / tp;
            for (std::size_t sp = 0; sp < S; ++sp) {
                const double sigma2 = model.sigma2_hat(s, a, sp);
                set.halfwidth(s, a, sp) = 2.0 * std::sqrt(sigma2 * ell / tp) + slack;
            }
        }
    }
    return set;
}

/// Optimistic upper bound on the transitional noise,
///   V+ = (1/sqrt(S)) sum_{s'} [ sqrt(sigma2) + sqrt(2 l' / T+) ],
///   l' = log(4 S^2 A (T+)^2 / delta).
struct NoiseBound {
    Table2 v_plus;
};

inline NoiseBound noise_upper_bound(const Counters& counters, const EmpiricalModel& model,
                                    double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidConfigError("delta must lie in (0, 1)");
    const std::size_t S = counters.num_states, A = counters.num_actions;
    NoiseBound bound{Table2(S, A, 0.0)};
    const double sqrt_s = std::sqrt(static_cast<double>(S));
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const double tp = positive_count(counters.pair_counts(s, a));
            const double ell =
                detail::safe_log(4.0 * static_cast<double>(S * S * A) * tp * tp / delta);
            const double slack = std::sqrt(2.0 * ell / tp);
            double acc = 0.0;
            for (std::size_t sp = 0; sp < S; ++sp)
                acc += std::sqrt(model.sigma2_hat(s, a, sp)) + slack;
            bound.v_plus(s, a) = acc / sqrt_s;
        }
    }
    return bound;
}

/// Transitional noise V(s,a) = sum_{s'} sqrt(p (1-p)) / sqrt(S); zero iff
/// the row is deterministic.
inline double true_transitional_noise(const TabularMdp& mdp, std::size_t s, std::size_t a) {
    double acc = 0.0;
    for (double p : mdp.row(s, a)) acc += std::sqrt(p * (1.0 - p));
    return acc / std::sqrt(static_cast<double>(mdp.num_states));
}

inline Table2 noise_table(const TabularMdp& mdp) {
    Table2 v(mdp.num_states, mdp.num_actions, 0.0);
    for (std::size_t s = 0; s < mdp.num_states; ++s)
        for (std::size_t a = 0; a < mdp.num_actions; ++a)
            v(s, a) = true_transitional_noise(mdp, s, a);
    return v;
}

}  // namespace modest
