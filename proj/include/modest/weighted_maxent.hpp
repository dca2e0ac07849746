#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "modest/estimation.hpp"
#include "modest/mdp.hpp"
#include "modest/objectives.hpp"
#include "modest/run_types.hpp"
#include "modest/types.hpp"

namespace modest {

// ---------------------------------------------------------------------------
// Extended value iteration
// ---------------------------------------------------------------------------

struct EviResult {
    std::vector<std::size_t> actions;  // greedy deterministic policy
    double gain = 0.0;
    std::size_t sweeps = 0;

    StationaryPolicy policy(std::size_t num_actions) const {
        return deterministic_policy(actions, num_actions);
    }
};

namespace detail {

/// max_{p in [lo, hi] cap simplex} p . u, by filling mass toward large u
/// entries ("sort and shift"). `order` holds state indices sorted by
/// decreasing u.
inline double optimistic_row_value(std::span<const double> lo, std::span<const double> hi,
                                   const NumVec& u, const std::vector<std::size_t>& order) {
    double value = 0.0, mass = 0.0;
    for (std::size_t sp = 0; sp < lo.size(); ++sp) {
        value += lo[sp] * u[sp];
        mass += lo[sp];
    }
    double budget = std::max(0.0, 1.0 - mass);
    for (std::size_t idx : order) {
        if (budget <= 0.0) break;
        const double take = std::min(hi[idx] - lo[idx], budget);
        if (take > 0.0) {
            value += take * u[idx];
            budget -= take;
        }
    }
    return value;
}

}  // namespace detail

/// Extended value iteration for average reward: value updates take the
/// optimistic transition row inside [p_hat - B, p_hat + B] (clipped to
/// [0,1]) at every backup. Iterates are damped toward the identity, which
/// leaves every policy's gain unchanged while making periodic chains (e.g.
/// deterministic cycles under zero-width intervals) converge. Stops when
/// span(u' - u) <= accuracy; the gain estimate is the span midpoint.
inline EviResult evi(const Table2& reward, const Table3& p_hat, const Table3& halfwidth,
                     double accuracy, std::size_t max_sweeps = 100000) {
    const std::size_t S = p_hat.dim0(), A = p_hat.dim1();
    if (!(accuracy > 0.0)) throw InvalidConfigError("evi accuracy must be positive");
    constexpr double kDamping = 0.9;

    Table3 lo(S, A, S, 0.0), hi(S, A, S, 0.0);
    for (std::size_t i = 0; i < lo.size(); ++i) {
        const double p = p_hat.flat()[i];
        const double b = halfwidth.flat()[i];
        if (b < 0.0) throw InvalidConfigError("negative confidence half-width");
        lo.flat()[i] = std::max(0.0, p - b);
        hi.flat()[i] = std::min(1.0, p + b);
    }

    NumVec u(S, 0.0), u_next(S, 0.0);
    std::vector<std::size_t> order(S);
    EviResult result;
    result.actions.assign(S, 0);
    for (std::size_t sweep = 1; sweep <= max_sweeps; ++sweep) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&u](std::size_t a, std::size_t b) {
            return u[a] != u[b] ? u[a] > u[b] : a < b;
        });
        for (std::size_t s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            std::size_t best_action = 0;
            for (std::size_t a = 0; a < A; ++a) {
                const double inner =
                    detail::optimistic_row_value(lo.row(s, a), hi.row(s, a), u, order);
                const double value = reward(s, a) + kDamping * inner + (1.0 - kDamping) * u[s];
                if (value > best) {
                    best = value;
                    best_action = a;
                }
            }
            u_next[s] = best;
            result.actions[s] = best_action;
        }
        double lo_diff = std::numeric_limits<double>::infinity(), hi_diff = -lo_diff;
        for (std::size_t s = 0; s < S; ++s) {
            const double d = u_next[s] - u[s];
            lo_diff = std::min(lo_diff, d);
            hi_diff = std::max(hi_diff, d);
        }
        if (hi_diff - lo_diff <= accuracy) {
            result.gain = 0.5 * (hi_diff + lo_diff);
            result.sweeps = sweep;
            return result;
        }
        const double shift = *std::min_element(u_next.begin(), u_next.end());
        for (std::size_t s = 0; s < S; ++s) u[s] = u_next[s] - shift;
    }
    throw SolverError("evi failed to converge within the sweep cap");
}

// ---------------------------------------------------------------------------
// Weighted-MaxEnt learner and baselines
// ---------------------------------------------------------------------------

enum class WeightMode {
    OptimisticNoise,  // learned weights from the noise upper bound
    KnownNoise,       // oracle weights from the true transitional noise
    UnitWeights,      // plain state-action entropy
};

struct WmeConfig {
    double mu = 0.0;  // 0 picks the budget-based default below
    double delta = 0.1;
    std::uint64_t budget = 0;
    WeightMode weight_mode = WeightMode::OptimisticNoise;
    /// Literal reading of the stopping guard: end the episode as soon as any
    /// pair doubles, checked after the step, instead of checking the pair
    /// about to be executed.
    bool strict_all_pairs_doubling = false;

    /// mu = 1 / (n^{1/3} S^{2/3}) unless set explicitly.
    double effective_mu(std::size_t num_states) const {
        if (mu > 0.0) return mu;
        return 1.0 / (std::cbrt(static_cast<double>(budget)) *
                      std::pow(static_cast<double>(num_states), 2.0 / 3.0));
    }

    void validate() const {
        if (budget < 1) throw InvalidConfigError("budget must be at least 1");
        if (!(delta > 0.0 && delta < 1.0)) throw InvalidConfigError("delta must lie in (0, 1)");
        if (mu < 0.0) throw InvalidConfigError("mu must be nonnegative");
    }
};

struct WmeEpisodeLog {
    std::size_t k = 0;
    std::uint64_t t_k = 0;
    std::uint64_t length = 0;
    std::string stop_reason;  // "drift" | "doubling" | "budget"
    double q_threshold = 0.0;
    double phi = 0.0;
    std::size_t evi_sweeps = 0;
    double gain = 0.0;
};

struct WmeRunResult {
    Trajectory trajectory;
    ErrorCurve curve;
    std::vector<WmeEpisodeLog> episodes;
};

/// Optimistic gradient of the smoothed weighted entropy with learned
/// weights V+/sqrt(S log(SA/delta)), evaluated at lambda.
inline Table2 optimistic_weighted_entropy_gradient(const Counters& counters, double mu,
                                                   double delta, const Table2& lam) {
    if (!(mu > 0.0)) throw ObjectiveDomainError("gradient needs mu > 0");
    const auto model = empirical_model(counters);
    const auto bound = noise_upper_bound(counters, model, delta);
    const auto weights = modest_weights(bound.v_plus, counters.num_states, delta);
    return smoothed_weighted_entropy_gradient(weights, lam, mu);
}

namespace detail {

/// Empirical frequency with the uniform pseudo-sample of the recursive
/// update: lambda_t = (1/SA + T) / (steps + 1).
inline Table2 smoothed_frequency(const Table2& counts, std::uint64_t steps) {
    Table2 lam = counts;
    const double prior = 1.0 / static_cast<double>(counts.size());
    const double denom = static_cast<double>(steps + 1);
    for (auto& x : lam.flat()) x = (x + prior) / denom;
    return lam;
}

inline double l2_distance(const Table2& a, const Table2& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.flat()[i] - b.flat()[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace detail

/// Weighted-MaxEnt (and, with unit weights, MaxEnt): optimistic entropy
/// gradients fed as rewards to extended value iteration, with episodes
/// ended by gradient drift or by the count-doubling rule.
inline WmeRunResult weighted_maxent_run(const TabularMdp& mdp, const WmeConfig& config,
                                        std::uint64_t seed,
                                        const std::vector<std::uint64_t>& checkpoints) {
    config.validate();
    const std::size_t S = mdp.num_states, A = mdp.num_actions;
    const double mu = config.effective_mu(S);
    const double q_threshold = 2.0 * std::log(1.0 / mu);

    Rng rng(seed);
    Counters counters(S, A);
    WmeRunResult result;
    result.trajectory.seed = seed;
    result.trajectory.steps.reserve(static_cast<std::size_t>(config.budget));
    std::size_t next_checkpoint = 0;

    const Table2 known_noise =
        config.weight_mode == WeightMode::KnownNoise ? noise_table(mdp) : Table2();
    const Table2 unit_weights(S, A, 1.0);

    std::size_t state = 0;
    std::uint64_t executed = 0;
    for (std::size_t k = 1; executed < config.budget; ++k) {
        const std::uint64_t t_k = executed + 1;
        const auto model = empirical_model(counters);
        const auto confidence = bernstein_halfwidths(counters, model, config.delta);

        Table2 weights;
        switch (config.weight_mode) {
            case WeightMode::OptimisticNoise:
                weights = modest_weights(noise_upper_bound(counters, model, config.delta).v_plus,
                                         S, config.delta);
                break;
            case WeightMode::KnownNoise:
                weights = modest_weights(known_noise, S, config.delta);
                break;
            case WeightMode::UnitWeights:
                weights = unit_weights;
                break;
        }

        Table2 lam = detail::smoothed_frequency(counters.pair_counts, executed);
        const Table2 theta_ref = smoothed_weighted_entropy_gradient(weights, lam, mu);
        const double accuracy = 1.0 / std::sqrt(static_cast<double>(t_k));
        const EviResult plan = evi(theta_ref, model.p_hat, confidence.halfwidth, accuracy);

        Table2 episode_counts(S, A, 0.0);
        const Table2 start_counts = counters.pair_counts;
        double phi = 0.0;
        std::string stop_reason = "budget";
        std::uint64_t length = 0;
        while (true) {
            if (executed >= config.budget) break;
            const std::size_t action = plan.actions[state];
            if (!config.strict_all_pairs_doubling &&
                episode_counts(state, action) >= positive_count(start_counts(state, action))) {
                stop_reason = "doubling";
                break;
            }
            const std::size_t next = step(mdp, state, action, rng);
            update(counters, state, action, next);
            episode_counts(state, action) += 1.0;
            result.trajectory.steps.push_back({state, action, next});
            ++executed;
            ++length;
            state = next;

            if (next_checkpoint < checkpoints.size() && executed == checkpoints[next_checkpoint]) {
                const auto snapshot = empirical_model(counters);
                result.curve.push_back({executed, error_avg(snapshot.p_hat, mdp.transitions),
                                        error_max(snapshot.p_hat, mdp.transitions)});
                ++next_checkpoint;
            }

            lam = detail::smoothed_frequency(counters.pair_counts, executed);
            const Table2 theta = smoothed_weighted_entropy_gradient(weights, lam, mu);
            phi += detail::l2_distance(theta, theta_ref);

            if (executed >= config.budget) break;  // run over: reason stays "budget"
            if (config.strict_all_pairs_doubling) {
                bool doubled = false;
                for (std::size_t i = 0; i < episode_counts.size() && !doubled; ++i)
                    doubled = episode_counts.flat()[i] >=
                              positive_count(start_counts.flat()[i]);
                if (doubled) {
                    stop_reason = "doubling";
                    break;
                }
            }
            if (phi > q_threshold) {
                stop_reason = "drift";
                break;
            }
        }
        result.episodes.push_back(
            {k, t_k, length, stop_reason, q_threshold, phi, plan.sweeps, plan.gain});
    }
    return result;
}

/// Uniform-policy baseline over the same checkpoint grid.
inline WmeRunResult uniform_baseline_run(const TabularMdp& mdp, std::uint64_t budget,
                                         std::uint64_t seed,
                                         const std::vector<std::uint64_t>& checkpoints) {
    if (budget < 1) throw InvalidConfigError("budget must be at least 1");
    Rng rng(seed);
    Counters counters(mdp.num_states, mdp.num_actions);
    WmeRunResult result;
    result.trajectory.seed = seed;
    result.trajectory.steps.reserve(static_cast<std::size_t>(budget));
    std::size_t next_checkpoint = 0;
    std::size_t state = 0;
    for (std::uint64_t t = 1; t <= budget; ++t) {
        const std::size_t action = rng.uniform_index(mdp.num_actions);
        const std::size_t next = step(mdp, state, action, rng);
        update(counters, state, action, next);
        result.trajectory.steps.push_back({state, action, next});
        state = next;
        if (next_checkpoint < checkpoints.size() && t == checkpoints[next_checkpoint]) {
            const auto snapshot = empirical_model(counters);
            result.curve.push_back({t, error_avg(snapshot.p_hat, mdp.transitions),
                                    error_max(snapshot.p_hat, mdp.transitions)});
            ++next_checkpoint;
        }
    }
    return result;
}

}  // namespace modest
