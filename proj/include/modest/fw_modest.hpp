#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "modest/estimation.hpp"
#include "modest/lp.hpp"
#include "modest/mdp.hpp"
#include "modest/objectives.hpp"
#include "modest/run_types.hpp"
#include "modest/types.hpp"

namespace modest {

enum class EpisodeSchedule { PaperCubic, FixedLength };

struct FwConfig {
    double eta = 1e-4;
    double delta = 0.1;
    std::uint64_t budget = 0;
    ObjectiveKind objective = ObjectiveKind::AvgSurrogate;  // or LseWorstSurrogate
    EpisodeSchedule schedule = EpisodeSchedule::PaperCubic;
    std::uint64_t fixed_length = 50;
    /// Oracle mode evaluates the gradient with the true transitional noise
    /// and solves the LP at the true model with zero-width intervals.
    bool oracle_mode = false;
    PivotRule pivot_rule = PivotRule::DantzigWithBlandFallback;

    void validate() const {
        if (budget < 1) throw InvalidConfigError("budget must be at least 1");
        if (!(delta > 0.0 && delta < 1.0)) throw InvalidConfigError("delta must lie in (0, 1)");
        if (eta < 0.0) throw InvalidConfigError("eta must be nonnegative");
        if (schedule == EpisodeSchedule::FixedLength && fixed_length < 1)
            throw InvalidConfigError("fixed episode length must be at least 1");
        if (objective != ObjectiveKind::AvgSurrogate &&
            objective != ObjectiveKind::LseWorstSurrogate)
            throw InvalidConfigError("learner objective must be a surrogate kind");
    }
};

/// tau_k = 3k^2 - 3k + 1 (cumulative K^3) for the cubic schedule.
inline std::uint64_t episode_length(std::size_t k, const FwConfig& config) {
    if (k < 1) throw InvalidConfigError("episode index starts at 1");
    if (config.schedule == EpisodeSchedule::FixedLength) return config.fixed_length;
    const std::uint64_t kk = k;
    return 3 * kk * kk - 3 * kk + 1;
}

struct FwState {
    std::size_t k = 0;       // episode index
    std::uint64_t t = 0;     // executed steps
    Counters counters;
    Table2 lam_tilde;        // T_t / t (uniform before any step)
};

/// Reward vector for the extended LP: the negated gradient of the
/// optimistic surrogate at the clipped empirical frequency. `noise` is the
/// optimistic bound (or the true noise in oracle mode).
inline Table2 optimistic_gradient(const FwState& state, const FwConfig& config,
                                  const Table2& noise, bool* clipped = nullptr) {
    Table2 lam = state.lam_tilde;
    bool any_clip = false;
    const double floor = config.eta / 2.0;
    for (auto& x : lam.flat()) {
        if (x < floor) {
            x = floor;
            any_clip = true;
        }
    }
    if (clipped != nullptr) *clipped = any_clip;
    ObjectiveSpec spec = config.objective == ObjectiveKind::AvgSurrogate
                             ? make_avg_surrogate(noise, static_cast<double>(config.budget),
                                                  config.eta)
                             : make_lse_worst_surrogate(noise, static_cast<double>(config.budget),
                                                        config.eta);
    Table2 reward = spec.gradient(lam);
    for (auto& r : reward.flat()) r = -r;
    return reward;
}

struct FwEpisodeLog {
    std::size_t k = 0;
    std::uint64_t t_k = 0;      // first time index of the episode (1-based)
    std::uint64_t length = 0;   // steps actually executed
    std::string lp_status;      // "uniform-init" for episode 1
    double eta_used = 0.0;
    int eta_downgrades = 0;
    double lp_objective = 0.0;
    std::size_t lp_iterations = 0;
    bool gradient_clipped = false;
};

struct FwRunResult {
    Trajectory trajectory;
    ErrorCurve curve;
    std::vector<FwEpisodeLog> episodes;
};

/// Frank-Wolfe model-estimation learner: per episode, rebuild the noise
/// bound and confidence set, take the negated optimistic gradient as the
/// reward of the extended LP, extract the policy from the optimal q, and
/// roll it out for tau_k steps. Episode 1 executes the uniform policy,
/// before any model knowledge.
inline FwRunResult fw_modest_run(const TabularMdp& mdp, const FwConfig& config,
                                 std::uint64_t seed,
                                 const std::vector<std::uint64_t>& checkpoints) {
    config.validate();
    const std::size_t S = mdp.num_states, A = mdp.num_actions;

    Rng rng(seed);
    FwState state{0, 0, Counters(S, A), Table2(S, A, 1.0 / static_cast<double>(S * A))};
    FwRunResult result;
    result.trajectory.seed = seed;
    result.trajectory.steps.reserve(static_cast<std::size_t>(config.budget));
    std::size_t next_checkpoint = 0;

    const Table2 true_noise = config.oracle_mode ? noise_table(mdp) : Table2();
    const Table3 zero_width(S, A, S, 0.0);

    std::size_t current = 0;
    const StationaryPolicy uniform = uniform_policy(S, A);
    for (std::size_t k = 1; state.t < config.budget; ++k) {
        state.k = k;
        FwEpisodeLog log;
        log.k = k;
        log.t_k = state.t + 1;

        StationaryPolicy policy = uniform;
        if (k == 1) {
            log.lp_status = "uniform-init";
            log.eta_used = config.eta;
        } else {
            const auto model = empirical_model(state.counters);
            Table2 noise;
            if (config.oracle_mode) {
                noise = true_noise;
            } else {
                noise = noise_upper_bound(state.counters, model, config.delta).v_plus;
            }
            const Table2 reward = optimistic_gradient(state, config, noise,
                                                      &log.gradient_clipped);
            const Table3& p_ref = config.oracle_mode ? mdp.transitions : model.p_hat;
            const Table3 halfwidth =
                config.oracle_mode
                    ? zero_width
                    : bernstein_halfwidths(state.counters, model, config.delta).halfwidth;
            const auto lp = solve_extended_lp(reward, p_ref, halfwidth, config.eta,
                                              config.pivot_rule);
            log.lp_status = lp_status_name(lp.status);
            log.eta_used = lp.eta_used;
            log.eta_downgrades = lp.eta_downgrades;
            log.lp_objective = lp.objective;
            log.lp_iterations = lp.iterations;
            if (lp.status != LpStatus::Optimal)
                throw SolverError(std::string("extended LP unsolvable in episode ") +
                                  std::to_string(k) + ": " + lp_status_name(lp.status));
            policy = extract_policy(extract_occupancy(lp.occupancy));
        }

        const std::uint64_t tau = episode_length(k, config);
        for (std::uint64_t i = 0; i < tau && state.t < config.budget; ++i) {
            const std::size_t action = rng.categorical(policy.action_probs.row(current));
            const std::size_t next = step(mdp, current, action, rng);
            update(state.counters, current, action, next);
            result.trajectory.steps.push_back({current, action, next});
            current = next;
            ++state.t;
            ++log.length;
            if (next_checkpoint < checkpoints.size() &&
                state.t == checkpoints[next_checkpoint]) {
                const auto snapshot = empirical_model(state.counters);
                result.curve.push_back({state.t, error_avg(snapshot.p_hat, mdp.transitions),
                                        error_max(snapshot.p_hat, mdp.transitions)});
                ++next_checkpoint;
            }
        }
        for (std::size_t i = 0; i < state.lam_tilde.size(); ++i)
            state.lam_tilde.flat()[i] =
                state.counters.pair_counts.flat()[i] / static_cast<double>(state.t);
        result.episodes.push_back(log);
    }
    return result;
}

}  // namespace modest
