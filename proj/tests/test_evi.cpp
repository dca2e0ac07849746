#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "modest/estimation.hpp"
#include "modest/mdp.hpp"
#include "modest/weighted_maxent.hpp"
#include "oracles.hpp"

using namespace modest;

namespace {

std::vector<TabularMdp> small_corpus() {
    std::vector<TabularMdp> mdps;
    // 2-state deterministic cycle (periodic chain)
    TabularMdp cycle{2, 2, Table3(2, 2, 2, 0.0)};
    cycle.transitions(0, 0, 1) = 1.0;
    cycle.transitions(1, 0, 0) = 1.0;
    cycle.transitions(0, 1, 0) = 1.0;
    cycle.transitions(1, 1, 1) = 1.0;
    mdps.push_back(cycle);
    // random communicating 2- and 3-state MDPs
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) mdps.push_back(build_garnet(2, 2, 2, seed));
    for (std::uint64_t seed : {4ULL, 5ULL, 6ULL}) mdps.push_back(build_garnet(3, 3, 3, seed));
    for (std::uint64_t seed : {7ULL, 8ULL}) mdps.push_back(build_garnet(3, 2, 2, seed));
    return mdps;
}

}  // namespace

TEST_CASE("evi with zero-width intervals matches policy enumeration") {
    Rng rng(42);
    for (const auto& mdp : small_corpus()) {
        const std::size_t S = mdp.num_states, A = mdp.num_actions;
        Table2 reward(S, A, 0.0);
        for (auto& r : reward.flat()) r = rng.uniform01();
        const Table3 zero_width(S, A, S, 0.0);
        const auto result = evi(reward, mdp.transitions, zero_width, 1e-8);
        const double oracle_gain = oracles::best_gain_policy_enumeration(mdp, reward);
        CHECK(result.gain == Catch::Approx(oracle_gain).margin(1e-6));

        // the greedy policy's own long-run reward also attains the gain
        const auto pi = result.policy(A);
        const auto pmat = policy_transition_matrix(mdp, pi);
        const auto nu = oracles::power_iteration_stationary(pmat, 200000);
        double achieved = 0.0;
        for (std::size_t s = 0; s < S; ++s) achieved += nu[s] * reward(s, result.actions[s]);
        CHECK(achieved == Catch::Approx(oracle_gain).margin(1e-5));
    }
}

TEST_CASE("evi with constant rewards returns that constant gain") {
    const auto mdp = build_wheel(5);
    Table2 reward(5, 5, 0.37);
    const auto result = evi(reward, mdp.transitions, Table3(5, 5, 5, 0.0), 1e-9);
    CHECK(result.gain == Catch::Approx(0.37).margin(1e-8));
}

TEST_CASE("evi is optimistic when the intervals cover the truth") {
    const auto mdp = build_garnet(3, 2, 3, 11);
    Rng rng(5);
    Table2 reward(3, 2, 0.0);
    for (auto& r : reward.flat()) r = rng.uniform01();
    const double true_gain = oracles::best_gain_policy_enumeration(mdp, reward);

    for (int rep = 0; rep < 20; ++rep) {
        // simulate, then check gain optimism whenever the set covers p
        Counters counters(3, 2);
        std::size_t s = 0;
        const int steps = 200 + rep * 100;
        for (int t = 0; t < steps; ++t) {
            const std::size_t a = rng.uniform_index(2);
            const std::size_t next = step(mdp, s, a, rng);
            update(counters, s, a, next);
            s = next;
        }
        const auto model = empirical_model(counters);
        const auto confidence = bernstein_halfwidths(counters, model, 0.1);
        bool covered = true;
        for (std::size_t i = 0; i < model.p_hat.size(); ++i)
            covered = covered && std::abs(model.p_hat.flat()[i] - mdp.transitions.flat()[i]) <=
                                     confidence.halfwidth.flat()[i];
        if (!covered) continue;
        const double eps = 1e-6;
        const auto result = evi(reward, model.p_hat, confidence.halfwidth, eps);
        CHECK(result.gain >= true_gain - eps - 1e-9);
    }
}

TEST_CASE("evi rejects bad inputs") {
    const auto mdp = build_wheel(5);
    Table2 reward(5, 5, 0.0);
    CHECK_THROWS_AS(evi(reward, mdp.transitions, Table3(5, 5, 5, 0.0), 0.0), InvalidConfigError);
    CHECK_THROWS_AS(evi(reward, mdp.transitions, Table3(5, 5, 5, -0.1), 1e-6),
                    InvalidConfigError);
    // sweep cap produces a diagnostic error
    Table2 skew(5, 5, 0.0);
    skew(0, 0) = 1.0;
    CHECK_THROWS_AS(evi(skew, mdp.transitions, Table3(5, 5, 5, 0.0), 1e-13, 3), SolverError);
}
