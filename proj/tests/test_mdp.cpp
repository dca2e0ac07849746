#include <catch2/catch_amalgamated.hpp>

#include "modest/mdp.hpp"
#include "oracles.hpp"

using namespace modest;

namespace {

std::vector<TabularMdp> environment_corpus() {
    return {build_noisy_riverswim(6), build_noisy_riverswim(12), build_wheel(5), build_wheel(7),
            build_garnet(5, 5, 5, 0), build_garnet(10, 10, 5, 0)};
}

}  // namespace

TEST_CASE("noisy riverswim matches the documented edge probabilities") {
    using namespace riverswim_action;
    const auto mdp = build_noisy_riverswim(6);
    REQUIRE(mdp.num_states == 6);
    REQUIRE(mdp.num_actions == 4);

    // s1 (index 0): RIGHT self-loops with 0.4 and advances with 0.6
    CHECK(mdp.transitions(0, kRight, 1) == Catch::Approx(0.6));
    CHECK(mdp.transitions(0, kRight, 0) == Catch::Approx(0.4));
    // middle states
    CHECK(mdp.transitions(2, kRight, 1) == Catch::Approx(0.05));
    CHECK(mdp.transitions(2, kRight, 2) == Catch::Approx(0.6));
    CHECK(mdp.transitions(2, kRight, 3) == Catch::Approx(0.35));
    CHECK(mdp.transitions(5, kRight, 5) == Catch::Approx(0.6));
    CHECK(mdp.transitions(5, kRight, 4) == Catch::Approx(0.4));
    // LEFT is deterministic
    CHECK(mdp.transitions(1, kLeft, 0) == Catch::Approx(1.0));
    CHECK(mdp.transitions(0, kLeft, 0) == Catch::Approx(1.0));
    // s3 (index 2) is odd: the odd teleport is uniform, the even one loops
    for (std::size_t sp = 0; sp < 6; ++sp)
        CHECK(mdp.transitions(2, kTeleportOdd, sp) == Catch::Approx(1.0 / 6.0));
    CHECK(mdp.transitions(2, kTeleportEven, 2) == Catch::Approx(1.0));
    // s2 (index 1) is even: roles swap
    for (std::size_t sp = 0; sp < 6; ++sp)
        CHECK(mdp.transitions(1, kTeleportEven, sp) == Catch::Approx(1.0 / 6.0));
    CHECK(mdp.transitions(1, kTeleportOdd, 1) == Catch::Approx(1.0));

    // swap flag exchanges the two teleport actions
    const auto swapped = build_noisy_riverswim(6, true);
    CHECK(swapped.transitions(2, kTeleportEven, 0) == Catch::Approx(1.0 / 6.0));
    CHECK(swapped.transitions(2, kTeleportOdd, 2) == Catch::Approx(1.0));

    CHECK_THROWS_AS(build_noisy_riverswim(1), InvalidSpecError);
}

TEST_CASE("wheel matches the documented transitions") {
    using namespace wheel_action;
    const auto w5 = build_wheel(5);
    REQUIRE(w5.num_actions == 5);
    for (std::size_t r = 1; r < 5; ++r)
        CHECK(w5.transitions(0, kNoisy, r) == Catch::Approx(0.25));
    CHECK(w5.transitions(0, kLeft, 0) == Catch::Approx(1.0));
    CHECK(w5.transitions(0, kCenter, 0) == Catch::Approx(1.0));

    const auto w7 = build_wheel(7);
    // ring state s3: noisy outcomes are {s2, s4, s3, s0} each with 0.25
    CHECK(w7.transitions(3, kNoisy, 2) == Catch::Approx(0.25));
    CHECK(w7.transitions(3, kNoisy, 4) == Catch::Approx(0.25));
    CHECK(w7.transitions(3, kNoisy, 3) == Catch::Approx(0.25));
    CHECK(w7.transitions(3, kNoisy, 0) == Catch::Approx(0.25));
    // ring wrap-around
    CHECK(w7.transitions(1, kLeft, 6) == Catch::Approx(1.0));
    CHECK(w7.transitions(6, kRight, 1) == Catch::Approx(1.0));

    CHECK_THROWS_AS(build_wheel(2), InvalidSpecError);
}

TEST_CASE("garnet rows are distributions with bounded support") {
    const auto g = build_garnet(5, 5, 5, 0);
    for (std::size_t s = 0; s < 5; ++s)
        for (std::size_t a = 0; a < 5; ++a) {
            double sum = 0.0;
            for (double p : g.row(s, a)) sum += p;
            CHECK(sum == Catch::Approx(1.0).margin(1e-12));
            const auto gamma = g.support_size(s, a);
            CHECK(gamma >= 1);
            CHECK(gamma <= 5);
        }

    // b = 1 gives deterministic rows everywhere
    const auto det = build_garnet(5, 5, 1, 3);
    for (std::size_t s = 0; s < 5; ++s)
        for (std::size_t a = 0; a < 5; ++a) CHECK(det.support_size(s, a) == 1);

    CHECK_THROWS_AS(build_garnet(5, 5, 6, 0), InvalidSpecError);
    CHECK_THROWS_AS(build_garnet(5, 5, 0, 0), InvalidSpecError);
}

TEST_CASE("garnet instances are communicating (brute-force reachability oracle)") {
    for (std::uint64_t seed : {0ULL, 1ULL, 2ULL, 7ULL}) {
        const auto g = build_garnet(10, 10, 5, seed);
        CHECK(oracles::strongly_connected_bruteforce(g));
    }
    // regeneration is deterministic per seed
    const auto a = build_garnet(10, 10, 5, 0);
    const auto b = build_garnet(10, 10, 5, 0);
    CHECK(a.transitions == b.transitions);
}

TEST_CASE("garnet generation fails cleanly when no instance communicates") {
    // a single deterministic action over many states is a random functional
    // graph: strong connectivity is (essentially) never achieved, so the
    // retry budget runs out
    CHECK_THROWS_AS(build_garnet(40, 1, 1, 0), GenerationError);
}

TEST_CASE("every constructed environment is row-stochastic within 1e-12") {
    for (const auto& mdp : environment_corpus()) REQUIRE_NOTHROW(mdp.validate());
}

TEST_CASE("step: deterministic rows, fixed-seed reproducibility, frequencies") {
    const auto mdp = build_noisy_riverswim(6);

    // (s2, LEFT) always moves to s1
    Rng rng(123);
    for (int i = 0; i < 50; ++i)
        CHECK(step(mdp, 1, riverswim_action::kLeft, rng) == 0);

    // bit-reproducible given the seed
    Rng r1(42), r2(42);
    for (int i = 0; i < 1000; ++i)
        CHECK(step(mdp, 2, riverswim_action::kTeleportOdd, r1) ==
              step(mdp, 2, riverswim_action::kTeleportOdd, r2));

    // uniform row frequencies approach 1/6 (Monte-Carlo oracle)
    Rng r3(7);
    const auto freq = oracles::monte_carlo_row_frequency(mdp, 2, riverswim_action::kTeleportOdd,
                                                         600000, r3);
    for (double f : freq) CHECK(f == Catch::Approx(1.0 / 6.0).margin(0.01));
}

TEST_CASE("stationary distribution: closed forms and the power-iteration oracle") {
    // single state: lambda(s0, a) = pi(a | s0)
    TabularMdp single{1, 3, Table3(1, 3, 1, 1.0)};
    StationaryPolicy pi{Table2(1, 3, 0.0)};
    pi.action_probs(0, 0) = 0.2;
    pi.action_probs(0, 1) = 0.3;
    pi.action_probs(0, 2) = 0.5;
    const auto occ = stationary_distribution(single, pi);
    CHECK(occ.lam(0, 0) == Catch::Approx(0.2));
    CHECK(occ.lam(0, 2) == Catch::Approx(0.5));

    // 2-state deterministic cycle
    TabularMdp cycle{2, 1, Table3(2, 1, 2, 0.0)};
    cycle.transitions(0, 0, 1) = 1.0;
    cycle.transitions(1, 0, 0) = 1.0;
    const auto occ2 = stationary_distribution(cycle, uniform_policy(2, 1));
    CHECK(occ2.lam(0, 0) == Catch::Approx(0.5));
    CHECK(occ2.lam(1, 0) == Catch::Approx(0.5));

    // NoisyRiverSwim(6) under the uniform policy vs power iteration
    const auto mdp = build_noisy_riverswim(6);
    const auto uniform = uniform_policy(6, 4);
    const auto occ3 = stationary_distribution(mdp, uniform);
    const auto pmat = policy_transition_matrix(mdp, uniform);
    const auto nu = oracles::power_iteration_stationary(pmat, 1000000);
    for (std::size_t s = 0; s < 6; ++s) {
        double row = 0.0;
        for (std::size_t a = 0; a < 4; ++a) row += occ3.lam(s, a);
        CHECK(row == Catch::Approx(nu[s]).margin(1e-8));
    }
}

TEST_CASE("stationary distribution rejects multichain policies") {
    // two absorbing states
    TabularMdp mdp{2, 1, Table3(2, 1, 2, 0.0)};
    mdp.transitions(0, 0, 0) = 1.0;
    mdp.transitions(1, 0, 1) = 1.0;
    CHECK_THROWS_AS(stationary_distribution(mdp, uniform_policy(2, 1)),
                    NonUniqueStationaryError);
}

TEST_CASE("stationary distributions satisfy flow conservation on the corpus") {
    Rng rng(5);
    for (const auto& mdp : environment_corpus()) {
        // a random fully-supported policy
        StationaryPolicy pi{Table2(mdp.num_states, mdp.num_actions, 0.0)};
        for (std::size_t s = 0; s < mdp.num_states; ++s) {
            double total = 0.0;
            for (std::size_t a = 0; a < mdp.num_actions; ++a) {
                const double w = 0.1 + rng.uniform01();
                pi.action_probs(s, a) = w;
                total += w;
            }
            for (std::size_t a = 0; a < mdp.num_actions; ++a) pi.action_probs(s, a) /= total;
        }
        const auto occ = stationary_distribution(mdp, pi);
        CHECK(flow_conservation_residual(occ.lam, mdp.transitions) <= 1e-10);
        CHECK(occ.total_mass() == Catch::Approx(1.0).margin(1e-10));
    }
}

TEST_CASE("environment ids round-trip") {
    for (const char* id : {"noisyriverswim:12", "wheel:5", "garnet:5x5x5:17"}) {
        const auto spec = parse_env_id(id);
        CHECK(env_id(spec) == id);
        REQUIRE_NOTHROW(build_env(spec).validate());
    }
    CHECK(parse_env_id("garnet:10x10x5:3").branching == 5);
    CHECK_THROWS_AS(parse_env_id("riverswim"), InvalidSpecError);
    CHECK_THROWS_AS(parse_env_id("garnet:5x5:0"), InvalidSpecError);
    CHECK_THROWS_AS(parse_env_id("wheel:x"), InvalidSpecError);
}
