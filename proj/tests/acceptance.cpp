// Acceptance suite: runs the reproduction and property criteria end to end
// and prints one PASS/FAIL line per criterion. Exit code = number of
// failures. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "modest/estimation.hpp"
#include "modest/fw_modest.hpp"
#include "modest/harness.hpp"
#include "modest/lp.hpp"
#include "modest/mdp.hpp"
#include "modest/objectives.hpp"
#include "modest/optimal.hpp"
#include "modest/weighted_maxent.hpp"

using namespace modest;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "  FAILED: " << what << '\n';
        }
    }
};

std::string fmt(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.4e", v);
    return buffer;
}

double allocation_error_mean(const TabularMdp& mdp, const Table2& lam, std::uint64_t n,
                   std::size_t seeds) {
    double acc = 0.0;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) acc += fixed_allocation_error(mdp, lam, n, seed);
    return acc / static_cast<double>(seeds);
}

// ---------------------------------------------------------------------- 1, 2
Outcome criterion_allocation_errors(const TabularMdp& mdp, const char* label, double target_maxent,
                         double target_wme, double target_fwm, std::size_t fwm_iters) {
    Outcome out;
    const std::uint64_t n = 2000000;
    const double eta = 1e-4;
    const std::size_t seeds = 10;

    const auto maxent = maxent_allocation(mdp, 0.0, 10000);
    const auto wme = weighted_maxent_allocation(mdp, 0.0, 10000);
    const auto fwm = modest_allocation(mdp, eta, fwm_iters);
    out.require(maxent.fw_gap <= 1e-4, "maxent FW gap 1e-4, got " + fmt(maxent.fw_gap));
    out.require(wme.fw_gap <= 1e-4, "weighted-maxent FW gap 1e-4, got " + fmt(wme.fw_gap));
    out.require(fwm.fw_gap <= 1e-4, "fw-modest FW gap 1e-4, got " + fmt(fwm.fw_gap));

    struct Row {
        const char* name;
        const Table2* lam;
        double target;
    };
    const Row rows[] = {{"maxent", &maxent.lam_star, target_maxent},
                        {"weighted-maxent", &wme.lam_star, target_wme},
                        {"fw-modest", &fwm.lam_star, target_fwm}};
    for (const auto& row : rows) {
        const double mean = allocation_error_mean(mdp, *row.lam, n, seeds);
        const double rel = mean / row.target - 1.0;
        out.detail << "  " << label << ' ' << row.name << ": E = " << fmt(mean) << " (target "
                   << fmt(row.target) << ", " << fmt(rel * 100.0) << "%)\n";
        out.require(std::abs(rel) <= 0.10,
                    std::string(row.name) + " within +-10% of " + fmt(row.target));
    }
    return out;
}

// ------------------------------------------------------------------------- 3
Outcome criterion_wheel_matrices() {
    Outcome out;
    const auto wheel = build_wheel(5);

    const auto wme = weighted_maxent_allocation(wheel, 0.0, 10000);
    for (std::size_t s = 0; s < 5; ++s) {
        const double noisy = wme.lam_star(s, wheel_action::kNoisy);
        out.require(std::abs(noisy - 0.2) <= 0.005,
                    "weighted-maxent noisy column at state " + std::to_string(s) + " = 0.2 +- 0.005, got " +
                        fmt(noisy));
    }
    out.detail << "  weighted-maxent noisy column: " << fmt(wme.lam_star(0, 4)) << ".."
               << fmt(wme.lam_star(4, 4)) << '\n';

    const double reference[5][5] = {{0.043, 0.043, 0.043, 0.043, 0.1048},
                                    {0.043, 0.043, 0.043, 0.0176, 0.0344},
                                    {0.043, 0.043, 0.043, 0.0176, 0.0344},
                                    {0.043, 0.043, 0.043, 0.0176, 0.0344},
                                    {0.043, 0.043, 0.043, 0.0176, 0.0344}};
    const auto maxent = maxent_allocation(wheel, 0.0, 10000);
    double linf = 0.0;
    for (std::size_t s = 0; s < 5; ++s)
        for (std::size_t a = 0; a < 5; ++a)
            linf = std::max(linf, std::abs(maxent.lam_star(s, a) - reference[s][a]));
    out.detail << "  maxent matrix l_inf distance: " << fmt(linf) << " (hub noisy entry "
               << fmt(maxent.lam_star(0, 4)) << " vs 0.1048)\n";
    out.require(linf <= 0.01, "maxent matrix within l_inf 0.01 of the reference");
    return out;
}

// ------------------------------------------------------------------------- 4
Outcome criterion_learning_curves() {
    Outcome out;
    ExperimentConfig config;
    config.envs = {"noisyriverswim:12"};
    config.algos = {Algorithm::WeightedMaxEnt, Algorithm::FwModest, Algorithm::MaxEnt,
                    Algorithm::Uniform};
    config.budget = 200000;
    config.runs = 20;
    config.seed_base = 0;
    config.fw_schedule = EpisodeSchedule::FixedLength;
    config.fw_fixed_length = 500;
    config.threads = 0;
    const auto rows = run_experiment(config);

    std::map<std::string, std::vector<double>> finals;
    for (const auto& row : rows)
        if (row.step == config.budget) finals[row.algo].push_back(row.error_avg);
    const auto stats = [&](const std::string& algo) {
        const auto& v = finals[algo];
        double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= (v.size() - 1);
        return std::make_pair(mean, var);
    };
    const auto [wme_mean, wme_var] = stats("weighted-maxent");
    const auto [fwm_mean, fwm_var] = stats("fw-modest");
    const auto [me_mean, me_var] = stats("maxent");
    const auto [unif_mean, unif_var] = stats("uniform");
    const double pooled_se = std::sqrt((wme_var + me_var) / 20.0);
    out.detail << "  final mean E: weighted-maxent " << fmt(wme_mean) << ", fw-modest "
               << fmt(fwm_mean) << ", maxent " << fmt(me_mean) << ", uniform "
               << fmt(unif_mean) << '\n';
    out.detail << "  weighted-maxent vs maxent gap " << fmt(me_mean - wme_mean)
               << " vs pooled SE " << fmt(pooled_se) << '\n';
    out.require(wme_mean < fwm_mean, "weighted-maxent < fw-modest");
    out.require(fwm_mean < std::min(me_mean, unif_mean), "fw-modest < min(maxent, uniform)");
    out.require(me_mean - wme_mean > pooled_se, "weighted-maxent/maxent gap exceeds 1 pooled SE");
    return out;
}

// ------------------------------------------------------------------------- 5
Outcome criterion_garnet_sweep() {
    Outcome out;
    const std::uint64_t n = 10000;
    const std::size_t runs = 20;
    int dominated = 0;
    for (std::uint64_t instance = 0; instance < 10; ++instance) {
        const auto mdp = build_garnet(5, 5, 5, instance);
        const auto grid = checkpoint_grid(n, 10);
        double wme_mean = 0.0, me_mean = 0.0;
        for (std::size_t r = 0; r < runs; ++r) {
            WmeConfig wme;
            wme.budget = n;
            auto wme_run = weighted_maxent_run(mdp, wme, r, grid);
            wme_mean += wme_run.curve.back().error_avg;
            WmeConfig maxent = wme;
            maxent.weight_mode = WeightMode::UnitWeights;
            auto me_run = weighted_maxent_run(mdp, maxent, r, grid);
            me_mean += me_run.curve.back().error_avg;
        }
        wme_mean /= runs;
        me_mean /= runs;
        const bool won = wme_mean <= me_mean;
        dominated += won ? 1 : 0;
        out.detail << "  garnet:5x5x5:" << instance << " weighted-maxent " << fmt(wme_mean)
                   << (won ? " <= " : " >  ") << "maxent " << fmt(me_mean) << '\n';
    }
    out.detail << "  weighted-maxent wins " << dominated << "/10 instances\n";
    out.require(dominated >= 8, "weighted-maxent mean E <= maxent's in at least 8/10 instances");
    return out;
}

// ------------------------------------------------------------------------- 6
Outcome criterion_property_suite() {
    Outcome out;
    Rng rng(2024);

    // (a) analytic gradients vs central finite differences, 100 points per objective
    {
        const std::size_t S = 3, A = 2;
        const auto random_lambda = [&](double floor) {
            Table2 lam(S, A, 0.0);
            double total = 0.0;
            for (auto& x : lam.flat()) {
                x = 0.05 + rng.uniform01();
                total += x;
            }
            const double scale = (1.0 - floor * S * A) / total;
            for (auto& x : lam.flat()) x = floor + x * scale;
            return lam;
        };
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            Table2 noise(S, A, 0.0);
            for (auto& v : noise.flat()) v = rng.uniform01();
            const Table2 lam = random_lambda(5e-3);
            const ObjectiveSpec specs[] = {
                make_avg_surrogate(noise, 200.0, 0.0), make_lse_worst_surrogate(noise, 200.0, 0.0),
                make_asymptotic_avg(noise, 0.0), make_weighted_entropy(noise, 1e-3),
                make_entropy(S, A, 1e-3)};
            for (const auto& spec : specs) {
                const Table2 grad = spec.gradient(lam);
                Table2 probe = lam;
                double err = 0.0, scale = 1.0;
                for (std::size_t i = 0; i < lam.size(); ++i) {
                    const double h = 1e-6, orig = probe.flat()[i];
                    probe.flat()[i] = orig + h;
                    const double up = spec.value(probe);
                    probe.flat()[i] = orig - h;
                    const double down = spec.value(probe);
                    probe.flat()[i] = orig;
                    const double fd = (up - down) / (2.0 * h);
                    err = std::max(err, std::abs(grad.flat()[i] - fd));
                    scale = std::max(scale, std::abs(fd));
                }
                worst = std::max(worst, err / scale);
            }
        }
        out.detail << "  gradient vs finite differences: worst relative error " << fmt(worst)
                   << '\n';
        out.require(worst <= 1e-4, "gradients match finite differences within 1e-4 relative");
    }

    // (b) LSE sandwich on 1000 random vectors
    {
        bool ok = true;
        const std::size_t S = 3, A = 3;
        for (int trial = 0; trial < 1000 && ok; ++trial) {
            Table2 noise(S, A, 0.0), lam(S, A, 0.0);
            for (auto& v : noise.flat()) v = rng.uniform01();
            double total = 0.0;
            for (auto& x : lam.flat()) {
                x = 0.01 + rng.uniform01();
                total += x;
            }
            for (auto& x : lam.flat()) x /= total;
            const auto g = g_n(noise, lam, 50.0, S);
            const double peak = *std::max_element(g.flat().begin(), g.flat().end());
            const double lse = make_lse_worst_surrogate(noise, 50.0, 0.0).value(lam);
            ok = lse >= peak - 1e-12 && lse <= peak + std::log(9.0) + 1e-12;
        }
        out.require(ok, "max <= LSE <= max + log(SA) on 1000 random vectors");
    }

    // (c) |H_w - H_{w,mu}| <= mu S A W on random grids
    {
        bool ok = true;
        const std::size_t S = 3, A = 2;
        for (int trial = 0; trial < 500 && ok; ++trial) {
            Table2 w(S, A, 0.0), lam(S, A, 0.0);
            for (auto& v : w.flat()) v = rng.uniform01();
            double total = 0.0;
            for (auto& x : lam.flat()) {
                x = rng.uniform01();
                total += x;
            }
            for (auto& x : lam.flat()) x /= total;
            const double w_max = *std::max_element(w.flat().begin(), w.flat().end());
            for (double mu : {1e-5, 1e-3, 1e-2, 0.1}) {
                const double gap =
                    std::abs(weighted_entropy(w, lam) - smoothed_weighted_entropy(w, lam, mu));
                ok = ok && gap <= mu * S * A * w_max + 1e-12;
            }
        }
        out.require(ok, "|H_w - H_{w,mu}| <= mu S A W on random grids");
    }

    // (d) Bernstein coverage over 1000 Monte-Carlo replications
    {
        TabularMdp bernoulli{2, 1, Table3(2, 1, 2, 0.0)};
        bernoulli.transitions(0, 0, 1) = 0.3;
        bernoulli.transitions(0, 0, 0) = 0.7;
        bernoulli.transitions(1, 0, 0) = 1.0;
        const double delta = 0.1;
        int covered = 0;
        for (int rep = 0; rep < 1000; ++rep) {
            Counters counters(2, 1);
            bool ok = true;
            for (int t = 1; t <= 512; ++t) {
                update(counters, 0, 0, step(bernoulli, 0, 0, rng));
                if ((t & (t - 1)) == 0) {
                    const auto model = empirical_model(counters);
                    const auto set = bernstein_halfwidths(counters, model, delta);
                    for (std::size_t sp = 0; sp < 2; ++sp)
                        ok = ok && std::abs(model.p_hat(0, 0, sp) -
                                            bernoulli.transitions(0, 0, sp)) <=
                                       set.halfwidth(0, 0, sp);
                }
            }
            covered += ok ? 1 : 0;
        }
        out.detail << "  Bernstein coverage: " << covered << "/1000 (need >= 900)\n";
        out.require(covered >= 900, "Bernstein coverage at least 1 - delta");
    }

    // (e) extended-LP feasibility on simulated confidence sets
    {
        const auto mdp = build_noisy_riverswim(6);
        Counters counters(6, 4);
        std::size_t s = 0;
        for (int t = 0; t < 4000; ++t) {
            const std::size_t a = rng.uniform_index(4);
            const std::size_t next = step(mdp, s, a, rng);
            update(counters, s, a, next);
            s = next;
        }
        const auto model = empirical_model(counters);
        const auto set = bernstein_halfwidths(counters, model, 0.1);
        bool ok = true;
        for (int trial = 0; trial < 3; ++trial) {
            Table2 reward(6, 4, 0.0);
            for (auto& r : reward.flat()) r = rng.uniform01();
            const auto result = solve_extended_lp(reward, model.p_hat, set.halfwidth, 1e-4);
            ok = ok && result.status == LpStatus::Optimal;
            if (!ok) break;
            ok = ok && result.occupancy.flow_residual() <= 1e-8;
            const auto occ = extract_occupancy(result.occupancy);
            for (std::size_t st = 0; st < 6 && ok; ++st)
                for (std::size_t a = 0; a < 4 && ok; ++a) {
                    const double phi = occ.lam(st, a);
                    if (phi < 1e-4) continue;
                    for (std::size_t sp = 0; sp < 6; ++sp) {
                        const double implied = result.occupancy.q(st, a, sp) / phi;
                        const double ub =
                            std::min(1.0, model.p_hat(st, a, sp) + set.halfwidth(st, a, sp));
                        const double lb =
                            std::max(0.0, model.p_hat(st, a, sp) - set.halfwidth(st, a, sp));
                        ok = ok && implied >= lb - 1e-8 && implied <= ub + 1e-8;
                    }
                }
        }
        out.require(ok, "extended-LP solutions satisfy flow and interval constraints at 1e-8");
    }

    // (f) EVI with zero-width intervals vs policy enumeration on 2-3 state MDPs
    {
        // exact gain of the best deterministic policy via damped power iteration
        const auto oracle_gain = [](const TabularMdp& mdp, const Table2& reward) {
            const std::size_t S = mdp.num_states, A = mdp.num_actions;
            std::vector<std::size_t> choice(S, 0);
            double best = -1e300;
            while (true) {
                std::vector<NumVec> pmat(S, NumVec(S, 0.0));
                for (std::size_t st = 0; st < S; ++st)
                    for (std::size_t sp = 0; sp < S; ++sp)
                        pmat[st][sp] = mdp.transitions(st, choice[st], sp);
                for (std::size_t start = 0; start < S; ++start) {
                    NumVec nu(S, 0.0), next(S, 0.0);
                    nu[start] = 1.0;
                    for (int it = 0; it < 20000; ++it) {
                        std::fill(next.begin(), next.end(), 0.0);
                        for (std::size_t i = 0; i < S; ++i)
                            for (std::size_t jx = 0; jx < S; ++jx)
                                next[jx] += nu[i] * pmat[i][jx];
                        for (std::size_t jx = 0; jx < S; ++jx)
                            next[jx] = 0.5 * next[jx] + 0.5 * nu[jx];
                        nu.swap(next);
                    }
                    double gain = 0.0;
                    for (std::size_t st = 0; st < S; ++st) gain += nu[st] * reward(st, choice[st]);
                    best = std::max(best, gain);
                }
                std::size_t pos = 0;
                while (pos < S && ++choice[pos] == A) choice[pos++] = 0;
                if (pos == S) break;
            }
            return best;
        };
        std::vector<TabularMdp> corpus;
        TabularMdp cycle{2, 2, Table3(2, 2, 2, 0.0)};
        cycle.transitions(0, 0, 1) = 1.0;
        cycle.transitions(1, 0, 0) = 1.0;
        cycle.transitions(0, 1, 0) = 1.0;
        cycle.transitions(1, 1, 1) = 1.0;
        corpus.push_back(cycle);
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) corpus.push_back(build_garnet(2, 2, 2, seed));
        for (std::uint64_t seed : {4ULL, 5ULL, 6ULL}) corpus.push_back(build_garnet(3, 3, 3, seed));
        double worst = 0.0;
        for (const auto& mdp : corpus) {
            Table2 reward(mdp.num_states, mdp.num_actions, 0.0);
            for (auto& r : reward.flat()) r = rng.uniform01();
            const auto result =
                evi(reward, mdp.transitions, Table3(mdp.num_states, mdp.num_actions, mdp.num_states, 0.0),
                    1e-8);
            worst = std::max(worst, std::abs(result.gain - oracle_gain(mdp, reward)));
        }
        out.detail << "  EVI vs policy enumeration: worst gain error " << fmt(worst) << '\n';
        out.require(worst <= 1e-6, "EVI gain matches policy enumeration within 1e-6");
    }

    // (g) simulation lemma: 100 random rewards at gamma = 0.9
    {
        double worst = 0.0;
        for (std::uint64_t seed : {11ULL, 12ULL}) {
            const auto mdp = build_garnet(5, 5, 5, seed);
            Rng sampler(seed);
            const auto p_hat = sampled_model(mdp, 150, sampler);
            const auto report = simulation_lemma_check(mdp, p_hat, 0.9, 50, seed);
            worst = std::max(worst, report.max_ratio);
        }
        out.detail << "  simulation-lemma worst ratio " << fmt(worst) << " (bound 2)\n";
        out.require(worst <= 2.0, "simulation-lemma ratio at most 2 over 100 rewards");
    }
    return out;
}

// ------------------------------------------------------------------------- 7
Outcome criterion_determinism() {
    Outcome out;
    ExperimentConfig config;
    config.envs = {"wheel:5", "garnet:5x5x5:3"};
    config.algos = {Algorithm::Uniform, Algorithm::MaxEnt, Algorithm::WeightedMaxEnt,
                    Algorithm::FwModest};
    config.budget = 3000;
    config.runs = 2;
    config.checkpoints = 8;
    config.fw_schedule = EpisodeSchedule::FixedLength;
    config.fw_fixed_length = 300;
    config.threads = 0;

    std::ostringstream first, second;
    write_results_csv(run_experiment(config), first);
    config.threads = 3;  // scheduling must not affect the merged output
    write_results_csv(run_experiment(config), second);
    out.require(first.str() == second.str(),
                "rerunning the same config reproduces the CSV byte for byte");
    out.detail << "  " << std::count(first.str().begin(), first.str().end(), '\n')
               << " CSV lines compared\n";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    const auto enabled = [&](int n) { return selected.empty() || selected.count(n) > 0; };

    int failures = 0;
    const auto report = [&](int n, const char* label, Outcome outcome) {
        std::printf("[%d] %-58s %s\n", n, label, outcome.pass ? "PASS" : "FAIL");
        std::fputs(outcome.detail.str().c_str(), stdout);
        std::fflush(stdout);
        if (!outcome.pass) ++failures;
    };

    if (enabled(1))
        report(1, "Optimal-allocation errors, Wheel(5)",
               criterion_allocation_errors(build_wheel(5), "wheel(5)", 1.0045e-3, 0.5091e-3, 0.5091e-3,
                                10000));
    if (enabled(2))
        report(2, "Optimal-allocation errors, NoisyRiverSwim(12)",
               criterion_allocation_errors(build_noisy_riverswim(12), "nrs(12)", 0.4197e-2, 0.2862e-2,
                                0.2851e-2, 40000));
    if (enabled(3))
        report(3, "Wheel(5) optimal allocation matrices", criterion_wheel_matrices());
    if (enabled(4))
        report(4, "Learning-curve ordering on NoisyRiverSwim(12), 20 runs",
               criterion_learning_curves());
    if (enabled(5)) report(5, "Garnet G(5,5,5) sweep: 10 instances x 20 runs", criterion_garnet_sweep());
    if (enabled(6)) report(6, "Property suite", criterion_property_suite());
    if (enabled(7)) report(7, "Determinism of seeded experiment runs", criterion_determinism());

    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
