// modest: reward-free exploration for tabular MDP model estimation.
//
// Subcommands:
//   run      seeded multi-run experiments from a JSON config -> results CSV
//   optimal  exact optimal allocation for an objective under a known model
//   plot     learning-curve SVG from a results CSV
//   simlemma empirical simulation-lemma check on a sampled model
//   dump-env JSON dump of an environment's transition tensor

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "modest/harness.hpp"
#include "modest/optimal.hpp"

using namespace modest;

namespace {

std::string iso_timestamp() {
    std::time_t now = std::time(nullptr);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buffer;
}

int command_run(const std::string& config_path, const std::string& out_path,
                const std::string& agg_path, bool no_timestamp) {
    std::ifstream in(config_path);
    if (!in) throw InvalidConfigError("cannot open config file: " + config_path);
    json config_json = json::parse(in);
    const ExperimentConfig config = experiment_config_from_json(config_json);
    const auto rows = run_experiment(config);

    std::ofstream out(out_path);
    if (!out) throw InvalidConfigError("cannot open output path: " + out_path);
    write_results_csv(rows, out, no_timestamp ? "" : iso_timestamp());

    const std::string aggregate_path =
        agg_path.empty() ? out_path + ".agg.csv" : agg_path;
    std::ofstream agg(aggregate_path);
    if (!agg) throw InvalidConfigError("cannot open aggregate path: " + aggregate_path);
    write_aggregate_csv(aggregate_results(rows), agg);

    std::cerr << "wrote " << rows.size() << " rows to " << out_path << " (aggregates: "
              << aggregate_path << ")\n";
    return 0;
}

int command_optimal(const std::string& env_id, const std::string& objective, std::uint64_t n,
                    double eta, double mu, std::size_t iterations, double delta,
                    const std::string& out_path, std::uint64_t eval_seeds) {
    const auto mdp = build_env(env_id);
    OptimalAllocation allocation;
    if (objective == "entropy") {
        allocation = maxent_allocation(mdp, mu, iterations);
    } else if (objective == "weighted-entropy") {
        allocation = weighted_maxent_allocation(mdp, mu, iterations, delta);
    } else if (objective == "asymptotic-avg") {
        allocation = modest_allocation(mdp, eta, iterations);
    } else if (objective == "avg-surrogate") {
        allocation = exact_fw(mdp, make_avg_surrogate(noise_table(mdp), static_cast<double>(n), eta),
                              eta, iterations);
    } else if (objective == "lse-worst-surrogate") {
        allocation = exact_fw(
            mdp, make_lse_worst_surrogate(noise_table(mdp), static_cast<double>(n), eta), eta,
            iterations);
    } else if (objective == "asymptotic-worst") {
        allocation = exact_fw(mdp, make_asymptotic_worst(noise_table(mdp), eta), eta, iterations);
    } else {
        throw InvalidConfigError("unknown objective kind: " + objective);
    }

    json report{{"env", env_id},
                {"objective", objective_name(allocation.kind)},
                {"objective_value", allocation.objective_value},
                {"iterations", allocation.iterations},
                {"fw_gap", allocation.fw_gap}};
    if (allocation.mu_used > 0.0) {
        report["mu_used"] = allocation.mu_used;
        report["entropy_bias_bound"] = allocation.entropy_bias_bound;
    }
    if (eval_seeds > 0) {
        double acc = 0.0;
        for (std::uint64_t seed = 0; seed < eval_seeds; ++seed)
            acc += fixed_allocation_error(mdp, allocation.lam_star, n, seed);
        report["expected_error_avg"] = acc / static_cast<double>(eval_seeds);
        report["eval_seeds"] = eval_seeds;
        report["eval_budget"] = n;
    }
    std::cout << report.dump(2) << '\n';

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw InvalidConfigError("cannot open output path: " + out_path);
        write_allocation_csv(allocation.lam_star, out);
        std::cerr << "wrote allocation matrix to " << out_path << '\n';
    } else {
        std::ostringstream matrix;
        write_allocation_csv(allocation.lam_star, matrix);
        std::cout << matrix.str();
    }
    return 0;
}

int command_plot(const std::string& in_path, const std::string& out_path) {
    std::ifstream in(in_path);
    if (!in) throw InvalidConfigError("cannot open results CSV: " + in_path);
    const auto rows = read_results_csv(in);
    emit_plot_file(rows, out_path);
    std::cerr << "wrote plot to " << out_path << '\n';
    return 0;
}

int command_simlemma(const std::string& env_id, double gamma, std::size_t trials,
                     std::size_t samples, std::uint64_t seed) {
    const auto mdp = build_env(env_id);
    Rng rng(seed);
    const Table3 p_hat = sampled_model(mdp, samples, rng);
    const auto report = simulation_lemma_check(mdp, p_hat, gamma, trials, seed + 1);
    json out{{"env", env_id},
             {"gamma", gamma},
             {"trials", report.trials},
             {"samples_per_pair", samples},
             {"epsilon", report.epsilon},
             {"max_suboptimality", report.max_suboptimality},
             {"max_ratio", report.max_ratio}};
    std::cout << out.dump(2) << '\n';
    return 0;
}

int command_dump_env(const std::string& env_id, const std::string& out_path) {
    const auto mdp = build_env(env_id);
    const json dump = env_to_json(mdp);
    if (out_path.empty()) {
        std::cout << dump.dump(2) << '\n';
    } else {
        std::ofstream out(out_path);
        if (!out) throw InvalidConfigError("cannot open output path: " + out_path);
        out << dump.dump(2) << '\n';
        std::cerr << "wrote " << out_path << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reward-free exploration algorithms for tabular MDP model estimation"};
    app.require_subcommand(1);

    // run
    std::string config_path, out_path = "results.csv", agg_path;
    bool no_timestamp = false;
    auto* run_cmd = app.add_subcommand("run", "execute a seeded multi-run experiment");
    run_cmd->add_option("--config", config_path, "JSON experiment config")->required();
    run_cmd->add_option("--out", out_path, "results CSV path (default results.csv)");
    run_cmd->add_option("--agg-out", agg_path, "aggregate CSV path (default <out>.agg.csv)");
    run_cmd->add_flag("--no-timestamp", no_timestamp, "omit the timestamp comment line");

    // optimal
    std::string env_id, objective = "entropy", alloc_out;
    std::uint64_t n = 2000000, eval_seeds = 0;
    double eta = 1e-4, mu = 0.0, delta = 0.1;
    std::size_t iterations = 10000;
    auto* optimal_cmd =
        app.add_subcommand("optimal", "compute an optimal allocation for a known model");
    optimal_cmd->add_option("--env", env_id, "environment id, e.g. wheel:5")->required();
    optimal_cmd
        ->add_option("--objective", objective,
                     "entropy | weighted-entropy | asymptotic-avg | asymptotic-worst | "
                     "avg-surrogate | lse-worst-surrogate")
        ->required();
    optimal_cmd->add_option("--n", n, "budget for surrogates and error evaluation (default 2e6)");
    optimal_cmd->add_option("--eta", eta, "occupancy floor (default 1e-4)");
    optimal_cmd->add_option("--mu", mu, "entropy smoothing; 0 applies the 1e-12 guard");
    optimal_cmd->add_option("--iters", iterations, "Frank-Wolfe iterations (default 10000)");
    optimal_cmd->add_option("--delta", delta, "confidence for the weight scaling (default 0.1)");
    optimal_cmd->add_option("--out", alloc_out, "write the allocation matrix CSV here");
    optimal_cmd->add_option("--eval-seeds", eval_seeds,
                            "if set, also report the sampled estimation error over this many seeds");

    // plot
    std::string plot_in, plot_out = "curves.svg";
    auto* plot_cmd = app.add_subcommand("plot", "render learning curves from a results CSV");
    plot_cmd->add_option("--in", plot_in, "results CSV")->required();
    plot_cmd->add_option("--out", plot_out, "SVG output path (default curves.svg)");

    // simlemma
    std::string sim_env;
    double gamma = 0.9;
    std::size_t trials = 100, samples = 200;
    std::uint64_t sim_seed = 0;
    auto* sim_cmd = app.add_subcommand("simlemma", "empirical simulation-lemma check");
    sim_cmd->add_option("--env", sim_env, "environment id")->required();
    sim_cmd->add_option("--gamma", gamma, "discount factor (default 0.9)");
    sim_cmd->add_option("--trials", trials, "random reward functions (default 100)");
    sim_cmd->add_option("--samples", samples, "samples per pair for the model (default 200)");
    sim_cmd->add_option("--seed", sim_seed, "sampling seed (default 0)");

    // dump-env
    std::string dump_env_id, dump_out;
    auto* dump_cmd = app.add_subcommand("dump-env", "JSON dump of the transition tensor");
    dump_cmd->add_option("--env", dump_env_id, "environment id")->required();
    dump_cmd->add_option("--out", dump_out, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);
    try {
        if (run_cmd->parsed()) return command_run(config_path, out_path, agg_path, no_timestamp);
        if (optimal_cmd->parsed())
            return command_optimal(env_id, objective, n, eta, mu, iterations, delta, alloc_out,
                                   eval_seeds);
        if (plot_cmd->parsed()) return command_plot(plot_in, plot_out);
        if (sim_cmd->parsed()) return command_simlemma(sim_env, gamma, trials, samples, sim_seed);
        if (dump_cmd->parsed()) return command_dump_env(dump_env_id, dump_out);
    } catch (const std::exception& err) {
        json error_line{{"error", err.what()}};
        std::cerr << error_line.dump() << '\n';
        return 1;
    }
    return 0;
}
