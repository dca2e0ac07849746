#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "modest/fw_modest.hpp"
#include "modest/json_io.hpp"
#include "modest/mdp.hpp"
#include "modest/run_types.hpp"
#include "modest/types.hpp"
#include "modest/weighted_maxent.hpp"

namespace modest {

// ---------------------------------------------------------------------------
// Experiment configuration and result rows
// ---------------------------------------------------------------------------

enum class Algorithm { Uniform, MaxEnt, WeightedMaxEnt, FwModest };

inline const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::Uniform: return "uniform";
        case Algorithm::MaxEnt: return "maxent";
        case Algorithm::WeightedMaxEnt: return "weighted-maxent";
        case Algorithm::FwModest: return "fw-modest";
    }
    return "unknown";
}

inline Algorithm algorithm_from_name(const std::string& name) {
    if (name == "uniform") return Algorithm::Uniform;
    if (name == "maxent") return Algorithm::MaxEnt;
    if (name == "weighted-maxent") return Algorithm::WeightedMaxEnt;
    if (name == "fw-modest") return Algorithm::FwModest;
    throw InvalidConfigError("unknown algorithm id: " + name);
}

struct ExperimentConfig {
    std::vector<std::string> envs;
    std::vector<Algorithm> algos;
    std::uint64_t budget = 100000;
    std::size_t runs = 20;
    double delta = 0.1;
    double eta = 1e-4;
    double mu = 0.0;  // 0 = budget-based default
    std::uint64_t seed_base = 0;
    std::size_t checkpoints = 40;
    ObjectiveKind fw_objective = ObjectiveKind::AvgSurrogate;
    EpisodeSchedule fw_schedule = EpisodeSchedule::PaperCubic;
    std::uint64_t fw_fixed_length = 500;
    bool oracle = false;  // true noise/model for fw-modest and weighted-maxent
    bool strict_doubling = false;
    std::size_t threads = 0;  // 0 = hardware concurrency
    std::string run_log_prefix;

    void validate() const {
        if (envs.empty()) throw InvalidConfigError("config needs at least one environment");
        if (algos.empty()) throw InvalidConfigError("config needs at least one algorithm");
        if (runs < 1) throw InvalidConfigError("runs must be at least 1");
        if (budget < 1) throw InvalidConfigError("budget must be at least 1");
        if (!(delta > 0.0 && delta < 1.0)) throw InvalidConfigError("delta must lie in (0, 1)");
        for (const auto& env : envs) parse_env_id(env);
    }
};

inline ExperimentConfig experiment_config_from_json(const json& j) {
    ExperimentConfig config;
    if (j.contains("env")) config.envs.push_back(j.at("env").get<std::string>());
    if (j.contains("envs"))
        for (const auto& e : j.at("envs")) config.envs.push_back(e.get<std::string>());
    if (j.contains("algos"))
        for (const auto& a : j.at("algos"))
            config.algos.push_back(algorithm_from_name(a.get<std::string>()));
    config.budget = j.value("n", config.budget);
    config.runs = j.value("runs", config.runs);
    config.delta = j.value("delta", config.delta);
    config.eta = j.value("eta", config.eta);
    config.mu = j.value("mu", config.mu);
    config.seed_base = j.value("seed_base", config.seed_base);
    config.checkpoints = j.value("checkpoints", config.checkpoints);
    config.oracle = j.value("oracle", config.oracle);
    config.strict_doubling = j.value("strict_doubling", config.strict_doubling);
    config.threads = j.value("threads", config.threads);
    config.run_log_prefix = j.value("run_log", config.run_log_prefix);
    if (j.contains("objective")) {
        const std::string name = j.at("objective").get<std::string>();
        if (name == "avg-surrogate")
            config.fw_objective = ObjectiveKind::AvgSurrogate;
        else if (name == "lse-worst-surrogate")
            config.fw_objective = ObjectiveKind::LseWorstSurrogate;
        else
            throw InvalidConfigError("learner objective must be avg-surrogate or lse-worst-surrogate");
    }
    if (j.contains("episode_schedule")) {
        const auto& sched = j.at("episode_schedule");
        if (sched.is_string() && sched.get<std::string>() == "cubic") {
            config.fw_schedule = EpisodeSchedule::PaperCubic;
        } else if (sched.is_number_unsigned() || sched.is_number_integer()) {
            config.fw_schedule = EpisodeSchedule::FixedLength;
            config.fw_fixed_length = sched.get<std::uint64_t>();
        } else {
            throw InvalidConfigError("episode_schedule must be \"cubic\" or a fixed length");
        }
    }
    config.validate();
    return config;
}

/// One checkpoint of one run: the raw results-CSV record.
struct ResultRow {
    std::string env;
    std::string algo;
    std::uint64_t seed = 0;
    std::uint64_t step = 0;
    double error_avg = 0.0;
    double error_max = 0.0;
};

struct AggregateRow {
    std::string env;
    std::string algo;
    std::uint64_t step = 0;
    double mean_error_avg = 0.0;
    double std_error_avg = 0.0;
    double mean_error_max = 0.0;
    double std_error_max = 0.0;
    std::size_t runs = 0;
};

namespace detail {

inline std::string format_error(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.9e", value);  // 10 significant digits
    return buffer;
}

}  // namespace detail

/// Raw results CSV. The timestamp comment is the only line allowed to vary
/// between identical runs.
inline void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out,
                              const std::string& timestamp = "") {
    if (!timestamp.empty()) out << "# generated " << timestamp << '\n';
    out << "env,algo,seed,step,error_avg,error_max\n";
    for (const auto& row : rows)
        out << row.env << ',' << row.algo << ',' << row.seed << ',' << row.step << ','
            << detail::format_error(row.error_avg) << ',' << detail::format_error(row.error_max)
            << '\n';
}

inline std::vector<ResultRow> read_results_csv(std::istream& in) {
    std::vector<ResultRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("env,", 0) == 0) continue;
        std::istringstream fields(line);
        ResultRow row;
        std::string seed, step, e, w;
        if (!std::getline(fields, row.env, ',') || !std::getline(fields, row.algo, ',') ||
            !std::getline(fields, seed, ',') || !std::getline(fields, step, ',') ||
            !std::getline(fields, e, ',') || !std::getline(fields, w))
            throw InvalidConfigError("malformed results CSV line: " + line);
        row.seed = std::stoull(seed);
        row.step = std::stoull(step);
        row.error_avg = std::stod(e);
        row.error_max = std::stod(w);
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Mean and sample standard deviation per (env, algo, step), in row order.
inline std::vector<AggregateRow> aggregate_results(const std::vector<ResultRow>& rows) {
    std::map<std::tuple<std::string, std::string, std::uint64_t>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < rows.size(); ++i)
        groups[{rows[i].env, rows[i].algo, rows[i].step}].push_back(i);
    std::vector<AggregateRow> out;
    out.reserve(groups.size());
    for (const auto& [key, indices] : groups) {
        AggregateRow agg;
        agg.env = std::get<0>(key);
        agg.algo = std::get<1>(key);
        agg.step = std::get<2>(key);
        agg.runs = indices.size();
        double me = 0.0, mw = 0.0;
        for (std::size_t i : indices) {
            me += rows[i].error_avg;
            mw += rows[i].error_max;
        }
        me /= static_cast<double>(indices.size());
        mw /= static_cast<double>(indices.size());
        double ve = 0.0, vw = 0.0;
        for (std::size_t i : indices) {
            ve += (rows[i].error_avg - me) * (rows[i].error_avg - me);
            vw += (rows[i].error_max - mw) * (rows[i].error_max - mw);
        }
        const double denom = indices.size() > 1 ? static_cast<double>(indices.size() - 1) : 1.0;
        agg.mean_error_avg = me;
        agg.std_error_avg = std::sqrt(ve / denom);
        agg.mean_error_max = mw;
        agg.std_error_max = std::sqrt(vw / denom);
        out.push_back(std::move(agg));
    }
    return out;
}

inline void write_aggregate_csv(const std::vector<AggregateRow>& rows, std::ostream& out) {
    out << "env,algo,step,mean_error_avg,std_error_avg,mean_error_max,std_error_max,runs\n";
    for (const auto& row : rows)
        out << row.env << ',' << row.algo << ',' << row.step << ','
            << detail::format_error(row.mean_error_avg) << ','
            << detail::format_error(row.std_error_avg) << ','
            << detail::format_error(row.mean_error_max) << ','
            << detail::format_error(row.std_error_max) << ',' << row.runs << '\n';
}

// ---------------------------------------------------------------------------
// Experiment orchestration
// ---------------------------------------------------------------------------

namespace detail {

struct RunOutput {
    std::vector<ResultRow> rows;
    std::string run_log;  // JSON lines, empty when logging is off
};

inline RunOutput execute_one_run(const TabularMdp& mdp, const std::string& env_id,
                                 Algorithm algo, std::uint64_t seed,
                                 const ExperimentConfig& config,
                                 const std::vector<std::uint64_t>& grid) {
    RunOutput out;
    ErrorCurve curve;
    std::ostringstream log;
    switch (algo) {
        case Algorithm::Uniform: {
            curve = uniform_baseline_run(mdp, config.budget, seed, grid).curve;
            break;
        }
        case Algorithm::MaxEnt:
        case Algorithm::WeightedMaxEnt: {
            WmeConfig wme;
            wme.budget = config.budget;
            wme.delta = config.delta;
            wme.mu = config.mu;
            wme.strict_all_pairs_doubling = config.strict_doubling;
            wme.weight_mode = algo == Algorithm::MaxEnt
                                  ? WeightMode::UnitWeights
                                  : (config.oracle ? WeightMode::KnownNoise
                                                   : WeightMode::OptimisticNoise);
            auto result = weighted_maxent_run(mdp, wme, seed, grid);
            curve = std::move(result.curve);
            if (!config.run_log_prefix.empty())
                for (const auto& ep : result.episodes) log << episode_to_json(ep) << '\n';
            break;
        }
        case Algorithm::FwModest: {
            FwConfig fw;
            fw.budget = config.budget;
            fw.delta = config.delta;
            fw.eta = config.eta;
            fw.objective = config.fw_objective;
            fw.schedule = config.fw_schedule;
            fw.fixed_length = config.fw_fixed_length;
            fw.oracle_mode = config.oracle;
            auto result = fw_modest_run(mdp, fw, seed, grid);
            curve = std::move(result.curve);
            if (!config.run_log_prefix.empty())
                for (const auto& ep : result.episodes) log << episode_to_json(ep) << '\n';
            break;
        }
    }
    out.rows.reserve(curve.size());
    for (const auto& point : curve)
        out.rows.push_back({env_id, algorithm_name(algo), seed, point.step, point.error_avg,
                            point.error_max});
    out.run_log = log.str();
    return out;
}

}  // namespace detail

/// Runs `runs` seeded replications of every (environment, algorithm) pair.
/// Jobs fan out to a worker pool; outputs are merged in job order, so the
/// result is independent of scheduling. Run r uses seed seed_base + r.
inline std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto grid = checkpoint_grid(config.budget, config.checkpoints);

    struct Job {
        std::size_t env_index;
        Algorithm algo;
        std::uint64_t seed;
    };
    std::vector<TabularMdp> mdps;
    mdps.reserve(config.envs.size());
    for (const auto& id : config.envs) mdps.push_back(build_env(id));
    std::vector<Job> jobs;
    for (std::size_t e = 0; e < config.envs.size(); ++e)
        for (Algorithm algo : config.algos)
            for (std::size_t r = 0; r < config.runs; ++r)
                jobs.push_back({e, algo, config.seed_base + r});

    std::vector<detail::RunOutput> outputs(jobs.size());
    std::vector<std::string> failures(jobs.size());
    std::atomic<std::size_t> next_job{0};
    const std::size_t worker_count =
        std::max<std::size_t>(1, config.threads != 0 ? config.threads
                                                     : std::thread::hardware_concurrency());
    auto worker = [&] {
        while (true) {
            const std::size_t index = next_job.fetch_add(1);
            if (index >= jobs.size()) return;
            const Job& job = jobs[index];
            try {
                outputs[index] = detail::execute_one_run(mdps[job.env_index],
                                                         config.envs[job.env_index], job.algo,
                                                         job.seed, config, grid);
            } catch (const std::exception& err) {
                failures[index] = std::string(err.what());
            }
        }
    };
    if (worker_count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < worker_count; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (std::size_t i = 0; i < jobs.size(); ++i)
        if (!failures[i].empty())
            throw SolverError("run " + config.envs[jobs[i].env_index] + "/" +
                              algorithm_name(jobs[i].algo) + "/seed " +
                              std::to_string(jobs[i].seed) + " failed: " + failures[i]);

    std::vector<ResultRow> rows;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        for (auto& row : outputs[i].rows) rows.push_back(std::move(row));
        if (!config.run_log_prefix.empty() && !outputs[i].run_log.empty()) {
            const Job& job = jobs[i];
            std::ostringstream name;
            name << config.run_log_prefix << '-' << config.envs[job.env_index] << '-'
                 << algorithm_name(job.algo) << '-' << job.seed << ".jsonl";
            std::string path = name.str();
            std::replace(path.begin(), path.end(), ':', '_');
            std::ofstream log_file(path);
            log_file << outputs[i].run_log;
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Simulation-lemma check
// ---------------------------------------------------------------------------

namespace detail {

/// Discounted value iteration; returns optimal values and a greedy policy.
inline std::pair<NumVec, std::vector<std::size_t>> discounted_vi(const Table3& p,
                                                                 const Table2& reward,
                                                                 double gamma, double tol) {
    const std::size_t S = p.dim0(), A = p.dim1();
    NumVec u(S, 0.0), u_next(S, 0.0);
    std::vector<std::size_t> greedy(S, 0);
    for (std::size_t sweep = 0; sweep < 100000; ++sweep) {
        double diff = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            std::size_t best_action = 0;
            for (std::size_t a = 0; a < A; ++a) {
                double value = reward(s, a);
                const auto row = p.row(s, a);
                for (std::size_t sp = 0; sp < S; ++sp) value += gamma * row[sp] * u[sp];
                if (value > best) {
                    best = value;
                    best_action = a;
                }
            }
            u_next[s] = best;
            greedy[s] = best_action;
            diff = std::max(diff, std::abs(u_next[s] - u[s]));
        }
        u.swap(u_next);
        if (diff <= tol) break;
    }
    return {u, greedy};
}

/// Exact discounted value of a deterministic policy via the linear system.
inline NumVec policy_value(const Table3& p, const Table2& reward,
                           const std::vector<std::size_t>& policy, double gamma) {
    const std::size_t S = p.dim0();
    std::vector<NumVec> a(S, NumVec(S, 0.0));
    NumVec b(S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        b[s] = reward(s, policy[s]);
        for (std::size_t sp = 0; sp < S; ++sp)
            a[s][sp] = (s == sp ? 1.0 : 0.0) - gamma * p(s, policy[s], sp);
    }
    return solve_linear_system(std::move(a), std::move(b));
}

}  // namespace detail

struct SimLemmaReport {
    double epsilon = 0.0;    // worst-case l1 model error of p_hat
    double max_ratio = 0.0;  // suboptimality / (epsilon (1-gamma)^-2), worst reward
    double max_suboptimality = 0.0;
    std::size_t trials = 0;
};

/// For random rewards in [0,1]: plan on p_hat, evaluate in the true model,
/// and compare the suboptimality to the simulation-lemma scale
/// epsilon (1-gamma)^-2. Ratios are defined as 0 when epsilon = 0.
inline SimLemmaReport simulation_lemma_check(const TabularMdp& mdp, const Table3& p_hat,
                                             double gamma, std::size_t trials,
                                             std::uint64_t seed = 0) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidConfigError("gamma must lie in (0, 1)");
    const std::size_t S = mdp.num_states, A = mdp.num_actions;
    SimLemmaReport report;
    report.trials = trials;
    report.epsilon = error_max(p_hat, mdp.transitions);
    const double scale = report.epsilon / ((1.0 - gamma) * (1.0 - gamma));
    Rng rng(seed);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        Table2 reward(S, A, 0.0);
        for (auto& r : reward.flat()) r = rng.uniform01();
        const auto planned = detail::discounted_vi(p_hat, reward, gamma, 1e-10);
        const auto truth = detail::discounted_vi(mdp.transitions, reward, gamma, 1e-10);
        const NumVec achieved = detail::policy_value(mdp.transitions, reward, planned.second, gamma);
        double suboptimality = 0.0;
        for (std::size_t s = 0; s < S; ++s)
            suboptimality = std::max(suboptimality, truth.first[s] - achieved[s]);
        suboptimality = std::max(suboptimality, 0.0);
        report.max_suboptimality = std::max(report.max_suboptimality, suboptimality);
        if (scale > 0.0) report.max_ratio = std::max(report.max_ratio, suboptimality / scale);
    }
    return report;
}

/// Plug-in model from m i.i.d. draws per state-action pair.
inline Table3 sampled_model(const TabularMdp& mdp, std::size_t draws_per_pair, Rng& rng) {
    Table3 p_hat(mdp.num_states, mdp.num_actions, mdp.num_states, 0.0);
    for (std::size_t s = 0; s < mdp.num_states; ++s)
        for (std::size_t a = 0; a < mdp.num_actions; ++a) {
            for (std::size_t i = 0; i < draws_per_pair; ++i)
                p_hat(s, a, rng.categorical(mdp.row(s, a))) += 1.0;
            for (std::size_t sp = 0; sp < mdp.num_states; ++sp)
                p_hat(s, a, sp) /= static_cast<double>(draws_per_pair);
        }
    return p_hat;
}

// ---------------------------------------------------------------------------
// Learning-curve plots (self-contained SVG)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string svg_color(std::size_t index) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
    return palette[index % 8];
}

}  // namespace detail

/// Mean curves with a +-1 std band per (env, algo), one panel per
/// environment, log-log axes.
inline void emit_plot(const std::vector<ResultRow>& rows, std::ostream& out) {
    if (rows.empty()) throw InvalidConfigError("no result rows: nothing to plot");
    const auto aggregates = aggregate_results(rows);

    std::vector<std::string> envs;
    for (const auto& agg : aggregates)
        if (std::find(envs.begin(), envs.end(), agg.env) == envs.end()) envs.push_back(agg.env);

    const double panel_w = 460.0, panel_h = 360.0, margin = 58.0, gap = 28.0;
    const double width = margin + envs.size() * (panel_w + gap) + 8.0;
    const double height = margin + panel_h + 56.0;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"Helvetica,Arial,sans-serif\" font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t e = 0; e < envs.size(); ++e) {
        const std::string& env = envs[e];
        const double x0 = margin + e * (panel_w + gap);
        const double y0 = 30.0;

        double min_x = 1e300, max_x = 0.0, min_y = 1e300, max_y = 0.0;
        std::vector<std::string> algo_order;
        for (const auto& agg : aggregates) {
            if (agg.env != env) continue;
            if (std::find(algo_order.begin(), algo_order.end(), agg.algo) == algo_order.end())
                algo_order.push_back(agg.algo);
            min_x = std::min(min_x, static_cast<double>(agg.step));
            max_x = std::max(max_x, static_cast<double>(agg.step));
            if (agg.mean_error_avg > 0.0) {
                min_y = std::min(min_y, agg.mean_error_avg);
                max_y = std::max(max_y, agg.mean_error_avg + agg.std_error_avg);
            }
        }
        if (min_y >= 1e300) {
            min_y = 1e-6;
            max_y = 1.0;
        }
        min_y = std::max(min_y / 2.0, 1e-12);
        max_y *= 1.5;
        if (max_x <= min_x) max_x = min_x + 1.0;

        const auto map_x = [&](double step) {
            return x0 + (std::log(step) - std::log(min_x)) /
                            (std::log(max_x) - std::log(min_x)) * panel_w;
        };
        const auto map_y = [&](double value) {
            value = std::min(std::max(value, min_y), max_y);
            return y0 + panel_h - (std::log(value) - std::log(min_y)) /
                                      (std::log(max_y) - std::log(min_y)) * panel_h;
        };

        out << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << panel_w
            << "\" height=\"" << panel_h << "\" fill=\"none\" stroke=\"#333\"/>\n";
        out << "<text x=\"" << x0 + panel_w / 2 << "\" y=\"" << y0 - 10
            << "\" text-anchor=\"middle\" font-size=\"13\">" << env << "</text>\n";

        // decade ticks
        for (int exp10 = static_cast<int>(std::ceil(std::log10(min_y)));
             exp10 <= static_cast<int>(std::floor(std::log10(max_y))); ++exp10) {
            const double value = std::pow(10.0, exp10);
            const double y = map_y(value);
            out << "<line x1=\"" << x0 << "\" y1=\"" << y << "\" x2=\"" << x0 + panel_w
                << "\" y2=\"" << y << "\" stroke=\"#ddd\"/>\n";
            out << "<text x=\"" << x0 - 6 << "\" y=\"" << y + 4
                << "\" text-anchor=\"end\">1e" << exp10 << "</text>\n";
        }
        for (int exp10 = static_cast<int>(std::ceil(std::log10(min_x)));
             exp10 <= static_cast<int>(std::floor(std::log10(max_x))); ++exp10) {
            const double value = std::pow(10.0, exp10);
            const double x = map_x(value);
            out << "<line x1=\"" << x << "\" y1=\"" << y0 << "\" x2=\"" << x << "\" y2=\""
                << y0 + panel_h << "\" stroke=\"#eee\"/>\n";
            out << "<text x=\"" << x << "\" y=\"" << y0 + panel_h + 16
                << "\" text-anchor=\"middle\">1e" << exp10 << "</text>\n";
        }
        out << "<text x=\"" << x0 + panel_w / 2 << "\" y=\"" << y0 + panel_h + 34
            << "\" text-anchor=\"middle\">steps</text>\n";

        for (std::size_t ai = 0; ai < algo_order.size(); ++ai) {
            const std::string& algo = algo_order[ai];
            std::vector<const AggregateRow*> series;
            for (const auto& agg : aggregates)
                if (agg.env == env && agg.algo == algo) series.push_back(&agg);
            std::sort(series.begin(), series.end(),
                      [](const AggregateRow* a, const AggregateRow* b) { return a->step < b->step; });
            const std::string color = detail::svg_color(ai);

            bool banded = false;
            for (const auto* agg : series) banded = banded || agg->runs > 1;
            if (banded) {
                out << "<polygon fill=\"" << color << "\" opacity=\"0.15\" points=\"";
                for (const auto* agg : series)
                    out << map_x(static_cast<double>(agg->step)) << ','
                        << map_y(agg->mean_error_avg + agg->std_error_avg) << ' ';
                for (auto it = series.rbegin(); it != series.rend(); ++it)
                    out << map_x(static_cast<double>((*it)->step)) << ','
                        << map_y(std::max((*it)->mean_error_avg - (*it)->std_error_avg,
                                          min_y))
                        << ' ';
                out << "\"/>\n";
            }
            out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
            for (const auto* agg : series)
                out << map_x(static_cast<double>(agg->step)) << ',' << map_y(agg->mean_error_avg)
                    << ' ';
            out << "\"/>\n";
            // legend
            const double ly = y0 + 16.0 + 16.0 * ai;
            out << "<line x1=\"" << x0 + panel_w - 120 << "\" y1=\"" << ly << "\" x2=\""
                << x0 + panel_w - 98 << "\" y2=\"" << ly << "\" stroke=\"" << color
                << "\" stroke-width=\"2\"/>\n";
            out << "<text x=\"" << x0 + panel_w - 92 << "\" y=\"" << ly + 4 << "\">" << algo
                << "</text>\n";
        }
    }
    out << "</svg>\n";
}

inline void emit_plot_file(const std::vector<ResultRow>& rows, const std::string& path) {
    if (rows.empty()) throw InvalidConfigError("no result rows: nothing to plot");
    std::ofstream out(path);
    if (!out) throw InvalidConfigError("cannot open plot output path: " + path);
    emit_plot(rows, out);
}

}  // namespace modest
