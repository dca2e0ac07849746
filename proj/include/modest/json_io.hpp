#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "modest/estimation.hpp"
#include "modest/fw_modest.hpp"
#include "modest/mdp.hpp"
#include "modest/types.hpp"
#include "modest/weighted_maxent.hpp"

namespace modest {

using nlohmann::json;

inline json table2_to_json(const Table2& t) {
    json rows = json::array();
    for (std::size_t r = 0; r < t.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < t.cols(); ++c) row.push_back(t(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Table2 table2_from_json(const json& j) {
    const std::size_t rows = j.size();
    const std::size_t cols = rows == 0 ? 0 : j.at(0).size();
    Table2 t(rows, cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) t(r, c) = j.at(r).at(c).get<double>();
    return t;
}

inline json table3_to_json(const Table3& t) {
    json blocks = json::array();
    for (std::size_t i = 0; i < t.dim0(); ++i) {
        json block = json::array();
        for (std::size_t jx = 0; jx < t.dim1(); ++jx) {
            json row = json::array();
            for (std::size_t k = 0; k < t.dim2(); ++k) row.push_back(t(i, jx, k));
            block.push_back(std::move(row));
        }
        blocks.push_back(std::move(block));
    }
    return blocks;
}

inline Table3 table3_from_json(const json& j) {
    const std::size_t d0 = j.size();
    const std::size_t d1 = d0 == 0 ? 0 : j.at(0).size();
    const std::size_t d2 = d1 == 0 ? 0 : j.at(0).at(0).size();
    Table3 t(d0, d1, d2, 0.0);
    for (std::size_t i = 0; i < d0; ++i)
        for (std::size_t jx = 0; jx < d1; ++jx)
            for (std::size_t k = 0; k < d2; ++k) t(i, jx, k) = j.at(i).at(jx).at(k).get<double>();
    return t;
}

/// Row-major dump of an environment's transition tensor for debugging.
inline json env_to_json(const TabularMdp& mdp) {
    return json{{"num_states", mdp.num_states},
                {"num_actions", mdp.num_actions},
                {"transitions", table3_to_json(mdp.transitions)}};
}

// Checkpoint/resume serialization for long runs.

inline json counters_to_json(const Counters& c) {
    return json{{"num_states", c.num_states},
                {"num_actions", c.num_actions},
                {"total", c.total},
                {"pair_counts", table2_to_json(c.pair_counts)},
                {"transition_counts", table3_to_json(c.transition_counts)}};
}

inline Counters counters_from_json(const json& j) {
    Counters c(j.at("num_states").get<std::size_t>(), j.at("num_actions").get<std::size_t>());
    c.total = j.at("total").get<std::uint64_t>();
    c.pair_counts = table2_from_json(j.at("pair_counts"));
    c.transition_counts = table3_from_json(j.at("transition_counts"));
    return c;
}

inline json empirical_model_to_json(const EmpiricalModel& m) {
    return json{{"p_hat", table3_to_json(m.p_hat)},
                {"sigma2_hat", table3_to_json(m.sigma2_hat)},
                {"visited", m.visited}};
}

inline EmpiricalModel empirical_model_from_json(const json& j) {
    EmpiricalModel m;
    m.p_hat = table3_from_json(j.at("p_hat"));
    m.sigma2_hat = table3_from_json(j.at("sigma2_hat"));
    m.visited = j.at("visited").get<std::vector<char>>();
    return m;
}

// Run logs as JSON lines, one record per episode.

inline json episode_to_json(const FwEpisodeLog& ep) {
    return json{{"k", ep.k},
                {"t_k", ep.t_k},
                {"tau", ep.length},
                {"lp_status", ep.lp_status},
                {"eta_used", ep.eta_used},
                {"eta_downgrades", ep.eta_downgrades},
                {"lp_objective", ep.lp_objective},
                {"lp_iterations", ep.lp_iterations},
                {"gradient_clipped", ep.gradient_clipped}};
}

inline json episode_to_json(const WmeEpisodeLog& ep) {
    return json{{"k", ep.k},
                {"t_k", ep.t_k},
                {"length", ep.length},
                {"stop_reason", ep.stop_reason},
                {"q_threshold", ep.q_threshold},
                {"phi", ep.phi},
                {"evi_sweeps", ep.evi_sweeps},
                {"gain", ep.gain}};
}

}  // namespace modest
