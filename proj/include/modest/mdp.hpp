#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "modest/linalg.hpp"
#include "modest/rng.hpp"
#include "modest/types.hpp"

namespace modest {

/// Finite MDP with a full transition tensor and no reward function.
/// Immutable after construction; safe to share read-only across runs.
struct TabularMdp {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    Table3 transitions;  // p(s' | s, a)

    std::span<const double> row(std::size_t s, std::size_t a) const {
        return transitions.row(s, a);
    }

    /// Number of strictly positive entries of p(. | s,a).
    std::size_t support_size(std::size_t s, std::size_t a) const {
        std::size_t n = 0;
        for (double p : row(s, a))
            if (p > 0.0) ++n;
        return n;
    }

    /// Largest support size over all state-action pairs.
    std::size_t max_support() const {
        std::size_t best = 0;
        for (std::size_t s = 0; s < num_states; ++s)
            for (std::size_t a = 0; a < num_actions; ++a)
                best = std::max(best, support_size(s, a));
        return best;
    }

    /// Checks that every row is a distribution: sums to 1 within 1e-12 with
    /// no negative entries.
    void validate() const {
        for (std::size_t s = 0; s < num_states; ++s) {
            for (std::size_t a = 0; a < num_actions; ++a) {
                double sum = 0.0;
                for (double p : row(s, a)) {
                    if (p < 0.0) throw InvalidSpecError("transition row has a negative entry");
                    sum += p;
                }
                if (std::abs(sum - 1.0) > 1e-12)
                    throw InvalidSpecError("transition row does not sum to 1");
            }
        }
    }
};

/// Stochastic stationary policy pi(a | s).
struct StationaryPolicy {
    Table2 action_probs;  // rows = states

    std::size_t num_states() const { return action_probs.rows(); }
    std::size_t num_actions() const { return action_probs.cols(); }

    void validate() const {
        for (std::size_t s = 0; s < action_probs.rows(); ++s) {
            double sum = 0.0;
            for (double p : action_probs.row(s)) {
                if (p < 0.0) throw InvalidSpecError("policy row has a negative entry");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-12) throw InvalidSpecError("policy row does not sum to 1");
        }
    }
};

inline StationaryPolicy uniform_policy(std::size_t num_states, std::size_t num_actions) {
    return {Table2(num_states, num_actions, 1.0 / static_cast<double>(num_actions))};
}

/// Deterministic policy from an action index per state.
inline StationaryPolicy deterministic_policy(const std::vector<std::size_t>& actions,
                                             std::size_t num_actions) {
    Table2 probs(actions.size(), num_actions, 0.0);
    for (std::size_t s = 0; s < actions.size(); ++s) probs(s, actions[s]) = 1.0;
    return {probs};
}

struct TrajectoryStep {
    std::size_t state;
    std::size_t action;
    std::size_t next_state;
};

/// A rollout together with the seed that produced it. Consecutive steps
/// chain: steps[t].next_state == steps[t+1].state.
struct Trajectory {
    std::vector<TrajectoryStep> steps;
    std::uint64_t seed = 0;
};

/// Distribution over state-action pairs. FlowFeasible means the balance
/// equations of the stationary-distribution polytope hold for some model.
struct OccupancyMeasure {
    enum class Validity { SimplexOnly, FlowFeasible };

    Table2 lam;  // lambda(s, a)
    Validity validity = Validity::SimplexOnly;

    double total_mass() const {
        const auto& v = lam.flat();
        return std::accumulate(v.begin(), v.end(), 0.0);
    }
};

/// Largest violation of the balance equations
///   sum_b lambda(s,b) = sum_{s',a} p(s | s',a) lambda(s',a)
/// of lambda under the given model.
inline double flow_conservation_residual(const Table2& lam, const Table3& transitions) {
    const std::size_t S = lam.rows(), A = lam.cols();
    double worst = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
        double out = 0.0;
        for (std::size_t a = 0; a < A; ++a) out += lam(s, a);
        double in = 0.0;
        for (std::size_t sp = 0; sp < S; ++sp)
            for (std::size_t a = 0; a < A; ++a) in += transitions(sp, a, s) * lam(sp, a);
        worst = std::max(worst, std::abs(out - in));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Environments
// ---------------------------------------------------------------------------

namespace riverswim_action {
inline constexpr std::size_t kLeft = 0;
inline constexpr std::size_t kRight = 1;
inline constexpr std::size_t kTeleportEven = 2;  // active in even states (1-based)
inline constexpr std::size_t kTeleportOdd = 3;   // active in odd states (1-based)
}  // namespace riverswim_action

/// Noisy, reward-free RiverSwim chain with `size` states and 4 actions.
/// RIGHT keeps the usual probabilities (0.6/0.4 at the ends, 0.05/0.6/0.35
/// in the middle), LEFT moves deterministically toward the first state.
/// Each state also has one teleport action that jumps to any state with
/// probability 1/S while the opposite-parity teleport action self-loops.
/// Parities follow the 1-based state numbering; `swap_teleport_parity`
/// exchanges which action is active where.
inline TabularMdp build_noisy_riverswim(std::size_t size, bool swap_teleport_parity = false) {
    using namespace riverswim_action;
    if (size < 2) throw InvalidSpecError("NoisyRiverSwim needs at least 2 states");
    const std::size_t S = size, A = 4;
    TabularMdp mdp{S, A, Table3(S, A, S, 0.0)};
    auto& p = mdp.transitions;
    const double unif = 1.0 / static_cast<double>(S);
    for (std::size_t s = 0; s < S; ++s) {
        // LEFT: deterministic step toward state 0, which self-loops.
        p(s, kLeft, s == 0 ? 0 : s - 1) = 1.0;
        // RIGHT: weak drift toward the last state.
        if (s == 0) {
            p(s, kRight, 0) = 0.4;
            p(s, kRight, 1) = 0.6;
        } else if (s + 1 == S) {
            p(s, kRight, s) = 0.6;
            p(s, kRight, s - 1) = 0.4;
        } else {
            p(s, kRight, s - 1) = 0.05;
            p(s, kRight, s) = 0.6;
            p(s, kRight, s + 1) = 0.35;
        }
        // Teleport actions. State s is "odd" in the 1-based numbering iff s
        // is even here.
        const bool odd_state = (s % 2 == 0);
        std::size_t active = odd_state ? kTeleportOdd : kTeleportEven;
        std::size_t passive = odd_state ? kTeleportEven : kTeleportOdd;
        if (swap_teleport_parity) std::swap(active, passive);
        for (std::size_t sp = 0; sp < S; ++sp) p(s, active, sp) = unif;
        p(s, passive, s) = 1.0;
    }
    mdp.validate();
    return mdp;
}

namespace wheel_action {
inline constexpr std::size_t kLeft = 0;
inline constexpr std::size_t kRight = 1;
inline constexpr std::size_t kSelfLoop = 2;
inline constexpr std::size_t kCenter = 3;
inline constexpr std::size_t kNoisy = 4;  // SPIN at the center state
}  // namespace wheel_action

/// Wheel-of-fortune: state 0 is the hub, states 1..S-1 form a ring.
/// Ring states move deterministically LEFT/RIGHT along the ring, SELF-LOOP,
/// or to the CENTER; the NOISY action yields one of those four outcomes with
/// probability 1/4 each. At the hub every action self-loops except the last
/// one (SPIN), which reaches each ring state with probability 1/(S-1).
inline TabularMdp build_wheel(std::size_t size) {
    using namespace wheel_action;
    if (size < 3) throw InvalidSpecError("Wheel needs at least 3 states");
    const std::size_t S = size, A = 5, R = S - 1;
    TabularMdp mdp{S, A, Table3(S, A, S, 0.0)};
    auto& p = mdp.transitions;
    for (std::size_t a = 0; a < A; ++a) {
        if (a == kNoisy) continue;
        p(0, a, 0) = 1.0;
    }
    for (std::size_t r = 1; r < S; ++r) p(0, kNoisy, r) = 1.0 / static_cast<double>(R);
    for (std::size_t s = 1; s < S; ++s) {
        const std::size_t left = (s == 1) ? S - 1 : s - 1;
        const std::size_t right = (s == S - 1) ? 1 : s + 1;
        p(s, kLeft, left) = 1.0;
        p(s, kRight, right) = 1.0;
        p(s, kSelfLoop, s) = 1.0;
        p(s, kCenter, 0) = 1.0;
        p(s, kNoisy, left) += 0.25;
        p(s, kNoisy, right) += 0.25;
        p(s, kNoisy, s) += 0.25;
        p(s, kNoisy, 0) += 0.25;
    }
    mdp.validate();
    return mdp;
}

/// True iff the directed graph given by adjacency lists is strongly
/// connected (forward and reverse reachability from node 0).
inline bool strongly_connected(const std::vector<std::vector<std::size_t>>& adj) {
    const std::size_t n = adj.size();
    if (n == 0) return true;
    std::vector<std::vector<std::size_t>> radj(n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v : adj[u]) radj[v].push_back(u);
    auto reaches_all = [n](const std::vector<std::vector<std::size_t>>& g) {
        std::vector<char> seen(n, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t v : g[u]) {
                if (!seen[v]) {
                    seen[v] = 1;
                    ++count;
                    stack.push_back(v);
                }
            }
        }
        return count == n;
    };
    return reaches_all(adj) && reaches_all(radj);
}

inline bool is_communicating(const TabularMdp& mdp) {
    std::vector<std::vector<std::size_t>> adj(mdp.num_states);
    for (std::size_t s = 0; s < mdp.num_states; ++s) {
        std::vector<char> edge(mdp.num_states, 0);
        for (std::size_t a = 0; a < mdp.num_actions; ++a)
            for (std::size_t sp = 0; sp < mdp.num_states; ++sp)
                if (mdp.transitions(s, a, sp) > 0.0) edge[sp] = 1;
        for (std::size_t sp = 0; sp < mdp.num_states; ++sp)
            if (edge[sp]) adj[s].push_back(sp);
    }
    return strongly_connected(adj);
}

/// Random Garnet instance G(S, A, b): each row draws a branching factor
/// uniformly from {1..b}, picks that many distinct next states, and fills
/// them with a flat Dirichlet sample. Instances are regenerated (same
/// stream) until the union support graph is strongly connected, so the MDP
/// is communicating.
inline TabularMdp build_garnet(std::size_t num_states, std::size_t num_actions, std::size_t branching,
                               std::uint64_t seed) {
    if (num_states < 2) throw InvalidSpecError("Garnet needs at least 2 states");
    if (num_actions < 1) throw InvalidSpecError("Garnet needs at least 1 action");
    if (branching < 1 || branching > num_states)
        throw InvalidSpecError("Garnet branching factor must be in 1..S");
    Rng rng(seed);
    constexpr int kMaxAttempts = 100;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        TabularMdp mdp{num_states, num_actions, Table3(num_states, num_actions, num_states, 0.0)};
        for (std::size_t s = 0; s < num_states; ++s) {
            for (std::size_t a = 0; a < num_actions; ++a) {
                const std::size_t gamma = 1 + rng.uniform_index(branching);
                const auto support = rng.sample_without_replacement(num_states, gamma);
                const auto probs = rng.dirichlet_uniform(gamma);
                for (std::size_t i = 0; i < gamma; ++i)
                    mdp.transitions(s, a, support[i]) = probs[i];
            }
        }
        if (is_communicating(mdp)) {
            mdp.validate();
            return mdp;
        }
    }
    throw GenerationError("Garnet generation failed to produce a communicating MDP");
}

/// Draws the next state from p(. | s,a) with a single uniform draw.
inline std::size_t step(const TabularMdp& mdp, std::size_t s, std::size_t a, Rng& rng) {
    return rng.categorical(mdp.row(s, a));
}

/// Transition matrix of the chain induced by a stationary policy.
inline std::vector<NumVec> policy_transition_matrix(const TabularMdp& mdp,
                                                    const StationaryPolicy& policy) {
    const std::size_t S = mdp.num_states, A = mdp.num_actions;
    std::vector<NumVec> pmat(S, NumVec(S, 0.0));
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < A; ++a) {
            const double pa = policy.action_probs(s, a);
            if (pa == 0.0) continue;
            for (std::size_t sp = 0; sp < S; ++sp) pmat[s][sp] += pa * mdp.transitions(s, a, sp);
        }
    return pmat;
}

namespace detail {

/// Recurrent classes of a finite chain: strongly connected components of
/// the support graph with no edge leaving the component.
inline std::size_t count_recurrent_classes(const std::vector<NumVec>& pmat) {
    const std::size_t n = pmat.size();
    // Tarjan SCC, iterative.
    std::vector<std::size_t> index(n, SIZE_MAX), low(n, 0), comp(n, SIZE_MAX);
    std::vector<char> on_stack(n, 0);
    std::vector<std::size_t> stack;
    std::size_t next_index = 0, num_comps = 0;
    struct Frame {
        std::size_t v;
        std::size_t child;
    };
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != SIZE_MAX) continue;
        std::vector<Frame> frames{{root, 0}};
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!frames.empty()) {
            auto& [v, child] = frames.back();
            if (child < n) {
                const std::size_t w = child++;
                if (pmat[v][w] <= 0.0) continue;
                if (index[w] == SIZE_MAX) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
            } else {
                if (low[v] == index[v]) {
                    while (true) {
                        const std::size_t w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        comp[w] = num_comps;
                        if (w == v) break;
                    }
                    ++num_comps;
                }
                const std::size_t v_done = v;
                frames.pop_back();
                if (!frames.empty())
                    low[frames.back().v] = std::min(low[frames.back().v], low[v_done]);
            }
        }
    }
    std::vector<char> has_exit(num_comps, 0);
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t w = 0; w < n; ++w)
            if (pmat[v][w] > 0.0 && comp[v] != comp[w]) has_exit[comp[v]] = 1;
    std::size_t recurrent = 0;
    for (std::size_t c = 0; c < num_comps; ++c)
        if (!has_exit[c]) ++recurrent;
    return recurrent;
}

}  // namespace detail

/// Exact state-action stationary distribution of a stationary policy under
/// a known model, from the linear system nu P = nu, sum nu = 1. Requires a
/// single recurrent class. The returned measure satisfies the balance
/// equations within 1e-10.
inline OccupancyMeasure stationary_distribution(const TabularMdp& mdp,
                                                const StationaryPolicy& policy) {
    const std::size_t S = mdp.num_states, A = mdp.num_actions;
    const auto pmat = policy_transition_matrix(mdp, policy);
    if (detail::count_recurrent_classes(pmat) != 1)
        throw NonUniqueStationaryError("policy chain has more than one recurrent class");
    // Rows of (P^T - I) nu = 0 with the last equation replaced by sum nu = 1.
    std::vector<NumVec> a(S, NumVec(S, 0.0));
    NumVec b(S, 0.0);
    for (std::size_t i = 0; i + 1 < S; ++i) {
        for (std::size_t j = 0; j < S; ++j) a[i][j] = pmat[j][i] - (i == j ? 1.0 : 0.0);
    }
    for (std::size_t j = 0; j < S; ++j) a[S - 1][j] = 1.0;
    b[S - 1] = 1.0;
    NumVec nu = solve_linear_system(std::move(a), std::move(b));
    for (auto& x : nu) x = std::max(x, 0.0);  // clip solver dust on transient states
    double total = std::accumulate(nu.begin(), nu.end(), 0.0);
    for (auto& x : nu) x /= total;
    double residual = 0.0;
    for (std::size_t j = 0; j < S; ++j) {
        double in = 0.0;
        for (std::size_t i = 0; i < S; ++i) in += nu[i] * pmat[i][j];
        residual += std::abs(in - nu[j]);
    }
    if (residual > 1e-10) throw SolverError("stationary distribution residual too large");
    OccupancyMeasure occ{Table2(S, A, 0.0), OccupancyMeasure::Validity::FlowFeasible};
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a2 = 0; a2 < A; ++a2) occ.lam(s, a2) = nu[s] * policy.action_probs(s, a2);
    return occ;
}

// ---------------------------------------------------------------------------
// Environment ids
// ---------------------------------------------------------------------------

struct EnvSpec {
    enum class Kind { NoisyRiverSwim, Wheel, Garnet };

    Kind kind = Kind::NoisyRiverSwim;
    std::size_t num_states = 0;
    std::size_t num_actions = 0;  // Garnet only
    std::size_t branching = 0;    // Garnet only
    std::uint64_t seed = 0;       // Garnet only
};

/// Parses `noisyriverswim:<S>`, `wheel:<S>` or `garnet:<S>x<A>x<b>:<seed>`.
inline EnvSpec parse_env_id(const std::string& id) {
    const auto fail = [&] { throw InvalidSpecError("unrecognized environment id: " + id); };
    const auto colon = id.find(':');
    if (colon == std::string::npos) fail();
    const std::string name = id.substr(0, colon);
    const std::string rest = id.substr(colon + 1);
    auto parse_num = [&](const std::string& text) -> std::uint64_t {
        if (text.empty()) fail();
        std::uint64_t value = 0;
        for (char ch : text) {
            if (ch < '0' || ch > '9') fail();
            value = value * 10 + static_cast<std::uint64_t>(ch - '0');
        }
        return value;
    };
    EnvSpec spec;
    if (name == "noisyriverswim" || name == "wheel") {
        spec.kind =
            name == "wheel" ? EnvSpec::Kind::Wheel : EnvSpec::Kind::NoisyRiverSwim;
        spec.num_states = static_cast<std::size_t>(parse_num(rest));
        spec.num_actions = name == "wheel" ? 5 : 4;
        return spec;
    }
    if (name == "garnet") {
        const auto colon2 = rest.find(':');
        if (colon2 == std::string::npos) fail();
        const std::string dims = rest.substr(0, colon2);
        const auto x1 = dims.find('x');
        const auto x2 = dims.find('x', x1 == std::string::npos ? 0 : x1 + 1);
        if (x1 == std::string::npos || x2 == std::string::npos) fail();
        spec.kind = EnvSpec::Kind::Garnet;
        spec.num_states = static_cast<std::size_t>(parse_num(dims.substr(0, x1)));
        spec.num_actions = static_cast<std::size_t>(parse_num(dims.substr(x1 + 1, x2 - x1 - 1)));
        spec.branching = static_cast<std::size_t>(parse_num(dims.substr(x2 + 1)));
        spec.seed = parse_num(rest.substr(colon2 + 1));
        return spec;
    }
    fail();
    return spec;  // unreachable
}

inline std::string env_id(const EnvSpec& spec) {
    std::ostringstream out;
    switch (spec.kind) {
        case EnvSpec::Kind::NoisyRiverSwim:
            out << "noisyriverswim:" << spec.num_states;
            break;
        case EnvSpec::Kind::Wheel:
            out << "wheel:" << spec.num_states;
            break;
        case EnvSpec::Kind::Garnet:
            out << "garnet:" << spec.num_states << 'x' << spec.num_actions << 'x'
                << spec.branching << ':' << spec.seed;
            break;
    }
    return out.str();
}

inline TabularMdp build_env(const EnvSpec& spec) {
    switch (spec.kind) {
        case EnvSpec::Kind::NoisyRiverSwim:
            return build_noisy_riverswim(spec.num_states);
        case EnvSpec::Kind::Wheel:
            return build_wheel(spec.num_states);
        case EnvSpec::Kind::Garnet:
            return build_garnet(spec.num_states, spec.num_actions, spec.branching, spec.seed);
    }
    throw InvalidSpecError("unknown environment kind");
}

inline TabularMdp build_env(const std::string& id) { return build_env(parse_env_id(id)); }

}  // namespace modest
