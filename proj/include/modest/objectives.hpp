#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "modest/types.hpp"

namespace modest {

// ---------------------------------------------------------------------------
// Estimation errors
// ---------------------------------------------------------------------------

namespace detail {

inline void check_same_shape(const Table3& a, const Table3& b) {
    if (a.dim0() != b.dim0() || a.dim1() != b.dim1() || a.dim2() != b.dim2())
        throw InvalidConfigError("transition tensors have mismatched shapes");
}

}  // namespace detail

/// Average l1 model error over state-action pairs.
inline double error_avg(const Table3& p_hat, const Table3& p) {
    detail::check_same_shape(p_hat, p);
    double total = 0.0;
    const auto& u = p_hat.flat();
    const auto& v = p.flat();
    for (std::size_t i = 0; i < u.size(); ++i) total += std::abs(u[i] - v[i]);
    return total / static_cast<double>(p.dim0() * p.dim1());
}

/// Worst-case l1 model error over state-action pairs.
inline double error_max(const Table3& p_hat, const Table3& p) {
    detail::check_same_shape(p_hat, p);
    double worst = 0.0;
    for (std::size_t s = 0; s < p.dim0(); ++s) {
        for (std::size_t a = 0; a < p.dim1(); ++a) {
            const auto u = p_hat.row(s, a);
            const auto v = p.row(s, a);
            double dist = 0.0;
            for (std::size_t sp = 0; sp < v.size(); ++sp) dist += std::abs(u[sp] - v[sp]);
            worst = std::max(worst, dist);
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Count-based upper-bound function
// ---------------------------------------------------------------------------

/// F(s,a; T) = V / sqrt(T+1) + S / (T+1): the per-pair error-bound term as
/// a function of the visit count.
inline double surrogate_f(double noise, double count, std::size_t num_states) {
    return noise / std::sqrt(count + 1.0) + static_cast<double>(num_states) / (count + 1.0);
}

inline Table2 surrogate_f(const Table2& noise, const Table2& counts, std::size_t num_states) {
    Table2 out(noise.rows(), noise.cols(), 0.0);
    for (std::size_t s = 0; s < noise.rows(); ++s)
        for (std::size_t a = 0; a < noise.cols(); ++a)
            out(s, a) = surrogate_f(noise(s, a), counts(s, a), num_states);
    return out;
}

// ---------------------------------------------------------------------------
// Occupancy-measure objectives
// ---------------------------------------------------------------------------

/// G_n(s,a; lambda) = V / sqrt(lambda + 1/n) + (1/sqrt(n)) S / (lambda + 1/n).
inline double g_n(double noise, double lam, double n, std::size_t num_states) {
    const double shifted = lam + 1.0 / n;
    return noise / std::sqrt(shifted) +
           static_cast<double>(num_states) / (std::sqrt(n) * shifted);
}

inline Table2 g_n(const Table2& noise, const Table2& lam, double n, std::size_t num_states) {
    Table2 out(noise.rows(), noise.cols(), 0.0);
    for (std::size_t s = 0; s < noise.rows(); ++s)
        for (std::size_t a = 0; a < noise.cols(); ++a)
            out(s, a) = g_n(noise(s, a), lam(s, a), n, num_states);
    return out;
}

/// d G_n / d lambda, always negative.
inline double g_n_derivative(double noise, double lam, double n, std::size_t num_states) {
    const double shifted = lam + 1.0 / n;
    return -0.5 * noise / (shifted * std::sqrt(shifted)) -
           static_cast<double>(num_states) / (std::sqrt(n) * shifted * shifted);
}

/// Weighted entropy H_w(lambda) = -sum w lambda log lambda, with 0 log 0 = 0.
inline double weighted_entropy(const Table2& weights, const Table2& lam) {
    double acc = 0.0;
    for (std::size_t i = 0; i < lam.size(); ++i) {
        const double x = lam.flat()[i];
        if (x > 0.0) acc -= weights.flat()[i] * x * std::log(x);
    }
    return acc;
}

/// Smoothed proxy H_{w,mu}(lambda) = sum w lambda log(1 / (lambda + mu)).
inline double smoothed_weighted_entropy(const Table2& weights, const Table2& lam, double mu) {
    if (mu < 0.0) throw InvalidConfigError("mu must be nonnegative");
    if (mu == 0.0) return weighted_entropy(weights, lam);
    double acc = 0.0;
    for (std::size_t i = 0; i < lam.size(); ++i) {
        const double x = lam.flat()[i];
        acc -= weights.flat()[i] * x * std::log(x + mu);
    }
    return acc;
}

/// Gradient of the smoothed weighted entropy:
///   -w (log(lambda + mu) + lambda / (lambda + mu)).
inline Table2 smoothed_weighted_entropy_gradient(const Table2& weights, const Table2& lam,
                                                 double mu) {
    if (!(mu > 0.0))
        throw ObjectiveDomainError("entropy gradient needs mu > 0 (unbounded at mu = 0)");
    Table2 grad(lam.rows(), lam.cols(), 0.0);
    for (std::size_t i = 0; i < lam.size(); ++i) {
        const double x = lam.flat()[i];
        if (x < 0.0) throw ObjectiveDomainError("lambda has a negative entry");
        grad.flat()[i] = -weights.flat()[i] * (std::log(x + mu) + x / (x + mu));
    }
    return grad;
}

/// Noise-proportional entropy weights w = V / sqrt(S log(SA / delta)).
/// Callers pass either the optimistic noise bound or the true noise table.
inline Table2 modest_weights(const Table2& noise, std::size_t num_states, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidConfigError("delta must lie in (0, 1)");
    const double big_l =
        std::log(static_cast<double>(noise.rows() * noise.cols()) / delta);
    const double denom = std::sqrt(static_cast<double>(num_states) * big_l);
    Table2 out = noise;
    for (auto& x : out.flat()) x /= denom;
    return out;
}

// ---------------------------------------------------------------------------
// ObjectiveSpec: a uniform handle over every scalar objective
// ---------------------------------------------------------------------------

enum class ObjectiveKind {
    AvgSurrogate,      // L_n^E: average of G_n (minimize)
    LseWorstSurrogate, // log-sum-exp of G_n (minimize)
    AsymptoticAvg,     // (1/SA) sum V / sqrt(lambda) (minimize)
    AsymptoticWorst,   // max V / sqrt(lambda) (minimize)
    WeightedEntropy,   // H_{w,mu} (maximize)
    Entropy,           // H_{w,mu} with unit weights (maximize)
};

inline const char* objective_name(ObjectiveKind kind) {
    switch (kind) {
        case ObjectiveKind::AvgSurrogate: return "avg-surrogate";
        case ObjectiveKind::LseWorstSurrogate: return "lse-worst-surrogate";
        case ObjectiveKind::AsymptoticAvg: return "asymptotic-avg";
        case ObjectiveKind::AsymptoticWorst: return "asymptotic-worst";
        case ObjectiveKind::WeightedEntropy: return "weighted-entropy";
        case ObjectiveKind::Entropy: return "entropy";
    }
    return "unknown";
}

/// Value/gradient evaluator for one objective. Surrogate kinds read `noise`
/// (true or optimistic V) and require every lambda entry to stay above
/// eta/2; entropy kinds read `weights` and `mu`.
struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::AvgSurrogate;
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    double n = 0.0;    // budget in G_n
    double mu = 0.0;   // entropy smoothing
    double eta = 0.0;  // restricted-simplex floor (surrogate domain)
    Table2 weights;    // entropy kinds
    Table2 noise;      // surrogate kinds

    bool is_entropy() const {
        return kind == ObjectiveKind::WeightedEntropy || kind == ObjectiveKind::Entropy;
    }

    /// Natural sense of the objective; entropies are maximized. Optimizers
    /// minimize sign() * value.
    double sign() const { return is_entropy() ? -1.0 : 1.0; }

    double value(const Table2& lam) const;
    Table2 gradient(const Table2& lam) const;
};

inline ObjectiveSpec make_avg_surrogate(const Table2& noise, double n, double eta) {
    return {ObjectiveKind::AvgSurrogate, noise.rows(), noise.cols(), n, 0.0, eta, {}, noise};
}

inline ObjectiveSpec make_lse_worst_surrogate(const Table2& noise, double n, double eta) {
    return {ObjectiveKind::LseWorstSurrogate, noise.rows(), noise.cols(), n, 0.0, eta, {}, noise};
}

inline ObjectiveSpec make_asymptotic_avg(const Table2& noise, double eta) {
    return {ObjectiveKind::AsymptoticAvg, noise.rows(), noise.cols(), 0.0, 0.0, eta, {}, noise};
}

inline ObjectiveSpec make_asymptotic_worst(const Table2& noise, double eta) {
    return {ObjectiveKind::AsymptoticWorst, noise.rows(), noise.cols(), 0.0, 0.0, eta, {}, noise};
}

inline ObjectiveSpec make_weighted_entropy(const Table2& weights, double mu) {
    return {ObjectiveKind::WeightedEntropy, weights.rows(), weights.cols(),
            0.0,                            mu,             0.0,
            weights,                        {}};
}

inline ObjectiveSpec make_entropy(std::size_t num_states, std::size_t num_actions, double mu) {
    return {ObjectiveKind::Entropy, num_states, num_actions, 0.0, mu,
            0.0,                    Table2(num_states, num_actions, 1.0),
            {}};
}

namespace detail {

inline void check_surrogate_domain(const ObjectiveSpec& spec, const Table2& lam) {
    const double floor = spec.eta / 2.0;
    for (double x : lam.flat())
        if (x < floor - 1e-15)
            throw ObjectiveDomainError("lambda entry below eta/2: outside the surrogate domain");
    if (spec.kind == ObjectiveKind::AsymptoticAvg || spec.kind == ObjectiveKind::AsymptoticWorst) {
        for (std::size_t i = 0; i < lam.size(); ++i)
            if (lam.flat()[i] <= 0.0 && spec.noise.flat()[i] > 0.0)
                throw ObjectiveDomainError("lambda = 0 at a noisy pair: V / sqrt(lambda) diverges");
    }
}

}  // namespace detail

inline double ObjectiveSpec::value(const Table2& lam) const {
    const double sa = static_cast<double>(num_states * num_actions);
    switch (kind) {
        case ObjectiveKind::AvgSurrogate: {
            detail::check_surrogate_domain(*this, lam);
            double acc = 0.0;
            for (std::size_t i = 0; i < lam.size(); ++i)
                acc += g_n(noise.flat()[i], lam.flat()[i], n, num_states);
            return acc / sa;
        }
        case ObjectiveKind::LseWorstSurrogate: {
            detail::check_surrogate_domain(*this, lam);
            double peak = -std::numeric_limits<double>::infinity();
            NumVec values(lam.size());
            for (std::size_t i = 0; i < lam.size(); ++i) {
                values[i] = g_n(noise.flat()[i], lam.flat()[i], n, num_states);
                peak = std::max(peak, values[i]);
            }
            double acc = 0.0;
            for (double v : values) acc += std::exp(v - peak);
            return peak + std::log(acc);
        }
        case ObjectiveKind::AsymptoticAvg: {
            detail::check_surrogate_domain(*this, lam);
            double acc = 0.0;
            for (std::size_t i = 0; i < lam.size(); ++i) {
                const double v = noise.flat()[i];
                if (v > 0.0) acc += v / std::sqrt(lam.flat()[i]);
            }
            return acc / sa;
        }
        case ObjectiveKind::AsymptoticWorst: {
            detail::check_surrogate_domain(*this, lam);
            double worst = 0.0;
            for (std::size_t i = 0; i < lam.size(); ++i) {
                const double v = noise.flat()[i];
                if (v > 0.0) worst = std::max(worst, v / std::sqrt(lam.flat()[i]));
            }
            return worst;
        }
        case ObjectiveKind::WeightedEntropy:
        case ObjectiveKind::Entropy:
            return smoothed_weighted_entropy(weights, lam, mu);
    }
    throw InvalidConfigError("unknown objective kind");
}

inline Table2 ObjectiveSpec::gradient(const Table2& lam) const {
    const double sa = static_cast<double>(num_states * num_actions);
    Table2 grad(lam.rows(), lam.cols(), 0.0);
    switch (kind) {
        case ObjectiveKind::AvgSurrogate: {
            detail::check_surrogate_domain(*this, lam);
            for (std::size_t i = 0; i < lam.size(); ++i)
                grad.flat()[i] = g_n_derivative(noise.flat()[i], lam.flat()[i], n, num_states) / sa;
            return grad;
        }
        case ObjectiveKind::LseWorstSurrogate: {
            detail::check_surrogate_domain(*this, lam);
            // softmax(G_n) weighted sum of per-pair derivatives
            double peak = -std::numeric_limits<double>::infinity();
            NumVec values(lam.size());
            for (std::size_t i = 0; i < lam.size(); ++i) {
                values[i] = g_n(noise.flat()[i], lam.flat()[i], n, num_states);
                peak = std::max(peak, values[i]);
            }
            double z = 0.0;
            for (double v : values) z += std::exp(v - peak);
            for (std::size_t i = 0; i < lam.size(); ++i) {
                const double softmax = std::exp(values[i] - peak) / z;
                grad.flat()[i] =
                    softmax * g_n_derivative(noise.flat()[i], lam.flat()[i], n, num_states);
            }
            return grad;
        }
        case ObjectiveKind::AsymptoticAvg: {
            detail::check_surrogate_domain(*this, lam);
            for (std::size_t i = 0; i < lam.size(); ++i) {
                const double v = noise.flat()[i];
                if (v > 0.0) {
                    const double x = lam.flat()[i];
                    grad.flat()[i] = -0.5 * v / (x * std::sqrt(x)) / sa;
                }
            }
            return grad;
        }
        case ObjectiveKind::AsymptoticWorst: {
            detail::check_surrogate_domain(*this, lam);
            // subgradient: the first pair attaining the max
            double worst = -1.0;
            std::size_t arg = 0;
            for (std::size_t i = 0; i < lam.size(); ++i) {
                const double v = noise.flat()[i];
                if (v <= 0.0) continue;
                const double val = v / std::sqrt(lam.flat()[i]);
                if (val > worst) {
                    worst = val;
                    arg = i;
                }
            }
            if (worst >= 0.0) {
                const double x = lam.flat()[arg];
                grad.flat()[arg] = -0.5 * noise.flat()[arg] / (x * std::sqrt(x));
            }
            return grad;
        }
        case ObjectiveKind::WeightedEntropy:
        case ObjectiveKind::Entropy:
            return smoothed_weighted_entropy_gradient(weights, lam, mu);
    }
    throw InvalidConfigError("unknown objective kind");
}

/// L_n^E: average of G_n over pairs.
inline double loss_avg(const ObjectiveSpec& spec, const Table2& lam) {
    ObjectiveSpec s = spec;
    s.kind = ObjectiveKind::AvgSurrogate;
    return s.value(lam);
}

/// LSE-smoothed worst-case surrogate of G_n.
inline double loss_lse_worst(const ObjectiveSpec& spec, const Table2& lam) {
    ObjectiveSpec s = spec;
    s.kind = ObjectiveKind::LseWorstSurrogate;
    return s.value(lam);
}

/// Asymptotic average loss (1/SA) sum V / sqrt(lambda).
inline double loss_asymptotic_avg(const Table2& noise, const Table2& lam) {
    return make_asymptotic_avg(noise, 0.0).value(lam);
}

/// Asymptotic worst-case loss max V / sqrt(lambda).
inline double loss_asymptotic_worst(const Table2& noise, const Table2& lam) {
    return make_asymptotic_worst(noise, 0.0).value(lam);
}

inline Table2 grad_loss(const ObjectiveSpec& spec, const Table2& lam) {
    return spec.gradient(lam);
}

}  // namespace modest
