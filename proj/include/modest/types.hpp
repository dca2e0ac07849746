#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace modest {

using NumVec = std::vector<double>;

/// Malformed environment or problem specification (e.g. a RiverSwim with one state).
struct InvalidSpecError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Runtime parameter outside its documented range (delta, eta, mu, ...).
struct InvalidConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Random instance generation exhausted its retry budget.
struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The Markov chain induced by a policy has more than one recurrent class.
struct NonUniqueStationaryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input lies outside the mathematical domain of an objective or gradient.
struct ObjectiveDomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Numerical routine failed to converge or hit an iteration cap.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense row-major table indexed by (state, action).
class Table2 {
  public:
    Table2() = default;
    Table2(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return v_.size(); }
    bool empty() const { return v_.empty(); }

    std::span<double> row(std::size_t r) { return {v_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {v_.data() + r * cols_, cols_}; }

    NumVec& flat() { return v_; }
    const NumVec& flat() const { return v_; }

    void fill(double x) { v_.assign(v_.size(), x); }

    friend bool operator==(const Table2&, const Table2&) = default;

  private:
    std::size_t rows_ = 0, cols_ = 0;
    NumVec v_;
};

/// Dense table indexed by (state, action, next state).
class Table3 {
  public:
    Table3() = default;
    Table3(std::size_t d0, std::size_t d1, std::size_t d2, double fill = 0.0)
        : d0_(d0), d1_(d1), d2_(d2), v_(d0 * d1 * d2, fill) {}

    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return v_[(i * d1_ + j) * d2_ + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return v_[(i * d1_ + j) * d2_ + k];
    }

    std::size_t dim0() const { return d0_; }
    std::size_t dim1() const { return d1_; }
    std::size_t dim2() const { return d2_; }
    std::size_t size() const { return v_.size(); }
    bool empty() const { return v_.empty(); }

    /// Contiguous row over the last dimension, e.g. p(. | s,a).
    std::span<double> row(std::size_t i, std::size_t j) {
        return {v_.data() + (i * d1_ + j) * d2_, d2_};
    }
    std::span<const double> row(std::size_t i, std::size_t j) const {
        return {v_.data() + (i * d1_ + j) * d2_, d2_};
    }

    NumVec& flat() { return v_; }
    const NumVec& flat() const { return v_; }

    void fill(double x) { v_.assign(v_.size(), x); }

    friend bool operator==(const Table3&, const Table3&) = default;

  private:
    std::size_t d0_ = 0, d1_ = 0, d2_ = 0;
    NumVec v_;
};

}  // namespace modest
