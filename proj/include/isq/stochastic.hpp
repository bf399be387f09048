#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "isq/common.hpp"
#include "isq/rng.hpp"

namespace isq {

// Finite configuration space. Labels are optional display names for CSV/JSON
// output; when absent, configurations are printed by index.
struct ConfigurationSpace {
  int size = 0;
  std::vector<std::string> labels;

  explicit ConfigurationSpace(int n = 0, std::vector<std::string> names = {})
      : size(n), labels(std::move(names)) {
    if (n < 1) throw InvalidArgs("configuration space needs size >= 1, got " + std::to_string(n));
    if (!labels.empty() && static_cast<int>(labels.size()) != n)
      throw DimensionMismatch("label count " + std::to_string(labels.size()) +
                              " does not match size " + std::to_string(n));
  }

  std::string label(int i) const {
    if (i < 0 || i >= size) throw IndexOutOfRange("configuration index " + std::to_string(i));
    return labels.empty() ? std::to_string(i) : labels[i];
  }
};

// Probability vector over configurations: entries >= 0, sum within tol::norm of 1.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(Vector p) : p_(std::move(p)) {
    if (p_.size() == 0) throw InvalidArgs("empty probability vector");
    for (int i = 0; i < p_.size(); ++i) {
      if (p_[i] < -tol::stoch) throw NegativeEntry(i, 0, p_[i]);
      p_[i] = std::clamp(p_[i], 0.0, 1.0);
    }
    const double s = p_.sum();
    if (std::abs(s - 1.0) > tol::norm * std::max(1.0, static_cast<double>(p_.size())))
      throw NotNormalized("probabilities sum to " + std::to_string(s));
  }

  const Vector& values() const { return p_; }
  int dim() const { return static_cast<int>(p_.size()); }
  double operator[](int i) const {
    if (i < 0 || i >= p_.size()) throw IndexOutOfRange("probability index " + std::to_string(i));
    return p_[i];
  }

 private:
  Vector p_;
};

// Column-stochastic transition matrix: entry (i, j) is the probability of
// configuration i at the matrix's time given configuration j at time zero.
// Columns sum to one; marginalization is p(t) = Gamma(t) * p(0).
class StochasticMatrix {
 public:
  StochasticMatrix(Matrix g, double time) : g_(std::move(g)), time_(time) {
    validate();
    // Clamp round-off residue into [0, 1]; validation has already bounded it.
    g_ = g_.cwiseMax(0.0).cwiseMin(1.0);
  }

  const Matrix& matrix() const { return g_; }
  double time() const { return time_; }
  int dim() const { return static_cast<int>(g_.rows()); }

  bool doubly_stochastic(double eps = tol::stoch) const {
    for (int i = 0; i < g_.rows(); ++i)
      if (std::abs(g_.row(i).sum() - 1.0) > eps) return false;
    return true;
  }

 private:
  void validate() const {
    if (g_.rows() != g_.cols() || g_.rows() == 0)
      throw DimensionMismatch("stochastic matrix must be square and non-empty");
    for (int j = 0; j < g_.cols(); ++j) {
      for (int i = 0; i < g_.rows(); ++i)
        if (g_(i, j) < -tol::stoch) throw NegativeEntry(i, j, g_(i, j));
      const double s = g_.col(j).sum();
      if (std::abs(s - 1.0) > tol::stoch * std::max(1.0, static_cast<double>(g_.rows())))
        throw ColumnSumViolation(j, s);
    }
  }

  Matrix g_;
  double time_;
};

// Validates a raw matrix and wraps it. Throws NegativeEntry / ColumnSumViolation
// with the offending index and value.
inline StochasticMatrix validate_stochastic(const Matrix& g, double time = 0.0) {
  return StochasticMatrix(g, time);
}

// Strictly increasing set of times containing zero.
class TimeSet {
 public:
  explicit TimeSet(std::vector<double> times) : t_(std::move(times)) {
    if (t_.empty()) throw InvalidArgs("empty time set");
    for (std::size_t k = 1; k < t_.size(); ++k)
      if (!(t_[k] > t_[k - 1]))
        throw InvalidArgs("times must be strictly increasing at position " + std::to_string(k));
    if (find(0.0) < 0) throw InvalidArgs("time set must contain t = 0");
  }

  const std::vector<double>& values() const { return t_; }

  // Index of t, or -1. Matching uses a tight absolute/relative tolerance;
  // times between listed values are never interpolated.
  int find(double t) const {
    for (std::size_t k = 0; k < t_.size(); ++k)
      if (std::abs(t_[k] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return static_cast<int>(k);
    return -1;
  }

 private:
  std::vector<double> t_;
};

// A process known only at an explicit set of times, each with its transition
// matrix from time zero.
class StochasticProcess {
 public:
  StochasticProcess(TimeSet times, std::vector<StochasticMatrix> gammas)
      : times_(std::move(times)), gammas_(std::move(gammas)) {
    if (times_.values().size() != gammas_.size())
      throw DimensionMismatch("time count does not match matrix count");
    for (std::size_t k = 1; k < gammas_.size(); ++k)
      if (gammas_[k].dim() != gammas_[0].dim())
        throw DimensionMismatch("inconsistent matrix dimensions in process family");
  }

  const TimeSet& times() const { return times_; }
  int dim() const { return gammas_.empty() ? 0 : gammas_[0].dim(); }

  const StochasticMatrix& at(double t) const {
    const int k = times_.find(t);
    if (k < 0) throw TimeNotInFamily("no transition matrix listed at t = " + std::to_string(t));
    return gammas_[static_cast<std::size_t>(k)];
  }

 private:
  TimeSet times_;
  std::vector<StochasticMatrix> gammas_;
};

// p(t) = Gamma(t) p(0).
inline ProbabilityVector marginalize(const StochasticMatrix& gamma, const ProbabilityVector& p0) {
  if (gamma.dim() != p0.dim())
    throw DimensionMismatch("matrix dim " + std::to_string(gamma.dim()) +
                            " vs vector dim " + std::to_string(p0.dim()));
  return ProbabilityVector(gamma.matrix() * p0.values());
}

// Composition of transition matrices; the product is revalidated. The result's
// time is the sum of the operands' times (duration bookkeeping only).
inline StochasticMatrix compose(const StochasticMatrix& later, const StochasticMatrix& earlier) {
  if (later.dim() != earlier.dim()) throw DimensionMismatch("compose: dimension mismatch");
  return validate_stochastic(later.matrix() * earlier.matrix(), later.time() + earlier.time());
}

enum class Divisibility { DivisibleAt, IndivisibleWitness, Inconclusive };

// Verdict of the right-factor divisibility test between two listed times.
struct DivisibilityVerdict {
  Divisibility status = Divisibility::Inconclusive;
  double t1 = 0.0;
  double t2 = 0.0;
  // Max stochasticity violation of R (negative entry, >1 excess, column-sum
  // deviation). Populated for both conclusive verdicts.
  double violation = 0.0;
  double condition_number = 0.0;
  std::optional<Matrix> witness;  // R itself, when Gamma(t1) was invertible
};

// Tests whether Gamma(t2) factors as R * Gamma(t1) with R stochastic.
// R = Gamma(t2) * Gamma(t1)^{-1}; a negative entry (or any stochasticity
// violation) larger than tol::divis certifies that no stochastic right factor
// exists. A singular or ill-conditioned Gamma(t1) is inconclusive.
inline DivisibilityVerdict divisibility_witness(const StochasticProcess& family,
                                                double t1, double t2) {
  if (!(t1 > 0.0) || !(t2 > t1)) throw InvalidArgs("divisibility requires 0 < t1 < t2");
  const StochasticMatrix& g1 = family.at(t1);
  const StochasticMatrix& g2 = family.at(t2);

  DivisibilityVerdict v;
  v.t1 = t1;
  v.t2 = t2;

  Eigen::JacobiSVD<Matrix> svd(g1.matrix(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  v.condition_number = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(smin > 0.0) || v.condition_number > tol::kappa_max) {
    v.status = Divisibility::Inconclusive;
    return v;
  }

  const Matrix r = g2.matrix() * g1.matrix().partialPivLu().solve(
                                     Matrix::Identity(g1.dim(), g1.dim()));
  double viol = 0.0;
  viol = std::max(viol, std::max(0.0, -r.minCoeff()));
  viol = std::max(viol, std::max(0.0, r.maxCoeff() - 1.0));
  for (int j = 0; j < r.cols(); ++j) viol = std::max(viol, std::abs(r.col(j).sum() - 1.0));

  v.witness = r;
  v.violation = viol;
  v.status = (viol <= tol::divis) ? Divisibility::DivisibleAt : Divisibility::IndivisibleWitness;
  return v;
}

// One draw from column j0 of Gamma by inverse CDF.
inline int sample_configuration(const StochasticMatrix& gamma, int j0, Rng& rng) {
  if (j0 < 0 || j0 >= gamma.dim()) throw IndexOutOfRange("column " + std::to_string(j0));
  const double u = rng.uniform();
  double acc = 0.0;
  for (int i = 0; i < gamma.dim(); ++i) {
    acc += gamma.matrix()(i, j0);
    if (u < acc) return i;
  }
  return gamma.dim() - 1;
}

// The two-level family Gamma(t) = [[cos^2 t, sin^2 t], [sin^2 t, cos^2 t]]
// evaluated at the given times (t = 0 added if absent).
inline StochasticProcess rabi_family(std::vector<double> times) {
  if (std::none_of(times.begin(), times.end(), [](double t) { return std::abs(t) <= 1e-12; }))
    times.push_back(0.0);
  std::sort(times.begin(), times.end());
  std::vector<StochasticMatrix> gammas;
  gammas.reserve(times.size());
  for (double t : times) {
    const double c = std::cos(t) * std::cos(t);
    const double s = std::sin(t) * std::sin(t);
    Matrix g(2, 2);
    g << c, s, s, c;
    gammas.emplace_back(g, t);
  }
  return StochasticProcess(TimeSet(times), std::move(gammas));
}

}  // namespace isq
