#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "isq/common.hpp"
#include "isq/quantum.hpp"
#include "isq/rng.hpp"
#include "isq/stochastic.hpp"

namespace isq::division {

// Joint system/environment dimension cap for explicit simulation.
inline constexpr int kMaxJointDim = 1 << 14;

// Deterministic record map i' -> e'(i'): which environment configuration ends
// up recording system configuration i'.
struct CorrelationMap {
  int system_dim = 0;
  int env_dim = 0;
  std::vector<int> map;

  CorrelationMap(int n, int m, std::vector<int> e_of_i)
      : system_dim(n), env_dim(m), map(std::move(e_of_i)) {
    if (n < 1 || m < 1) throw InvalidArgs("correlation map needs positive dimensions");
    if (static_cast<int>(map.size()) != n)
      throw DimensionMismatch("map length " + std::to_string(map.size()) +
                              " vs system dim " + std::to_string(n));
    for (int i = 0; i < n; ++i)
      if (map[i] < 0 || map[i] >= m)
        throw IndexOutOfRange("map value " + std::to_string(map[i]) + " at " + std::to_string(i));
  }

  bool injective() const {
    std::vector<int> seen(map.begin(), map.end());
    std::sort(seen.begin(), seen.end());
    return std::adjacent_find(seen.begin(), seen.end()) == seen.end();
  }
};

// System + environment with Hermitian generators; propagators over [t0, t] are
// built on demand as exp(-i H (t - t0)), so t = t0 gives identities.
struct JointSystem {
  HermitianOperator sys_hamiltonian;
  HermitianOperator env_hamiltonian;
  CorrelationMap correlation;
  StateVector psi0;  // system state at t0
  double t0 = 0.0;

  JointSystem(HermitianOperator hs, HermitianOperator he, CorrelationMap corr,
              StateVector psi, double time0)
      : sys_hamiltonian(std::move(hs)),
        env_hamiltonian(std::move(he)),
        correlation(std::move(corr)),
        psi0(std::move(psi)),
        t0(time0) {
    const int n = correlation.system_dim;
    const int m = correlation.env_dim;
    if (sys_hamiltonian.dim() != n || env_hamiltonian.dim() != m || psi0.dim() != n)
      throw DimensionMismatch("joint system dimensions disagree with correlation map");
    if (static_cast<std::int64_t>(n) * m > kMaxJointDim)
      throw InvalidArgs("joint dimension " + std::to_string(static_cast<std::int64_t>(n) * m) +
                        " exceeds cap " + std::to_string(kMaxJointDim));
  }

  Propagator sys_propagator(double t) const {
    check_time(t);
    return evolve_unitary(sys_hamiltonian, t - t0);
  }
  Propagator env_propagator(double t) const {
    check_time(t);
    return evolve_unitary(env_hamiltonian, t - t0);
  }

 private:
  void check_time(double t) const {
    if (t < t0 - 1e-12)
      throw TimeBeforeInteraction("t = " + std::to_string(t) + " precedes t0 = " + std::to_string(t0));
  }
};

// Joint amplitude matrix Psi(i, e) = sum_{i'} U^S_{i i'} psi_{i'} U^E_{e e'(i')},
// starting from the conditioned product state at t0.
inline CMatrix joint_amplitude(const JointSystem& js, double t) {
  const CMatrix us = js.sys_propagator(t).matrix();
  const CMatrix ue = js.env_propagator(t).matrix();
  const CVector& psi = js.psi0.amplitudes();
  const int n = js.correlation.system_dim;
  const int m = js.correlation.env_dim;
  CMatrix out = CMatrix::Zero(n, m);
  for (int ip = 0; ip < n; ++ip)
    out += psi[ip] * us.col(ip) * ue.col(js.correlation.map[ip]).transpose();
  return out;
}

// Exact system marginal via the double sum over initial configuration pairs,
//   p(i) = sum_{a,b} conj(U^S_{ia} psi_a) U^S_{ib} psi_b F(a, b),
// where F(a, b) = sum_e conj(U^E_{e e'(a)}) U^E_{e e'(b)} is the environment
// overlap factor, computed explicitly rather than assumed to be a Kronecker
// delta.
inline ProbabilityVector exact_marginal(const JointSystem& js, double t) {
  const CMatrix us = js.sys_propagator(t).matrix();
  const CMatrix ue = js.env_propagator(t).matrix();
  const CVector& psi = js.psi0.amplitudes();
  const int n = js.correlation.system_dim;

  const CMatrix env_gram = ue.adjoint() * ue;  // explicit e-sums of column overlaps
  CMatrix f(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      f(a, b) = env_gram(js.correlation.map[a], js.correlation.map[b]);

  Vector p(n);
  for (int i = 0; i < n; ++i) {
    Complex acc(0.0, 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        acc += std::conj(us(i, a) * psi[a]) * us(i, b) * psi[b] * f(a, b);
    p[i] = acc.real();
  }
  return ProbabilityVector(p);
}

// The stochastic shortcut: marginalize(|U^S|^2, born(psi)).
inline ProbabilityVector division_formula(const JointSystem& js, double t) {
  return marginalize(schur_mod_square(js.sys_propagator(t)),
                     born_probabilities(js.psi0));
}

struct DivisionReport {
  Vector exact;
  Vector formula;
  double max_error = 0.0;  // max-abs difference
  bool injective = false;
  double t = 0.0;
};

// Compares the exact marginal against the division formula. For an injective
// correlation map the environment records are orthogonal and the two agree;
// a many-to-one map leaves cross terms alive and the formula fails.
inline DivisionReport division_report(const JointSystem& js, double t) {
  DivisionReport rep;
  rep.exact = exact_marginal(js, t).values();
  rep.formula = division_formula(js, t).values();
  rep.max_error = max_abs((rep.exact - rep.formula).eval());
  rep.injective = js.correlation.injective();
  rep.t = t;
  return rep;
}

// Probability that n independent uniform draws from m environment slots are
// all distinct: prod_{k=0}^{n-1} (1 - k/m), which is 0 for n > m. The product
// form avoids factorial overflow.
inline double collision_probability_exact(int n, int m) {
  if (n < 1 || m < 1) throw InvalidArgs("collision probability needs n >= 1, m >= 1");
  if (n > m) return 0.0;
  double p = 1.0;
  for (int k = 0; k < n; ++k) p *= 1.0 - static_cast<double>(k) / m;
  return p;
}

// Large-m approximation exp(-n(n-1) / (2m)).
inline double collision_probability_approx(int n, int m) {
  if (n < 1 || m < 1) throw InvalidArgs("collision probability needs n >= 1, m >= 1");
  return std::exp(-0.5 * static_cast<double>(n) * (n - 1) / m);
}

// Empirical frequency of injective uniform random maps [n] -> [m].
inline double injectivity_frequency(int n, int m, int draws, Rng& rng) {
  if (draws < 1) throw InvalidArgs("draws must be >= 1");
  std::vector<int> slot(static_cast<std::size_t>(n));
  int hits = 0;
  std::vector<int> sorted;
  for (int d = 0; d < draws; ++d) {
    for (int i = 0; i < n; ++i) slot[static_cast<std::size_t>(i)] = rng.uniform_int(m);
    sorted = slot;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) ++hits;
  }
  return static_cast<double>(hits) / draws;
}

// Bayesian conditioning of a joint distribution p(i, e) on an observed
// environment configuration: p(i | e) = p(i, e) / sum_i p(i, e).
inline ProbabilityVector collapse_condition(const Matrix& p_joint, int observed_e) {
  if (p_joint.rows() == 0 || p_joint.cols() == 0) throw InvalidArgs("empty joint distribution");
  if (observed_e < 0 || observed_e >= p_joint.cols())
    throw IndexOutOfRange("environment outcome " + std::to_string(observed_e));
  for (int j = 0; j < p_joint.cols(); ++j)
    for (int i = 0; i < p_joint.rows(); ++i)
      if (p_joint(i, j) < -tol::stoch) throw NegativeEntry(i, j, p_joint(i, j));
  const Vector col = p_joint.col(observed_e).cwiseMax(0.0);
  const double s = col.sum();
  if (!(s > 0.0))
    throw ZeroProbabilityOutcome("outcome " + std::to_string(observed_e) +
                                 " has probability " + std::to_string(s));
  return ProbabilityVector(col / s);
}

// Joint distribution at measurement time from the Born weights of the joint
// amplitude matrix.
inline Matrix joint_distribution(const JointSystem& js, double t) {
  return joint_amplitude(js, t).cwiseAbs2();
}

}  // namespace isq::division
