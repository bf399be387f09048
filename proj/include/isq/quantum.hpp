#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "isq/common.hpp"
#include "isq/stochastic.hpp"

namespace isq {

// Hermitian generator. Validated once on construction.
class HermitianOperator {
 public:
  explicit HermitianOperator(CMatrix h) : h_(std::move(h)) {
    if (h_.rows() != h_.cols() || h_.rows() == 0)
      throw DimensionMismatch("Hermitian operator must be square and non-empty");
    const double dev = hermiticity_deviation(h_);
    if (dev > tol::herm)
      throw NotHermitian("Hermiticity deviation " + std::to_string(dev));
  }

  const CMatrix& matrix() const { return h_; }
  int dim() const { return static_cast<int>(h_.rows()); }

 private:
  CMatrix h_;
};

// Unitary propagator with its evaluation time. Deviations up to tol::polar_fix
// are repaired by polar projection; anything worse is an error.
class Propagator {
 public:
  Propagator(CMatrix u, double time) : u_(std::move(u)), time_(time) {
    if (u_.rows() != u_.cols() || u_.rows() == 0)
      throw DimensionMismatch("propagator must be square and non-empty");
    const double dev = unitarity_deviation(u_);
    if (dev > tol::polar_fix)
      throw NotUnitary("unitarity deviation " + std::to_string(dev));
    if (dev > tol::unit) {
      // Polar correction: closest unitary in Frobenius norm.
      Eigen::JacobiSVD<CMatrix> svd(u_, Eigen::ComputeThinU | Eigen::ComputeThinV);
      u_ = svd.matrixU() * svd.matrixV().adjoint();
    }
  }

  const CMatrix& matrix() const { return u_; }
  double time() const { return time_; }
  int dim() const { return static_cast<int>(u_.rows()); }

 private:
  CMatrix u_;
  double time_;
};

// Normalized state vector.
class StateVector {
 public:
  explicit StateVector(CVector psi) : psi_(std::move(psi)) {
    if (psi_.size() == 0) throw InvalidArgs("empty state vector");
    const double n = psi_.norm();
    if (std::abs(n - 1.0) > tol::norm)
      throw NotNormalized("state norm " + std::to_string(n));
  }

  const CVector& amplitudes() const { return psi_; }
  int dim() const { return static_cast<int>(psi_.size()); }

 private:
  CVector psi_;
};

// Density operator: self-adjoint, unit trace, spectrum >= -tol::norm.
class DensityOperator {
 public:
  explicit DensityOperator(CMatrix rho) : rho_(std::move(rho)) {
    if (rho_.rows() != rho_.cols() || rho_.rows() == 0)
      throw DimensionMismatch("density operator must be square and non-empty");
    const double hdev = hermiticity_deviation(rho_);
    if (hdev > tol::herm) throw NotHermitian("density Hermiticity deviation " + std::to_string(hdev));
    const double tr = rho_.trace().real();
    if (std::abs(tr - 1.0) > tol::norm * std::max(1.0, static_cast<double>(rho_.rows())))
      throw NotNormalized("density trace " + std::to_string(tr));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw EigenDecompositionFailure("density spectrum");
    if (es.eigenvalues().minCoeff() < -tol::norm)
      throw NegativeEntry(0, 0, es.eigenvalues().minCoeff());
  }

  const CMatrix& matrix() const { return rho_; }
  int dim() const { return static_cast<int>(rho_.rows()); }

 private:
  CMatrix rho_;
};

// U(t) = exp(-i H t) via the spectral decomposition of H. Exactly unitary up
// to round-off for any t, with no step-size restriction.
inline Propagator evolve_unitary(const HermitianOperator& h, double t) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
  if (es.info() != Eigen::Success)
    throw EigenDecompositionFailure("eigensolver did not converge at dim " +
                                    std::to_string(h.dim()));
  const Vector& lam = es.eigenvalues();
  const CMatrix& v = es.eigenvectors();
  CVector phases(lam.size());
  for (int k = 0; k < lam.size(); ++k)
    phases[k] = std::exp(Complex(0.0, -lam[k] * t));
  return Propagator(v * phases.asDiagonal() * v.adjoint(), t);
}

// Entrywise modulus-square of a unitary. The result is doubly stochastic by
// construction and is revalidated on wrapping.
inline StochasticMatrix schur_mod_square(const Propagator& u) {
  return validate_stochastic(u.matrix().cwiseAbs2(), u.time());
}

inline ProbabilityVector born_probabilities(const StateVector& psi) {
  return ProbabilityVector(psi.amplitudes().cwiseAbs2());
}

// rho(t) = U rho U^dagger for rho = diag(p0).
inline DensityOperator density_evolution(const ProbabilityVector& p0, const Propagator& u) {
  if (p0.dim() != u.dim()) throw DimensionMismatch("density_evolution: dimension mismatch");
  const CMatrix rho0 = p0.values().cast<Complex>().asDiagonal();
  return DensityOperator(u.matrix() * rho0 * u.matrix().adjoint());
}

// Diagonal of a density operator as a probability vector.
inline ProbabilityVector probabilities(const DensityOperator& rho) {
  return ProbabilityVector(rho.matrix().diagonal().real());
}

struct HamiltonianRecovery {
  HermitianOperator hamiltonian;
  // Max-abs anti-Hermitian part of the raw central-difference estimate,
  // before symmetrization.
  double hermiticity_residual = 0.0;
  double step = 0.0;
};

// Recovers the generator from a propagator family by the central difference
//   H_hat = i (U(t+h) - U(t-h)) / (2h) * U(t)^dagger,
// accurate to O(h^2). The estimate is symmetrized; the discarded anti-Hermitian
// part is reported as the residual.
inline HamiltonianRecovery hamiltonian_from_propagator(
    const std::function<Propagator(double)>& family, double t, double h = 1e-4) {
  if (!(h >= 1e-12)) throw StepTooSmall("finite-difference step " + std::to_string(h));
  CMatrix up, um, uc;
  try {
    up = family(t + h).matrix();
    um = family(t - h).matrix();
    uc = family(t).matrix();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw EvaluationFailure(std::string("propagator family evaluation failed: ") + e.what());
  }
  if (up.rows() != um.rows() || up.rows() != uc.rows())
    throw DimensionMismatch("propagator family returned inconsistent dimensions");
  const CMatrix x = Complex(0.0, 1.0) * (up - um) / (2.0 * h) * uc.adjoint();
  const CMatrix sym = 0.5 * (x + x.adjoint());
  return HamiltonianRecovery{HermitianOperator(sym), 0.5 * hermiticity_deviation(x), h};
}

// Per-component interference split: |a|^2, |b|^2 and the cross term
// 2 Re(conj(a) b), which sum to |a+b|^2.
struct InterferenceTerm {
  double direct1 = 0.0;
  double direct2 = 0.0;
  double cross = 0.0;
  double total() const { return direct1 + direct2 + cross; }
};

inline std::vector<InterferenceTerm> interference_decompose(const CVector& psi1,
                                                            const CVector& psi2) {
  if (psi1.size() != psi2.size())
    throw DimensionMismatch("interference_decompose: dimension mismatch");
  std::vector<InterferenceTerm> out(static_cast<std::size_t>(psi1.size()));
  for (int i = 0; i < psi1.size(); ++i) {
    out[static_cast<std::size_t>(i)] = InterferenceTerm{
        std::norm(psi1[i]), std::norm(psi2[i]),
        2.0 * (std::conj(psi1[i]) * psi2[i]).real()};
  }
  return out;
}

}  // namespace isq
