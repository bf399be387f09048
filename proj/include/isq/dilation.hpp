#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "isq/common.hpp"
#include "isq/optim.hpp"
#include "isq/quantum.hpp"
#include "isq/rng.hpp"
#include "isq/stochastic.hpp"

namespace isq::dilation {

enum class Obstruction { Unistochastic, Obstructed, NotApplicable };

struct ObstructionResult {
  Obstruction status = Obstruction::NotApplicable;
  // For Obstructed: the offending row pair and the triangle-inequality gap
  // max_j m_j - sum_{other j} m_j with m_j = sqrt(g_aj * g_bj).
  int row_a = -1;
  int row_b = -1;
  double gap = 0.0;
};

// Necessary-and-sufficient unistochasticity test for dim <= 3. Rows a, b of a
// unitary preimage must be orthogonal, so the moduli m_j = sqrt(g_aj g_bj)
// must admit phases summing to zero, i.e. satisfy the triangle inequality.
// Dim 2 is unconditionally unistochastic; dim > 3 is out of scope.
inline ObstructionResult obstruction_test_3x3(const StochasticMatrix& g) {
  if (!g.doubly_stochastic())
    throw NotDoublyStochastic("obstruction test requires a doubly stochastic matrix");
  ObstructionResult r;
  if (g.dim() > 3) {
    r.status = Obstruction::NotApplicable;
    return r;
  }
  if (g.dim() < 3) {
    r.status = Obstruction::Unistochastic;
    return r;
  }
  const Matrix& m = g.matrix();
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      double v[3];
      for (int j = 0; j < 3; ++j) v[j] = std::sqrt(m(a, j) * m(b, j));
      const double total = v[0] + v[1] + v[2];
      const double biggest = std::max({v[0], v[1], v[2]});
      const double gap = biggest - (total - biggest);
      if (gap > tol::stoch) {
        r.status = Obstruction::Obstructed;
        r.row_a = a;
        r.row_b = b;
        r.gap = gap;
        return r;
      }
    }
  }
  r.status = Obstruction::Unistochastic;
  return r;
}

// Uniform dilution: each configuration splits into k copies and the weight
// spreads evenly, G~_{(i,a),(j,b)} = G_ij / k with super-index i*k + a.
// Summing the copy index of the row for any fixed column copy recovers G
// exactly.
inline Matrix dilute(const Matrix& g, int k) {
  if (k < 1) throw InvalidArgs("dilution factor must be >= 1");
  const int c = static_cast<int>(g.rows());
  Matrix out(c * k, c * k);
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j)
      out.block(i * k, j * k, k, k).setConstant(g(i, j) / k);
  return out;
}

namespace detail {

// Real parameterization of a Hermitian generator: n diagonal entries followed
// by (re, im) pairs for the strict upper triangle.
inline CMatrix hermitian_from_params(const Vector& theta, int n) {
  CMatrix h = CMatrix::Zero(n, n);
  int p = 0;
  for (int i = 0; i < n; ++i) h(i, i) = theta[p++];
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Complex z(theta[p], theta[p + 1]);
      p += 2;
      h(i, j) = z;
      h(j, i) = std::conj(z);
    }
  }
  return h;
}

inline Vector params_from_hermitian(const CMatrix& h) {
  const int n = static_cast<int>(h.rows());
  Vector theta(n * n);
  int p = 0;
  for (int i = 0; i < n; ++i) theta[p++] = h(i, i).real();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      theta[p++] = h(i, j).real();
      theta[p++] = h(i, j).imag();
    }
  }
  return theta;
}

struct ExpEig {
  CMatrix u;   // exp(i H)
  CMatrix v;   // eigenvectors of H
  Vector lam;  // eigenvalues of H
};

inline ExpEig exp_i_hermitian(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success)
    throw EigenDecompositionFailure("generator eigensolver did not converge");
  ExpEig out;
  out.v = es.eigenvectors();
  out.lam = es.eigenvalues();
  CVector phases(out.lam.size());
  for (int k = 0; k < out.lam.size(); ++k)
    phases[k] = std::exp(Complex(0.0, out.lam[k]));
  out.u = out.v * phases.asDiagonal() * out.v.adjoint();
  return out;
}

// Divided differences of z -> exp(i z) on the spectrum:
//   D_kl = (e^{i a} - e^{i b}) / (a - b) = i e^{i(a+b)/2} sinc((a-b)/2),
// which is exact and stable for all eigenvalue gaps.
inline CMatrix exp_divided_differences(const Vector& lam) {
  const int n = static_cast<int>(lam.size());
  CMatrix d(n, n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      const double half = 0.5 * (lam[k] - lam[l]);
      const double sinc = (std::abs(half) < 1e-12) ? 1.0 : std::sin(half) / half;
      d(k, l) = Complex(0.0, 1.0) * std::exp(Complex(0.0, 0.5 * (lam[k] + lam[l]))) * sinc;
    }
  }
  return d;
}

}  // namespace detail

// Objective f(theta) = sum_ij (|U_ij|^2 - T_ij)^2 with U = exp(i H(theta)),
// and its exact gradient through the spectral Frechet derivative of the
// exponential. Exposed for direct verification against finite differences.
inline double objective(const Matrix& target, const Vector& theta) {
  const int n = static_cast<int>(target.rows());
  const auto ee = detail::exp_i_hermitian(detail::hermitian_from_params(theta, n));
  return (ee.u.cwiseAbs2() - target).squaredNorm();
}

inline double objective_gradient(const Matrix& target, const Vector& theta, Vector& grad) {
  const int n = static_cast<int>(target.rows());
  const auto ee = detail::exp_i_hermitian(detail::hermitian_from_params(theta, n));

  const Matrix resid = ee.u.cwiseAbs2() - target;
  const double f = resid.squaredNorm();

  // df = 2 Re tr(W^dagger dU) with W_ij = 2 resid_ij U_ij. Pulling dU through
  // the eigenbasis gives the Euclidean gradient G = V ((V^dagger W V) .* conj(D)) V^dagger
  // against Hermitian directions E via df = 2 Re tr(G^dagger E).
  const CMatrix wmat = (2.0 * resid.array()).matrix().cast<Complex>().cwiseProduct(ee.u);
  const CMatrix wt = ee.v.adjoint() * wmat * ee.v;
  const CMatrix gt = wt.cwiseProduct(detail::exp_divided_differences(ee.lam).conjugate());
  const CMatrix gbar = ee.v * gt * ee.v.adjoint();

  grad.resize(n * n);
  int p = 0;
  for (int i = 0; i < n; ++i) grad[p++] = 2.0 * gbar(i, i).real();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      grad[p++] = 2.0 * (gbar(i, j) + gbar(j, i)).real();
      grad[p++] = 2.0 * (gbar(i, j).imag() - gbar(j, i).imag());
    }
  }
  return f;
}

// Two-sided diagonal phase fixing: make column 0, then row 0, real and
// non-negative wherever the modulus exceeds tol::gauge. Leaves all moduli
// untouched and is idempotent.
inline CMatrix fix_gauge(const CMatrix& u) {
  CMatrix out = u;
  const int n = static_cast<int>(u.rows());
  for (int i = 0; i < n; ++i) {
    const Complex z = out(i, 0);
    if (std::abs(z) > tol::gauge) out.row(i) *= std::conj(z) / std::abs(z);
  }
  for (int j = 0; j < n; ++j) {
    const Complex z = out(0, j);
    if (std::abs(z) > tol::gauge) out.col(j) *= std::conj(z) / std::abs(z);
  }
  return out;
}

struct DilationProblem {
  StochasticMatrix target;
  int k_max = 4;
  double residual_tol = 1e-8;
  int restarts = 20;
  std::uint64_t seed = 0;
};

struct DilationSolution {
  CMatrix unitary;          // gauge-fixed
  int dilation_factor = 1;  // k actually used
  double residual = 0.0;    // sum of squared modulus-square errors vs diluted target
  bool gauge_canonical = true;
  bool converged = false;  // residual <= residual_tol
  // k = 1 skipped because the target's row sums ruled out any unitary preimage.
  bool structurally_infeasible_k1 = false;
  // Final residual of every restart, keyed by dilation factor.
  std::map<int, std::vector<double>> restart_residuals;
};

namespace detail {

// Polar projection onto the unitary group (closest in Frobenius norm).
inline CMatrix polar_unitary(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

// Hermitian logarithm-like warm start: H with exp(iH) ~ u for unitary u.
inline CMatrix hermitian_log(const CMatrix& u) {
  Eigen::ComplexEigenSolver<CMatrix> es(u);
  if (es.info() != Eigen::Success)
    throw EigenDecompositionFailure("warm-start eigensolver did not converge");
  const int n = static_cast<int>(u.rows());
  CVector logs(n);
  for (int k = 0; k < n; ++k)
    logs[k] = std::arg(es.eigenvalues()[k]);
  // Eigenvectors of a numerically unitary matrix are close to orthonormal;
  // symmetrizing absorbs the residue.
  const CMatrix h = es.eigenvectors() * logs.asDiagonal() *
                    es.eigenvectors().inverse();
  return 0.5 * (h + h.adjoint());
}

}  // namespace detail

// Searches for a unitary whose modulus-squares reproduce the (diluted) target.
// Dilation factors are tried in increasing order; within each factor, restart 0
// warm-starts from the polar projection of the entrywise square root of the
// target and the remaining restarts draw random generators from the seeded
// stream (seed, k, restart). Returns the first solution meeting residual_tol,
// otherwise the best residual found with converged = false.
inline DilationSolution solve_unitary(const DilationProblem& problem) {
  if (problem.k_max < 1) throw InvalidProblem("k_max must be >= 1");
  if (!(problem.residual_tol > 0.0)) throw InvalidProblem("residual_tol must be > 0");
  if (problem.restarts < 1) throw InvalidProblem("restarts must be >= 1");

  const Matrix& g = problem.target.matrix();
  const int c = problem.target.dim();
  bool rows_ok = true;
  for (int i = 0; i < c; ++i)
    if (std::abs(g.row(i).sum() - 1.0) > tol::stoch * std::max(1.0, static_cast<double>(c)))
      rows_ok = false;

  DilationSolution best;
  best.residual = std::numeric_limits<double>::infinity();
  best.structurally_infeasible_k1 = !rows_ok;

  auto consider = [&](const CMatrix& u, int k, double f) {
    if (f < best.residual) {
      best.unitary = fix_gauge(u);
      best.dilation_factor = k;
      best.residual = f;
    }
  };

  for (int k = 1; k <= problem.k_max; ++k) {
    if (k == 1 && !rows_ok) continue;  // no unitary preimage can exist; dilate instead
    const Matrix target = dilute(g, k);
    const int d = c * k;

    auto fg = [&](const Vector& th, Vector& gr) { return objective_gradient(target, th, gr); };
    optim::Options opts;
    opts.target_f = std::min(1e-13, 1e-4 * problem.residual_tol);

    for (int r = 0; r < problem.restarts; ++r) {
      Vector theta0;
      if (r == 0) {
        const CMatrix u0 = detail::polar_unitary(target.cwiseSqrt().cast<Complex>());
        const double f0 = (u0.cwiseAbs2() - target).squaredNorm();
        best.restart_residuals[k].push_back(f0);
        if (f0 <= problem.residual_tol) {
          // Warm start already solves the problem (permutations land here with
          // residual exactly zero); keep it verbatim.
          best.unitary = fix_gauge(u0);
          best.dilation_factor = k;
          best.residual = (best.unitary.cwiseAbs2() - target).squaredNorm();
          best.converged = true;
          return best;
        }
        theta0 = detail::params_from_hermitian(detail::hermitian_log(u0));
      } else {
        Rng rng = Rng::derive(problem.seed, static_cast<std::uint64_t>(k),
                              static_cast<std::uint64_t>(r));
        theta0.resize(d * d);
        for (int p = 0; p < theta0.size(); ++p) theta0[p] = rng.gaussian() * 0.8;
      }

      const optim::Result res = optim::minimize(fg, std::move(theta0), opts);
      if (r == 0)
        best.restart_residuals[k].back() = res.f;  // replace warm-start value with optimized
      else
        best.restart_residuals[k].push_back(res.f);

      const CMatrix u = detail::exp_i_hermitian(
                            detail::hermitian_from_params(res.x, d)).u;
      consider(u, k, res.f);
      if (res.f <= problem.residual_tol) {
        best.converged = true;
        return best;
      }
    }
  }
  return best;  // converged == false: structured no-convergence result
}

}  // namespace isq::dilation
