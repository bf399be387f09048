#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "isq/common.hpp"
#include "isq/quantum.hpp"

namespace isq::fock {

inline constexpr int kMaxStates = 4096;

// Truncated bosonic basis on an interval of length L with hard walls: mode
// momenta p_n = n pi / L for n = 1..n_max, states are occupation multisets of
// total size <= max_particles, enumerated by particle count and then
// lexicographically, vacuum first.
class FockBasis {
 public:
  FockBasis(double length, int n_max, int max_particles)
      : length_(length), n_max_(n_max), max_particles_(max_particles) {
    if (!(length > 0.0)) throw InvalidArgs("box length must be > 0");
    if (n_max < 1) throw InvalidArgs("n_max must be >= 1");
    if (max_particles < 0) throw InvalidArgs("max_particles must be >= 0");
    std::vector<int> modes;
    for (int count = 0; count <= max_particles; ++count) enumerate(1, count, modes);
    if (static_cast<int>(states_.size()) > kMaxStates)
      throw BasisTooLarge("basis has " + std::to_string(states_.size()) +
                          " states, cap is " + std::to_string(kMaxStates));
    for (std::size_t s = 0; s < states_.size(); ++s) index_[states_[s]] = static_cast<int>(s);
  }

  double length() const { return length_; }
  int n_max() const { return n_max_; }
  int max_particles() const { return max_particles_; }
  int size() const { return static_cast<int>(states_.size()); }

  double momentum(int mode) const {
    if (mode < 1 || mode > n_max_) throw IndexOutOfRange("mode " + std::to_string(mode));
    return static_cast<double>(mode) * M_PI / length_;
  }

  // Sorted mode list of state s (empty for the vacuum).
  const std::vector<int>& state(int s) const {
    if (s < 0 || s >= size()) throw IndexOutOfRange("state " + std::to_string(s));
    return states_[static_cast<std::size_t>(s)];
  }

  int particle_count(int s) const { return static_cast<int>(state(s).size()); }

  // Index of an occupation multiset (modes in any order).
  int index_of(std::vector<int> modes) const {
    std::sort(modes.begin(), modes.end());
    const auto it = index_.find(modes);
    if (it == index_.end()) throw IndexOutOfRange("state not in basis");
    return it->second;
  }

  std::string label(int s) const {
    const auto& st = state(s);
    if (st.empty()) return "vacuum";
    std::string out;
    for (std::size_t k = 0; k < st.size(); ++k) {
      if (k) out += "+";
      out += "p" + std::to_string(st[k]);
    }
    return out;
  }

 private:
  void enumerate(int from, int remaining, std::vector<int>& modes) {
    if (remaining == 0) {
      states_.push_back(modes);
      return;
    }
    for (int m = from; m <= n_max_; ++m) {
      modes.push_back(m);
      enumerate(m, remaining - 1, modes);
      modes.pop_back();
    }
  }

  double length_;
  int n_max_;
  int max_particles_;
  std::vector<std::vector<int>> states_;
  std::map<std::vector<int>, int> index_;
};

// Time-dependent interaction in the truncated basis. Every evaluation is
// checked for Hermiticity.
class InteractionHamiltonian {
 public:
  InteractionHamiltonian(FockBasis basis, std::function<CMatrix(double)> matrix_fn)
      : basis_(std::move(basis)), fn_(std::move(matrix_fn)) {
    (void)at(0.0);  // fail fast on dimension or Hermiticity problems
  }

  const FockBasis& basis() const { return basis_; }

  CMatrix at(double t) const {
    CMatrix h;
    try {
      h = fn_(t);
    } catch (const std::exception& e) {
      throw EvaluationFailure(std::string("interaction evaluation failed: ") + e.what());
    }
    if (h.rows() != basis_.size() || h.cols() != basis_.size())
      throw DimensionMismatch("interaction matrix does not match basis size");
    const double dev = hermiticity_deviation(h);
    if (dev > tol::herm)
      throw NotHermitian("interaction Hermiticity deviation " + std::to_string(dev) +
                         " at t = " + std::to_string(t));
    return h;
  }

 private:
  FockBasis basis_;
  std::function<CMatrix(double)> fn_;
};

// Toy pair-production channel: constant coupling g between the vacuum and
// every two-particle state.
inline InteractionHamiltonian toy_pair_interaction(const FockBasis& basis, double g) {
  CMatrix h = CMatrix::Zero(basis.size(), basis.size());
  const int vac = basis.index_of({});
  for (int s = 0; s < basis.size(); ++s) {
    if (basis.particle_count(s) == 2) {
      h(vac, s) = g;
      h(s, vac) = g;
    }
  }
  return InteractionHamiltonian(basis, [h](double) { return h; });
}

struct DysonExpansion {
  int order = 0;
  double t0 = 0.0;
  double t = 0.0;
  // terms[k] is the order-(k+1) iterated integral including the (-i)^{k+1}
  // prefactor; the order-0 term is the identity and is not stored.
  std::vector<CMatrix> terms;
  CMatrix partial_sum;  // identity + all stored terms

  // Amplitude of order k (0 = identity term) between basis states.
  Complex amplitude(int k, int out, int in) const {
    if (k < 0 || k > order) throw IndexOutOfRange("order " + std::to_string(k));
    if (k == 0) return out == in ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
    return terms[static_cast<std::size_t>(k - 1)](out, in);
  }
};

namespace detail {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
// Legendre polynomial.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[static_cast<std::size_t>(i)] = -z;
    x[static_cast<std::size_t>(n - 1 - i)] = z;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[static_cast<std::size_t>(n - 1 - i)] = w[static_cast<std::size_t>(i)];
  }
}

// Iterated simplex integral J_k(tau) = int_{t0}^{tau} H(s) J_{k-1}(s) ds by
// recursive Gauss-Legendre; each level keeps the integrand smooth, so the
// quadrature converges spectrally for smooth H.
inline CMatrix iterated_integral(const InteractionHamiltonian& h, double t0, double tau,
                                 int level, const std::vector<double>& x,
                                 const std::vector<double>& w) {
  const int dim = h.basis().size();
  CMatrix acc = CMatrix::Zero(dim, dim);
  const double half = 0.5 * (tau - t0);
  const double mid = 0.5 * (tau + t0);
  for (std::size_t q = 0; q < x.size(); ++q) {
    const double s = mid + half * x[q];
    CMatrix inner = (level == 1)
                        ? CMatrix::Identity(dim, dim)
                        : iterated_integral(h, t0, s, level - 1, x, w);
    acc += (w[q] * half) * (h.at(s) * inner);
  }
  return acc;
}

}  // namespace detail

// Time-ordered expansion of the propagator over [t0, t]:
//   U_n = I + sum_{k=1..n} (-i)^k int_{t0<=s_1<=...<=s_k<=t} H(s_k)...H(s_1) ds.
// Cost grows as quad_points^order, which is why orders stop at 4.
inline DysonExpansion dyson_propagator(const InteractionHamiltonian& h, double t0, double t,
                                       int order, int quad_points) {
  if (order < 0 || order > 4)
    throw OrderUnsupported("order " + std::to_string(order) + " not in 0..4");
  if (quad_points < 8)
    throw QuadratureUnderflow("quad_points " + std::to_string(quad_points) + " < 8");
  if (!(t >= t0)) throw InvalidArgs("need t >= t0");

  std::vector<double> x, w;
  detail::gauss_legendre(quad_points, x, w);

  DysonExpansion expansion;
  expansion.order = order;
  expansion.t0 = t0;
  expansion.t = t;
  const int dim = h.basis().size();
  expansion.partial_sum = CMatrix::Identity(dim, dim);
  Complex prefactor(1.0, 0.0);
  for (int k = 1; k <= order; ++k) {
    prefactor *= Complex(0.0, -1.0);
    const CMatrix term = prefactor * detail::iterated_integral(h, t0, t, k, x, w);
    expansion.partial_sum += term;
    expansion.terms.push_back(term);
  }
  return expansion;
}

// |<out| U |in>|^2 for any matrix in the basis (exact propagator or truncated
// partial sum).
inline double s_matrix_probability(const CMatrix& u, int in, int out) {
  if (in < 0 || in >= u.cols() || out < 0 || out >= u.rows())
    throw IndexOutOfRange("state index out of range");
  return std::norm(u(out, in));
}

// Column total sum_out |<out| U |in>|^2; equals 1 for an exact unitary, and
// 1 + O(truncation defect) for a partial sum.
inline double total_out_probability(const CMatrix& u, int in) {
  if (in < 0 || in >= u.cols()) throw IndexOutOfRange("state index out of range");
  return u.col(in).cwiseAbs2().sum();
}

struct InterferenceBreakdown {
  std::vector<Complex> amplitudes;                       // A_0 .. A_order
  std::vector<std::pair<std::pair<int, int>, double>> cross;  // ((j,k), 2 Re conj(A_j) A_k)
  double direct = 0.0;  // sum |A_k|^2
  double total = 0.0;   // |sum A_k|^2
};

// Per-order amplitudes between fixed in/out states with all pairwise cross
// terms; direct + sum of cross terms reproduces |sum A_k|^2 identically.
inline InterferenceBreakdown term_interference(const DysonExpansion& dy, int in, int out) {
  const int dim = static_cast<int>(dy.partial_sum.rows());
  if (in < 0 || in >= dim || out < 0 || out >= dim)
    throw IndexOutOfRange("state index out of range");
  InterferenceBreakdown br;
  Complex sum(0.0, 0.0);
  for (int k = 0; k <= dy.order; ++k) {
    const Complex a = dy.amplitude(k, out, in);
    br.amplitudes.push_back(a);
    br.direct += std::norm(a);
    sum += a;
  }
  for (int j = 0; j <= dy.order; ++j)
    for (int k = j + 1; k <= dy.order; ++k)
      br.cross.push_back({{j, k},
                          2.0 * (std::conj(br.amplitudes[static_cast<std::size_t>(j)]) *
                                 br.amplitudes[static_cast<std::size_t>(k)])
                                    .real()});
  br.total = std::norm(sum);
  return br;
}

}  // namespace isq::fock
