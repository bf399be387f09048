#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "isq/fock.hpp"
#include "isq/quantum.hpp"

using namespace isq;
using namespace isq::fock;

namespace {

// Closed-form propagator for a constant interaction: exp(-i H (t - t0)).
CMatrix exact_constant(const CMatrix& h, double dt) {
  return evolve_unitary(HermitianOperator(h), dt).matrix();
}

// k-th Taylor term of exp(-i H dt): (-i dt)^k H^k / k!.
CMatrix taylor_term(const CMatrix& h, double dt, int k) {
  CMatrix p = CMatrix::Identity(h.rows(), h.cols());
  double fact = 1.0;
  for (int j = 1; j <= k; ++j) {
    p = p * h;
    fact *= j;
  }
  return std::pow(Complex(0.0, -dt), k) / fact * p;
}

}  // namespace

TEST_CASE("basis enumeration is by count then lexicographic", "[fock]") {
  const FockBasis basis(10.0, 2, 2);
  REQUIRE(basis.size() == 6);
  CHECK(basis.state(0) == std::vector<int>{});
  CHECK(basis.state(1) == std::vector<int>{1});
  CHECK(basis.state(2) == std::vector<int>{2});
  CHECK(basis.state(3) == std::vector<int>{1, 1});
  CHECK(basis.state(4) == std::vector<int>{1, 2});
  CHECK(basis.state(5) == std::vector<int>{2, 2});

  CHECK(basis.label(0) == "vacuum");
  CHECK(basis.label(4) == "p1+p2");
  CHECK(basis.particle_count(0) == 0);
  CHECK(basis.particle_count(5) == 2);

  // Box momenta p_n = n pi / L.
  CHECK(basis.momentum(1) == Catch::Approx(M_PI / 10.0).margin(1e-15));
  CHECK(basis.momentum(2) == Catch::Approx(2.0 * M_PI / 10.0).margin(1e-15));

  CHECK(basis.index_of({2, 1}) == 4);  // unsorted input is normalized
  CHECK_THROWS_AS(basis.index_of({3}), IndexOutOfRange);
  CHECK_THROWS_AS(basis.momentum(0), IndexOutOfRange);
}

TEST_CASE("basis size grows combinatorially and is capped", "[fock]") {
  // n_max = 3, up to 2 particles: 1 + 3 + 6 multisets.
  CHECK(FockBasis(1.0, 3, 2).size() == 10);
  CHECK(FockBasis(1.0, 1, 0).size() == 1);
  CHECK_THROWS_AS(FockBasis(1.0, 200, 3), BasisTooLarge);
  CHECK_THROWS_AS(FockBasis(-1.0, 2, 2), InvalidArgs);
}

TEST_CASE("interaction hamiltonians must stay hermitian", "[fock]") {
  const FockBasis basis(10.0, 1, 1);
  const auto bad = [&](double) {
    CMatrix h = CMatrix::Zero(2, 2);
    h(0, 1) = Complex(1.0, 0.0);
    return h;
  };
  CHECK_THROWS_AS(InteractionHamiltonian(basis, bad), NotHermitian);

  const auto wrong_dim = [&](double) { return CMatrix::Zero(3, 3); };
  CHECK_THROWS_AS(InteractionHamiltonian(basis, wrong_dim), DimensionMismatch);
}

TEST_CASE("toy interaction couples the vacuum to every pair", "[fock]") {
  const FockBasis basis(10.0, 2, 2);
  const auto h = toy_pair_interaction(basis, 0.3);
  const CMatrix m = h.at(0.0);
  for (int s = 0; s < basis.size(); ++s) {
    const bool pair = basis.particle_count(s) == 2;
    CHECK(std::abs(m(0, s) - (pair ? Complex(0.3, 0) : Complex(0, 0))) < 1e-15);
    CHECK(std::abs(m(s, 0) - (pair ? Complex(0.3, 0) : Complex(0, 0))) < 1e-15);
  }
  // No couplings away from the vacuum row/column.
  for (int s = 1; s < basis.size(); ++s)
    for (int r = 1; r < basis.size(); ++r) CHECK(std::abs(m(r, s)) == 0.0);
}

TEST_CASE("expansion terms for a constant generator are taylor terms", "[fock]") {
  const FockBasis basis(10.0, 2, 2);
  const auto h = toy_pair_interaction(basis, 0.4);
  const double t = 0.7;
  const auto dy = dyson_propagator(h, 0.0, t, 4, 24);

  REQUIRE(dy.terms.size() == 4);
  const CMatrix hm = h.at(0.0);
  for (int k = 1; k <= 4; ++k) {
    // Time-ordered nested integrals of a constant generator collapse to
    // dt^k / k!, so each term is a Taylor term of the exponential. The
    // quadrature is exact here because the integrands are polynomials.
    const CMatrix expected = taylor_term(hm, t, k);
    CHECK(max_abs(CMatrix(dy.terms[static_cast<std::size_t>(k - 1)] - expected)) < 1e-12);
  }

  CMatrix sum = CMatrix::Identity(basis.size(), basis.size());
  for (const auto& term : dy.terms) sum += term;
  CHECK(max_abs(CMatrix(dy.partial_sum - sum)) < 1e-14);
}

TEST_CASE("a frozen generator leaves the identity", "[fock]") {
  const FockBasis basis(10.0, 2, 2);
  const auto h = toy_pair_interaction(basis, 0.0);
  const auto dy = dyson_propagator(h, 0.0, 1.0, 3, 16);
  CHECK(max_abs(CMatrix(dy.partial_sum - CMatrix::Identity(basis.size(), basis.size()))) <
        1e-14);
}

TEST_CASE("truncation error halves like 2^(n+1)", "[fock]") {
  const FockBasis basis(10.0, 2, 2);
  const auto h = toy_pair_interaction(basis, 1.0);
  const double dt = 0.2;

  for (int order : {1, 2}) {
    const auto coarse = dyson_propagator(h, 0.0, dt, order, 24);
    const auto fine = dyson_propagator(h, 0.0, dt / 2.0, order, 24);
    const double e_coarse = max_abs(CMatrix(exact_constant(h.at(0.0), dt) - coarse.partial_sum));
    const double e_fine =
        max_abs(CMatrix(exact_constant(h.at(0.0), dt / 2.0) - fine.partial_sum));
    const double ratio = e_coarse / e_fine;
    // Leading truncation term is O(dt^(n+1)), so halving dt divides the error
    // by about 2^(n+1).
    CHECK(ratio > std::pow(2.0, order + 0.5));
    CHECK(ratio < std::pow(2.0, order + 1.8));
  }
}

TEST_CASE("commuting time dependence integrates exactly", "[fock]") {
  // H(t) = t * H0 commutes with itself at all times, so the k-th term is
  // (-i)^k H0^k (t^2/2)^k / k!.
  const FockBasis basis(10.0, 2, 2);
  const CMatrix h0 = toy_pair_interaction(basis, 0.5).at(0.0);
  const InteractionHamiltonian h(basis, [&](double t) { return CMatrix(t * h0); });

  const double t = 1.1;
  const auto dy = dyson_propagator(h, 0.0, t, 3, 32);
  const double phase = t * t / 2.0;
  for (int k = 1; k <= 3; ++k) {
    const CMatrix expected = taylor_term(h0, phase, k);
    CHECK(max_abs(CMatrix(dy.terms[static_cast<std::size_t>(k - 1)] - expected)) < 1e-11);
  }
}

TEST_CASE("expansion guards its arguments", "[fock]") {
  const FockBasis basis(10.0, 2, 2);
  const auto h = toy_pair_interaction(basis, 0.1);
  CHECK_THROWS_AS(dyson_propagator(h, 0.0, 1.0, 5, 16), OrderUnsupported);
  CHECK_THROWS_AS(dyson_propagator(h, 0.0, 1.0, -1, 16), OrderUnsupported);
  CHECK_THROWS_AS(dyson_propagator(h, 0.0, 1.0, 2, 4), QuadratureUnderflow);
  CHECK_THROWS_AS(dyson_propagator(h, 1.0, 0.5, 2, 16), InvalidArgs);
}

TEST_CASE("transition probabilities and interference breakdown", "[fock]") {
  const FockBasis basis(10.0, 2, 2);
  const auto h = toy_pair_interaction(basis, 0.2);
  const auto dy = dyson_propagator(h, 0.0, 1.0, 3, 24);

  const int vac = basis.index_of({});
  const int pair = basis.index_of({1, 2});

  const auto br = term_interference(dy, vac, pair);
  REQUIRE(br.amplitudes.size() == 4);

  // Amplitudes per order sum to the matrix element of the partial sum.
  Complex total(0, 0);
  for (const auto& a : br.amplitudes) total += a;
  CHECK(std::abs(total - dy.partial_sum(pair, vac)) < 1e-14);

  CHECK(br.total == Catch::Approx(std::norm(total)).margin(1e-14));
  CHECK(br.total == Catch::Approx(s_matrix_probability(dy.partial_sum, vac, pair)).margin(1e-14));

  // direct + sum of cross terms reassembles the total.
  double cross_sum = 0.0;
  for (const auto& [jk, value] : br.cross) cross_sum += value;
  CHECK(br.direct + cross_sum == Catch::Approx(br.total).margin(1e-13));

  // Out-probabilities over all states stay near one at weak coupling; the
  // defect is the truncation's unitarity error, dominated by the first
  // missing order: the vacuum couples to three pair states, so the effective
  // coupling is g sqrt(3) and the order-4 cross term contributes about
  // 2 (g sqrt(3) t)^4 / 4!.
  const double g_eff = 0.2 * std::sqrt(3.0);
  const double first_missing = 2.0 * std::pow(g_eff, 4) / 24.0;
  const double total_out = total_out_probability(dy.partial_sum, vac);
  CHECK(std::abs(total_out - 1.0) < 1.5 * first_missing);
}
