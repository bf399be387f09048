// Acceptance suite: one self-timed criterion per CLI argument (1..11, or
// "all"). Each criterion prints a single PASS/FAIL line with the measured
// quantities and elapsed time; the exit code is 0 iff every requested
// criterion passed. Expected values come from closed forms, independent
// brute-force reconstructions, or quadrature, never from the code under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "isq/classical.hpp"
#include "isq/common.hpp"
#include "isq/dilation.hpp"
#include "isq/division.hpp"
#include "isq/ehrenfest.hpp"
#include "isq/fock.hpp"
#include "isq/io.hpp"
#include "isq/quantum.hpp"
#include "isq/rng.hpp"
#include "isq/scenario.hpp"
#include "isq/stochastic.hpp"

using namespace isq;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

CMatrix random_hermitian(int dim, Rng& rng) {
  CMatrix h(dim, dim);
  for (int i = 0; i < dim; ++i) {
    h(i, i) = Complex(rng.gaussian(), 0.0);
    for (int j = i + 1; j < dim; ++j) {
      const Complex z(rng.gaussian() * M_SQRT1_2, rng.gaussian() * M_SQRT1_2);
      h(i, j) = z;
      h(j, i) = std::conj(z);
    }
  }
  return h;
}

StateVector random_state(int dim, Rng& rng) {
  CVector psi(dim);
  for (int i = 0; i < dim; ++i) psi[i] = Complex(rng.gaussian(), rng.gaussian());
  psi /= psi.norm();
  return StateVector(psi);
}

// ---------------------------------------------------------------------------
// 1. Modulus-squared propagators are doubly stochastic.
// ---------------------------------------------------------------------------

Outcome criterion_unistochastic() {
  Rng rng = Rng::derive(2024, 1);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 2 + trial % 31;  // cycles through 2..32
    const HermitianOperator h(random_hermitian(dim, rng));
    const double t = 0.1 + 6.0 * rng.uniform();
    const Propagator u = evolve_unitary(h, t);
    const Matrix g = u.matrix().cwiseAbs2();
    double dev = 0.0;
    for (int j = 0; j < dim; ++j) {
      dev = std::max(dev, std::abs(g.col(j).sum() - 1.0));
      dev = std::max(dev, std::abs(g.row(j).sum() - 1.0));
      dev = std::max(dev, std::max(0.0, -g.col(j).minCoeff()));
    }
    worst = std::max(worst, dev);
    schur_mod_square(u);  // the library constructor must accept it too
  }
  return {worst <= 1e-9,
          "max doubly-stochastic deviation " + num(worst) + " over 200 generators, dims 2..32"};
}

// ---------------------------------------------------------------------------
// 2. Divisibility witness for the two-level cos^2/sin^2 family at
//    (t1, t2) = (pi/8, pi/4). The expected closed form is recomputed here by
//    the 2x2 adjugate inverse, with no shared code path.
// ---------------------------------------------------------------------------

Matrix right_factor_closed(double t1, double t2) {
  const auto gamma = [](double t) {
    Matrix g(2, 2);
    const double c2 = std::cos(t) * std::cos(t);
    g << c2, 1.0 - c2, 1.0 - c2, c2;
    return g;
  };
  const Matrix g1 = gamma(t1);
  const Matrix g2 = gamma(t2);
  const double det = g1(0, 0) * g1(1, 1) - g1(0, 1) * g1(1, 0);
  Matrix inv(2, 2);
  inv << g1(1, 1), -g1(0, 1), -g1(1, 0), g1(0, 0);
  return g2 * (inv / det);
}

Outcome criterion_rabi_witness() {
  const double t1 = M_PI / 8.0;
  const double t2 = M_PI / 4.0;
  const auto family = rabi_family({t1, t2});
  const auto verdict = divisibility_witness(family, t1, t2);

  const Matrix closed = right_factor_closed(t1, t2);
  const double oracle_negative = std::max(0.0, -closed.minCoeff());

  const bool witnessed = verdict.status == Divisibility::IndivisibleWitness;
  const bool magnitude_ok = std::abs(verdict.violation - oracle_negative) <= 1e-10 &&
                            oracle_negative > 0.0;
  std::ostringstream d;
  d << "measured status "
    << (witnessed ? "indivisible-witness"
                  : (verdict.status == Divisibility::DivisibleAt ? "divisible-at"
                                                                 : "inconclusive"))
    << ", violation " << num(verdict.violation) << "; closed-form right factor [["
    << num(closed(0, 0)) << ", " << num(closed(0, 1)) << "], [" << num(closed(1, 0)) << ", "
    << num(closed(1, 1)) << "]] has min entry " << num(closed.minCoeff())
    << " (negative magnitude " << num(oracle_negative) << ")";
  if (!witnessed && oracle_negative == 0.0)
    d << "; no negative entry exists at this pair, so an indivisible-witness verdict "
         "is not obtainable here";
  return {witnessed && magnitude_ok, d.str()};
}

// ---------------------------------------------------------------------------
// 3. Two evolution routes for configuration probabilities agree.
// ---------------------------------------------------------------------------

Outcome criterion_two_route() {
  Rng rng = Rng::derive(2024, 3);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int dim = 2 + trial % 15;
    const HermitianOperator h(random_hermitian(dim, rng));
    const Propagator u = evolve_unitary(h, 0.1 + 4.0 * rng.uniform());
    const ProbabilityVector prior = born_probabilities(random_state(dim, rng));
    const ProbabilityVector via_stochastic = marginalize(schur_mod_square(u), prior);
    const ProbabilityVector via_density = probabilities(density_evolution(prior, u));
    worst = std::max(worst, max_abs((via_stochastic.values() - via_density.values()).eval()));
  }
  return {worst <= 1e-9, "max route difference " + num(worst) + " over 500 instances"};
}

// ---------------------------------------------------------------------------
// 4. Interference decomposition reproduces |psi1 + psi2|^2 exactly.
// ---------------------------------------------------------------------------

Outcome criterion_interference() {
  Rng rng = Rng::derive(2024, 4);
  double worst = 0.0;
  for (int pair = 0; pair < 10000; ++pair) {
    const int dim = 1 + pair % 8;
    CVector a(dim), b(dim);
    for (int i = 0; i < dim; ++i) {
      a[i] = Complex(rng.gaussian(), rng.gaussian()) * 0.5;
      b[i] = Complex(rng.gaussian(), rng.gaussian()) * 0.5;
    }
    const auto terms = interference_decompose(a, b);
    for (int i = 0; i < dim; ++i)
      worst = std::max(worst,
                       std::abs(terms[static_cast<std::size_t>(i)].total() - std::norm(a[i] + b[i])));
  }
  return {worst <= 1e-14, "max decomposition error " + num(worst) + " over 10000 pairs"};
}

// ---------------------------------------------------------------------------
// 5. Dilation search: solvable flat target, obstructed zero-diagonal target,
//    and the analytic gradient against central finite differences.
// ---------------------------------------------------------------------------

Outcome criterion_dilation() {
  std::ostringstream d;
  bool ok = true;

  Matrix flat2(2, 2);
  flat2.setConstant(0.5);
  const dilation::DilationProblem flat_problem{validate_stochastic(flat2), 1, 1e-12, 20, 7};
  const auto flat_sol = dilation::solve_unitary(flat_problem);
  const bool flat_ok = flat_sol.converged && flat_sol.dilation_factor == 1 &&
                       flat_sol.residual <= 1e-10;
  ok = ok && flat_ok;
  d << "flat 2x2 residual " << num(flat_sol.residual) << " at k=" << flat_sol.dilation_factor;

  CMatrix hadamard(2, 2);
  hadamard << 1.0, 1.0, 1.0, -1.0;
  hadamard *= M_SQRT1_2;
  const double gauge_err = max_abs((dilation::fix_gauge(flat_sol.unitary) - hadamard).eval());
  ok = ok && gauge_err <= 1e-5;
  d << ", gauge distance to the real balanced unitary " << num(gauge_err);

  Matrix obstructed(3, 3);
  obstructed << 0.0, 0.5, 0.5, 0.5, 0.0, 0.5, 0.5, 0.5, 0.0;
  const auto obstruction = dilation::obstruction_test_3x3(validate_stochastic(obstructed));
  ok = ok && obstruction.status == dilation::Obstruction::Obstructed;
  d << "; zero-diagonal 3x3 oracle gap " << num(obstruction.gap);

  const dilation::DilationProblem hard{validate_stochastic(obstructed), 2, 1e-8, 20, 11};
  const auto hard_sol = dilation::solve_unitary(hard);
  double k1_best = std::numeric_limits<double>::infinity();
  const auto it = hard_sol.restart_residuals.find(1);
  std::size_t k1_restarts = 0;
  if (it != hard_sol.restart_residuals.end()) {
    k1_restarts = it->second.size();
    for (double r : it->second) k1_best = std::min(k1_best, r);
  }
  const bool hard_ok = k1_restarts >= 20 && k1_best >= 1e-3 && hard_sol.converged &&
                       hard_sol.dilation_factor == 2 && hard_sol.residual <= 1e-8;
  ok = ok && hard_ok;
  d << ", best k=1 residual " << num(k1_best) << " over " << k1_restarts
    << " restarts, k=2 residual " << num(hard_sol.residual);

  Rng rng = Rng::derive(2024, 5);
  double worst_rel = 0.0;
  for (int point = 0; point < 50; ++point) {
    const int dim = 2 + point % 3;
    Matrix target(dim, dim);
    for (int j = 0; j < dim; ++j) {
      double sum = 0.0;
      for (int i = 0; i < dim; ++i) {
        target(i, j) = rng.uniform() + 1e-3;
        sum += target(i, j);
      }
      target.col(j) /= sum;
    }
    Vector theta(dim * dim);
    for (int i = 0; i < theta.size(); ++i) theta[i] = rng.gaussian() * 0.7;
    Vector grad(theta.size());
    dilation::objective_gradient(target, theta, grad);
    Vector fd(theta.size());
    const double h = 1e-6;
    for (int i = 0; i < theta.size(); ++i) {
      Vector tp = theta, tm = theta;
      tp[i] += h;
      tm[i] -= h;
      fd[i] = (dilation::objective(target, tp) - dilation::objective(target, tm)) / (2.0 * h);
    }
    const double scale = std::max(1.0, max_abs(grad));
    worst_rel = std::max(worst_rel, max_abs((grad - fd).eval()) / scale);
  }
  ok = ok && worst_rel <= 1e-6;
  d << ", gradient vs finite differences " << num(worst_rel) << " relative over 50 points";

  return {ok, d.str()};
}

// ---------------------------------------------------------------------------
// 6. Division events: injective record maps, the constant-map counterexample,
//    and the brute-force joint-state marginal.
// ---------------------------------------------------------------------------

Vector brute_marginal(const division::JointSystem& js, double t) {
  const CMatrix us = js.sys_propagator(t).matrix();
  const CMatrix ue = js.env_propagator(t).matrix();
  const int n = js.correlation.system_dim;
  const int m = js.correlation.env_dim;
  std::vector<Complex> joint(static_cast<std::size_t>(n) * m, Complex(0, 0));
  for (int i = 0; i < n; ++i)
    for (int e = 0; e < m; ++e)
      for (int ip = 0; ip < n; ++ip)
        joint[static_cast<std::size_t>(i) * m + e] +=
            us(i, ip) * js.psi0.amplitudes()[ip] * ue(e, js.correlation.map[ip]);
  Vector p = Vector::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int e = 0; e < m; ++e) p[i] += std::norm(joint[static_cast<std::size_t>(i) * m + e]);
  return p;
}

Outcome criterion_division() {
  Rng rng = Rng::derive(2024, 6);
  double worst_formula = 0.0;
  double worst_brute = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + rng.uniform_int(11);       // 2..12
    const int m = n + rng.uniform_int(65 - n);   // n..64
    std::vector<int> slots(static_cast<std::size_t>(m));
    for (int e = 0; e < m; ++e) slots[static_cast<std::size_t>(e)] = e;
    for (int e = m - 1; e > 0; --e)
      std::swap(slots[static_cast<std::size_t>(e)],
                slots[static_cast<std::size_t>(rng.uniform_int(e + 1))]);
    const std::vector<int> map(slots.begin(), slots.begin() + n);

    const division::JointSystem js(HermitianOperator(random_hermitian(n, rng)),
                                   HermitianOperator(random_hermitian(m, rng)),
                                   division::CorrelationMap(n, m, map), random_state(n, rng),
                                   0.3);
    const double t = 0.3 + 2.0 * rng.uniform();
    const auto rep = division::division_report(js, t);
    worst_formula = std::max(worst_formula, rep.max_error);
    worst_brute = std::max(worst_brute, max_abs((rep.exact - brute_marginal(js, t)).eval()));
  }

  // Constant record map with an involutive system generator: the exact
  // marginal is a point mass while the transition-matrix shortcut stays flat.
  CMatrix balanced(2, 2);
  balanced << 1.0, 1.0, 1.0, -1.0;
  balanced *= M_SQRT1_2;
  CVector plus(2);
  plus << M_SQRT1_2, M_SQRT1_2;
  const division::JointSystem counter(HermitianOperator(balanced),
                                      HermitianOperator(CMatrix::Zero(2, 2)),
                                      division::CorrelationMap(2, 2, {0, 0}),
                                      StateVector(plus), 0.0);
  const auto counter_rep = division::division_report(counter, M_PI_2);
  const double counter_err = std::abs(counter_rep.max_error - 0.5);

  const bool ok = worst_formula <= 1e-12 && counter_err <= 1e-12 && worst_brute <= 1e-12;
  std::ostringstream d;
  d << "injective max_error " << num(worst_formula) << " over 100 instances, constant-map "
    << "max_error " << num(counter_rep.max_error) << ", brute-force marginal gap "
    << num(worst_brute);
  return {ok, d.str()};
}

// ---------------------------------------------------------------------------
// 7. Record-slot collision probabilities.
// ---------------------------------------------------------------------------

Outcome criterion_collision() {
  const double p22 = division::collision_probability_exact(2, 2);
  const double p32 = division::collision_probability_exact(3, 2);
  const double exact_large = division::collision_probability_exact(10, 10000);
  const double approx_large = division::collision_probability_approx(10, 10000);
  const double rel = std::abs(approx_large - exact_large) / exact_large;

  const int n = 4, m = 16, draws = 100000;
  Rng rng = Rng::derive(2024, 7);
  const double freq = division::injectivity_frequency(n, m, draws, rng);
  const double p = division::collision_probability_exact(n, m);
  const double se = std::sqrt(p * (1.0 - p) / draws);
  const double pulls = std::abs(freq - p) / se;

  const bool ok = std::abs(p22 - 0.5) <= 1e-15 && p32 == 0.0 && rel <= 1e-3 && pulls <= 4.0;
  std::ostringstream d;
  d << "P(2,2) = " << num(p22) << ", P(3,2) = " << num(p32) << ", approx rel error "
    << num(rel) << " at (10, 10^4), Monte Carlo frequency " << num(freq) << " vs " << num(p)
    << " (" << num(pulls) << " standard errors)";
  return {ok, d.str()};
}

// ---------------------------------------------------------------------------
// 8. Classical limit: centre-of-mass narrowing, the radial moment against
//    quadrature, and the exact scaled-variance power law.
// ---------------------------------------------------------------------------

Outcome criterion_classical() {
  std::ostringstream d;
  bool ok = true;

  const double sigma0 = 1.0;
  double worst_pulls = 0.0;
  for (int n : {1, 10, 100, 1000}) {
    classical::EnsembleSpec spec;
    spec.n_particles = n;
    spec.dimension = 1;
    spec.dist = classical::Gaussian{sigma0};
    spec.seed = 900 + static_cast<std::uint64_t>(n);
    const auto stats = classical::cm_statistics(spec, 100000, 1);
    const double pulls = std::abs(stats.variance - sigma0 / n) / stats.stderr_variance;
    worst_pulls = std::max(worst_pulls, pulls);
  }
  ok = ok && worst_pulls <= 4.0;
  d << "CM variance worst deviation " << num(worst_pulls)
    << " standard errors over N in {1,10,100,1000}";

  double worst_quad = 0.0;
  for (const auto& [a, c] : std::vector<std::pair<double, double>>{
           {1.0, 1.0}, {2.0, 3.0}, {0.5, 0.25}}) {
    const double analytic = c / (2.0 * a);
    const double quad = classical::radial_moment_quadrature(a, c);
    worst_quad = std::max(worst_quad, std::abs(quad - analytic));
    classical::radial_moment(a, c);  // must accept its own cross-check
  }
  ok = ok && worst_quad <= 1e-8;
  d << "; radial moment vs quadrature " << num(worst_quad);

  double worst_power = 0.0;
  const double a0 = 1.5, c = 2.0, m_exp = 2.0;
  for (std::int64_t n : {1, 10, 100, 1000}) {
    const double expected = c / (2.0 * a0) * std::pow(static_cast<double>(n), 1.0 - m_exp);
    const double got = classical::scaled_variance(a0, c, m_exp, n);
    worst_power = std::max(worst_power, std::abs(got - expected) / expected);
  }
  ok = ok && worst_power <= 1e-14;
  d << "; scaled-variance power law relative error " << num(worst_power);

  return {ok, d.str()};
}

// ---------------------------------------------------------------------------
// 9. Ehrenfest comparison: round-off deviation for the harmonic force,
//    1/N bias decay for the quartic force.
// ---------------------------------------------------------------------------

Outcome criterion_ehrenfest() {
  classical::EnsembleSpec spec;
  spec.dimension = 1;
  spec.dist = classical::Gaussian{1.0};
  spec.seed = 77;

  classical::EhrenfestOptions opt;
  opt.r0 = Vector::Constant(1, 1.0);
  opt.t_end = 10.0;
  opt.dt = 1e-3;
  opt.n_list = {10, 100, 1000};
  opt.ensemble = 4000;
  opt.workers = 1;

  classical::PotentialSpec harmonic;
  harmonic.kind = classical::PotentialKind::Harmonic;
  harmonic.k = 1.0;
  const auto hrep = classical::ehrenfest_compare(harmonic, spec, 1.0, opt);
  double worst_dev = 0.0;
  for (const auto& [n, dev] : hrep.deviations) worst_dev = std::max(worst_dev, dev);

  classical::PotentialSpec quartic;
  quartic.kind = classical::PotentialKind::Quartic;
  quartic.k = 1.0;
  quartic.lambda = 0.1;
  const auto qrep = classical::ehrenfest_compare(quartic, spec, 1.0, opt);

  const bool ok = worst_dev <= 1e-6 && qrep.fit.slope >= -1.3 && qrep.fit.slope <= -0.7;
  std::ostringstream d;
  d << "harmonic worst deviation " << num(worst_dev) << ", quartic log-log slope "
    << num(qrep.fit.slope) << " (stderr " << num(qrep.fit.slope_stderr) << ") across N in "
    << "{10,100,1000}";
  return {ok, d.str()};
}

// ---------------------------------------------------------------------------
// 10. Time-ordered expansion: order-n error contracts at least 2^{n+0.5}
//     under step halving, and the per-order amplitudes recombine exactly.
// ---------------------------------------------------------------------------

Outcome criterion_dyson() {
  const fock::FockBasis basis(10.0, 2, 2);
  const auto h = fock::toy_pair_interaction(basis, 0.3);
  const HermitianOperator h0(h.at(0.0));

  std::ostringstream d;
  bool ok = true;
  d << "error ratios";
  for (int order = 1; order <= 3; ++order) {
    const auto coarse = fock::dyson_propagator(h, 0.0, 0.2, order, 24);
    const auto fine = fock::dyson_propagator(h, 0.0, 0.1, order, 24);
    const double e_coarse =
        max_abs((coarse.partial_sum - evolve_unitary(h0, 0.2).matrix()).eval());
    const double e_fine = max_abs((fine.partial_sum - evolve_unitary(h0, 0.1).matrix()).eval());
    const double ratio = e_coarse / e_fine;
    ok = ok && ratio >= std::pow(2.0, order + 0.5);
    d << " n=" << order << ": " << num(ratio) << " (need >= " << num(std::pow(2.0, order + 0.5))
      << ")";
    if (order < 3) d << ",";
  }

  const auto dy = fock::dyson_propagator(h, 0.0, 1.0, 3, 32);
  const int in = basis.index_of({});
  const int out = basis.index_of({1, 1});
  const auto br = fock::term_interference(dy, in, out);
  Complex total(0.0, 0.0);
  for (const Complex& a : br.amplitudes) total += a;
  double cross_sum = 0.0;
  for (const auto& [jk, v] : br.cross) cross_sum += v;
  const double identity_err =
      std::max({std::abs(total - dy.partial_sum(out, in)), std::abs(std::norm(total) - br.total),
                std::abs(br.direct + cross_sum - br.total)});
  ok = ok && identity_err <= 1e-14;
  d << "; amplitude recombination error " << num(identity_err);
  return {ok, d.str()};
}

// ---------------------------------------------------------------------------
// 11. Determinism: scenario reruns with the same config are byte-identical.
// ---------------------------------------------------------------------------

run::json strip_timestamps(run::json manifest) {
  manifest.erase("started");
  manifest.erase("finished");
  return manifest;
}

Outcome criterion_determinism() {
  const std::vector<run::json> configs = {
      {{"scenario", "rabi-indivisibility"},
       {"params", {{"t1", 0.39269908169872414}, {"t2", 1.5707963267948966}}},
       {"seed", 3}},
      {{"scenario", "interference"}, {"params", {{"dim", 3}, {"pairs", 200}}}, {"seed", 12}},
      {{"scenario", "collision"}, {"params", {{"n", 3}, {"m", 7}}}},
      {{"scenario", "scattering"},
       {"params", {{"g", 0.2}, {"t", 0.5}, {"order", 2}, {"quad", 16}}},
       {"seed", 1}},
      {{"scenario", "classical-limit"},
       {"params",
        {{"task", "cm"}, {"n_list", {1, 4}}, {"samples", 20000}}},
       {"seed", 5},
       {"format", "json"}},
  };

  const auto root = std::filesystem::temp_directory_path() / "isq_acceptance_determinism";
  std::filesystem::remove_all(root);

  int files_compared = 0;
  for (std::size_t idx = 0; idx < configs.size(); ++idx) {
    run::json doc = configs[idx];
    doc["output_dir"] = (root / ("a" + std::to_string(idx))).string();
    const auto first = run::run_scenario(run::parse_config(doc));
    doc["output_dir"] = (root / ("b" + std::to_string(idx))).string();
    const auto second = run::run_scenario(run::parse_config(doc));

    if (first.data_files.size() != second.data_files.size())
      return {false, "rerun of " + configs[idx]["scenario"].get<std::string>() +
                         " produced a different file set"};
    for (std::size_t f = 0; f < first.data_files.size(); ++f) {
      ++files_compared;
      if (io::read_file(first.data_files[f]) != io::read_file(second.data_files[f]))
        return {false, "rerun of " + configs[idx]["scenario"].get<std::string>() +
                           " changed " + first.data_files[f].filename().string()};
    }
    if (strip_timestamps(io::load_json_file(first.manifest_path)) !=
        strip_timestamps(io::load_json_file(second.manifest_path)))
      return {false, "rerun of " + configs[idx]["scenario"].get<std::string>() +
                         " changed the manifest beyond its timestamps"};
  }
  std::filesystem::remove_all(root);
  return {true, std::to_string(files_compared) + " data files byte-identical across 5 scenario "
                "reruns; manifests differ only in timestamps"};
}

struct Criterion {
  int id;
  double budget_seconds;
  std::function<Outcome()> fn;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, 10.0, criterion_unistochastic}, {2, 1.0, criterion_rabi_witness},
      {3, 10.0, criterion_two_route},     {4, 5.0, criterion_interference},
      {5, 120.0, criterion_dilation},     {6, 30.0, criterion_division},
      {7, 30.0, criterion_collision},     {8, 60.0, criterion_classical},
      {9, 180.0, criterion_ehrenfest},    {10, 60.0, criterion_dyson},
      {11, 120.0, criterion_determinism},
  };
  return all;
}

bool run_one(const Criterion& c) {
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = c.fn();
  } catch (const std::exception& e) {
    outcome = {false, std::string("unexpected exception: ") + e.what()};
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_budget = elapsed <= c.budget_seconds;
  const bool pass = outcome.pass && in_budget;
  std::printf("criterion %2d: %s (%.2fs) %s%s\n", c.id, pass ? "PASS" : "FAIL", elapsed,
              outcome.detail.c_str(),
              in_budget ? "" : (" [over time budget of " + num(c.budget_seconds) + "s]").c_str());
  std::fflush(stdout);
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  if (argc <= 1 || std::string(argv[1]) == "all") {
    for (const auto& c : criteria()) wanted.insert(c.id);
  } else {
    for (int i = 1; i < argc; ++i) {
      const int id = std::atoi(argv[i]);
      if (id < 1 || id > static_cast<int>(criteria().size())) {
        std::fprintf(stderr, "unknown criterion \"%s\" (expected 1..%zu or \"all\")\n", argv[i],
                     criteria().size());
        return 2;
      }
      wanted.insert(id);
    }
  }

  bool all_pass = true;
  for (const auto& c : criteria())
    if (wanted.count(c.id)) all_pass = run_one(c) && all_pass;
  return all_pass ? 0 : 1;
}
