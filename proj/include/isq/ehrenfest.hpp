#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "isq/classical.hpp"
#include "isq/common.hpp"
#include "isq/parallel.hpp"
#include "isq/rng.hpp"

namespace isq::classical {

enum class PotentialKind { Harmonic, Quartic, Tabulated };

// Radial potentials V(R) = k r^2 / 2 (+ lambda r^4 / 4 for the quartic), or a
// 1-D tabulated potential with linearly interpolated values and secant
// gradients (analytic_gradient = false).
struct PotentialSpec {
  PotentialKind kind = PotentialKind::Harmonic;
  double k = 1.0;
  double lambda = 0.0;
  std::vector<double> grid;    // tabulated only, strictly increasing
  std::vector<double> values;  // tabulated only

  bool analytic_gradient() const { return kind != PotentialKind::Tabulated; }

  void validate() const {
    if (kind == PotentialKind::Tabulated) {
      if (grid.size() < 2 || grid.size() != values.size())
        throw InvalidSpec("tabulated potential needs matching grid/value arrays, length >= 2");
      for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw InvalidSpec("tabulated grid must increase");
    } else if (!(k >= 0.0)) {
      throw InvalidSpec("spring constant must be >= 0");
    }
  }

  double value(const Vector& r) const {
    switch (kind) {
      case PotentialKind::Harmonic:
        return 0.5 * k * r.squaredNorm();
      case PotentialKind::Quartic: {
        const double r2 = r.squaredNorm();
        return 0.5 * k * r2 + 0.25 * lambda * r2 * r2;
      }
      case PotentialKind::Tabulated:
        return interp(r[0]);
    }
    return 0.0;
  }

  void gradient(const Vector& r, Vector& out) const {
    switch (kind) {
      case PotentialKind::Harmonic:
        out = k * r;
        return;
      case PotentialKind::Quartic:
        out = (k + lambda * r.squaredNorm()) * r;
        return;
      case PotentialKind::Tabulated: {
        const double x = r[0];
        const std::size_t i = bracket(x);
        out.resize(1);
        out[0] = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
        return;
      }
    }
  }

 private:
  std::size_t bracket(double x) const {
    if (x <= grid.front()) return 0;
    if (x >= grid.back()) return grid.size() - 2;
    std::size_t lo = 0, hi = grid.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (grid[mid] <= x ? lo : hi) = mid;
    }
    return lo;
  }
  double interp(double x) const {
    const std::size_t i = bracket(x);
    const double w = (x - grid[i]) / (grid[i + 1] - grid[i]);
    return values[i] * (1.0 - w) + values[i + 1] * w;
  }
};

struct EhrenfestOptions {
  Vector r0;             // initial centre-of-mass position, velocity starts at 0
  double t_end = 10.0;
  double dt = 1e-3;
  std::vector<int> n_list = {10, 100, 1000};
  int ensemble = 4000;   // stochastic samples per N (rounded up to an even count)
  int workers = 1;
  double max_energy_drift = 0.01;  // reference-integrator guard
};

struct EhrenfestReport {
  std::vector<std::pair<int, double>> deviations;  // (N, max_t |<R> - R_ref|)
  PowerLawFit fit;                                 // log deviation vs log N
  double energy_drift = 0.0;                       // reference trajectory, relative
  double dt = 0.0;
  int steps = 0;
  int ensemble = 0;
};

// Compares the deterministic trajectory M R'' = -grad V(R) against the mean of
// a stochastic ensemble whose force is sampled at jittered positions
// R + xi with per-axis jitter variance sigma0 / N, redrawn every step. Samples
// are antithetic (+xi / -xi pairs), so a linear force cancels exactly and the
// harmonic deviation stays at integrator/round-off level, while anharmonic
// forces acquire the second-moment Taylor remainder, which shrinks as 1/N.
inline EhrenfestReport ehrenfest_compare(const PotentialSpec& pot, const EnsembleSpec& spec,
                                         double mass, const EhrenfestOptions& opt) {
  pot.validate();
  spec.validate();
  if (!(mass > 0.0)) throw InvalidSpec("mass must be > 0");
  if (!(opt.dt > 0.0) || !(opt.t_end > 0.0)) throw InvalidSpec("dt and t_end must be > 0");
  if (opt.r0.size() != spec.dimension) throw DimensionMismatch("r0 does not match dimension");
  const auto* g = std::get_if<Gaussian>(&spec.dist);
  if (!g) throw InvalidSpec("ehrenfest jitter is defined for the gaussian distribution");

  const int d = spec.dimension;
  const int steps = static_cast<int>(std::llround(opt.t_end / opt.dt));
  if (steps < 1) throw InvalidSpec("t_end shorter than one step");
  const int pairs = (opt.ensemble + 1) / 2;
  const int ensemble = 2 * pairs;

  // Reference trajectory, plus the energy-drift guard.
  std::vector<Vector> ref(static_cast<std::size_t>(steps) + 1);
  double ref_drift = 0.0;
  {
    Vector x = opt.r0, v = Vector::Zero(d), grad(d), a(d);
    pot.gradient(x, grad);
    a = -grad / mass;
    const double e0 = 0.5 * mass * v.squaredNorm() + pot.value(x);
    double drift = 0.0;
    ref[0] = x;
    for (int s = 1; s <= steps; ++s) {
      x += opt.dt * v + 0.5 * opt.dt * opt.dt * a;
      pot.gradient(x, grad);
      const Vector a_new = -grad / mass;
      v += 0.5 * opt.dt * (a + a_new);
      a = a_new;
      ref[static_cast<std::size_t>(s)] = x;
      const double e = 0.5 * mass * v.squaredNorm() + pot.value(x);
      if (std::abs(e0) > 1e-300)
        drift = std::max(drift, std::abs(e - e0) / std::abs(e0));
    }
    if (drift > opt.max_energy_drift)
      throw StepUnstable("reference energy drift " + std::to_string(drift) +
                         " exceeds " + std::to_string(opt.max_energy_drift) +
                         "; reduce dt");
    ref_drift = drift;
  }

  EhrenfestReport report;
  report.energy_drift = ref_drift;
  report.dt = opt.dt;
  report.steps = steps;
  report.ensemble = ensemble;

  for (int n : opt.n_list) {
    if (n < 1) throw InvalidSpec("N must be >= 1");
    const double jitter_sd = std::sqrt(g->sigma0 / n);

    std::vector<double> chunk_max(static_cast<std::size_t>(std::max(opt.workers, 1)), 0.0);
    // Mean trajectory is accumulated per chunk and reduced in chunk order each
    // step; to keep memory bounded we instead accumulate per-chunk partial sums
    // of the mean position per step.
    const int w = std::max(opt.workers, 1);
    std::vector<Matrix> partial(static_cast<std::size_t>(w));
    for (auto& m : partial) m = Matrix::Zero(steps + 1, d);

    for_each_chunk(pairs, w, [&](int chunk, std::int64_t b, std::int64_t e) {
      Rng rng = Rng::derive(spec.seed ^ static_cast<std::uint64_t>(n), 0x656872ULL,
                            static_cast<std::uint64_t>(chunk));
      Matrix acc = Matrix::Zero(steps + 1, d);
      Vector xp(d), xm(d), vp(d), vm(d), ap(d), am(d), grad(d), xi(d), probe(d);
      for (std::int64_t pair = b; pair < e; ++pair) {
        xp = opt.r0;
        xm = opt.r0;
        vp.setZero();
        vm.setZero();
        for (int k = 0; k < d; ++k) xi[k] = jitter_sd * rng.gaussian();
        probe = xp + xi;
        pot.gradient(probe, grad);
        ap = -grad / mass;
        probe = xm - xi;
        pot.gradient(probe, grad);
        am = -grad / mass;
        acc.row(0) += (xp + xm).transpose();
        for (int s = 1; s <= steps; ++s) {
          xp += opt.dt * vp + 0.5 * opt.dt * opt.dt * ap;
          xm += opt.dt * vm + 0.5 * opt.dt * opt.dt * am;
          for (int k = 0; k < d; ++k) xi[k] = jitter_sd * rng.gaussian();
          probe = xp + xi;
          pot.gradient(probe, grad);
          const Vector ap_new = -grad / mass;
          probe = xm - xi;
          pot.gradient(probe, grad);
          const Vector am_new = -grad / mass;
          vp += 0.5 * opt.dt * (ap + ap_new);
          vm += 0.5 * opt.dt * (am + am_new);
          ap = ap_new;
          am = am_new;
          acc.row(s) += (xp + xm).transpose();
        }
      }
      partial[static_cast<std::size_t>(chunk)] = acc;
    });

    Matrix mean = Matrix::Zero(steps + 1, d);
    for (const auto& m : partial) mean += m;
    mean /= static_cast<double>(ensemble);

    double dev = 0.0;
    for (int s = 0; s <= steps; ++s)
      dev = std::max(dev, (mean.row(s).transpose() - ref[static_cast<std::size_t>(s)]).norm());
    report.deviations.emplace_back(n, dev);
  }

  if (report.deviations.size() >= 2) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [n, dev] : report.deviations)
      if (dev > 0.0) pts.emplace_back(static_cast<double>(n), dev);
    if (pts.size() >= 2) report.fit = fit_power_law(pts);
  }
  return report;
}

}  // namespace isq::classical
