#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "isq/common.hpp"
#include "isq/parallel.hpp"
#include "isq/rng.hpp"

namespace isq::classical {

// Per-particle position distributions. Gaussian: each axis independent with
// variance sigma0. RadialGaussOverR: radial density proportional to
// r * exp(-a r^2) (the normalizable reading of exp(-a r^2)/r over volume
// measure), direction uniform; a scales with particle number as a0 * N^m.
struct Gaussian {
  double sigma0 = 1.0;  // per-axis variance
};
struct RadialGaussOverR {
  double a0 = 1.0;
  double c = 1.0;  // normalization constant carried through moment formulas
};
using Distribution = std::variant<Gaussian, RadialGaussOverR>;

struct EnsembleSpec {
  int n_particles = 1;
  int dimension = 1;  // 1..3
  Distribution dist = Gaussian{1.0};
  double interaction_exponent = 0.0;  // a(N) = a0 * N^exponent for the radial case
  std::uint64_t seed = 0;
  // Support truncation for higher-moment runs, in units of the per-axis
  // standard deviation. Moment-decay estimation requires it to be set.
  std::optional<double> truncation_sigmas;

  void validate() const {
    if (n_particles < 1) throw InvalidSpec("n_particles must be >= 1");
    if (dimension < 1 || dimension > 3) throw InvalidSpec("dimension must be 1..3");
    if (interaction_exponent < 0.0) throw InvalidSpec("interaction_exponent must be >= 0");
    if (const auto* g = std::get_if<Gaussian>(&dist)) {
      if (!(g->sigma0 >= 0.0)) throw InvalidSpec("sigma0 must be >= 0");
    } else {
      const auto& r = std::get<RadialGaussOverR>(dist);
      if (!(r.a0 > 0.0) || !(r.c > 0.0)) throw InvalidSpec("radial parameters must be > 0");
    }
    if (truncation_sigmas && !(*truncation_sigmas > 0.0))
      throw InvalidSpec("truncation_sigmas must be > 0 when set");
  }
};

namespace detail {

// Per-axis variance of one particle's position for the given ensemble, at
// size N (the radial width narrows as a = a0 N^m).
inline double per_axis_variance(const EnsembleSpec& spec, int n) {
  if (const auto* g = std::get_if<Gaussian>(&spec.dist)) return g->sigma0;
  const auto& r = std::get<RadialGaussOverR>(spec.dist);
  const double a = r.a0 * std::pow(static_cast<double>(n), spec.interaction_exponent);
  // <r^2> = 1/a under the normalized radial density, split evenly over axes.
  return 1.0 / (a * spec.dimension);
}

// Draws one particle position into pos[0..dim). Truncation (when requested)
// rejects draws outside the cutoff radius; the cutoff is wide enough that the
// rejection rate is negligible.
inline void draw_particle(const EnsembleSpec& spec, int n, Rng& rng, double* pos) {
  const int d = spec.dimension;
  const double axis_var = per_axis_variance(spec, n);
  const double cutoff =
      spec.truncation_sigmas ? *spec.truncation_sigmas * std::sqrt(axis_var) : 0.0;
  for (;;) {
    if (std::holds_alternative<Gaussian>(spec.dist)) {
      const double sd = std::sqrt(std::get<Gaussian>(spec.dist).sigma0);
      for (int k = 0; k < d; ++k) pos[k] = sd * rng.gaussian();
    } else {
      const auto& rg = std::get<RadialGaussOverR>(spec.dist);
      const double a = rg.a0 * std::pow(static_cast<double>(n), spec.interaction_exponent);
      // Inverse CDF through u = r^2: the radial density r e^{-a r^2} becomes
      // exponential in u, so the draw is exact.
      const double r = std::sqrt(rng.exponential(a));
      if (d == 1) {
        pos[0] = (rng.uniform() < 0.5 ? -r : r);
      } else if (d == 2) {
        const double phi = 2.0 * M_PI * rng.uniform();
        pos[0] = r * std::cos(phi);
        pos[1] = r * std::sin(phi);
      } else {
        const double z = 2.0 * rng.uniform() - 1.0;
        const double phi = 2.0 * M_PI * rng.uniform();
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        pos[0] = r * rho * std::cos(phi);
        pos[1] = r * rho * std::sin(phi);
        pos[2] = r * z;
      }
    }
    if (!spec.truncation_sigmas) return;
    bool ok = true;
    for (int k = 0; k < d; ++k)
      if (std::abs(pos[k]) > cutoff) ok = false;
    if (ok) return;
  }
}

}  // namespace detail

struct CmStatistics {
  Vector mean;          // per-axis centre-of-mass mean
  double variance = 0;  // summed over axes, Bessel-corrected
  std::int64_t samples = 0;
  double stderr_variance = 0;  // moment-based standard error of the variance estimate
};

// Monte Carlo centre-of-mass statistics: each sample averages n_particles
// i.i.d. positions; the CM variance contracts as (per-particle variance)/N.
inline CmStatistics cm_statistics(const EnsembleSpec& spec, std::int64_t samples,
                                  int workers = 1) {
  spec.validate();
  if (samples < 100) throw InvalidSpec("need at least 100 samples");
  const int d = spec.dimension;
  const int n = spec.n_particles;

  struct Acc {
    Vector sum;
    double q = 0, q2 = 0;
  };
  std::vector<Acc> acc(static_cast<std::size_t>(std::max(workers, 1)));
  for (auto& a : acc) a.sum = Vector::Zero(d);

  for_each_chunk(samples, workers, [&](int chunk, std::int64_t b, std::int64_t e) {
    Rng rng = Rng::derive(spec.seed, 0x636d5f6d63ULL, static_cast<std::uint64_t>(chunk));
    double pos[3];
    Vector cm(d);
    Acc local;
    local.sum = Vector::Zero(d);
    for (std::int64_t s = b; s < e; ++s) {
      cm.setZero();
      for (int p = 0; p < n; ++p) {
        detail::draw_particle(spec, n, rng, pos);
        for (int k = 0; k < d; ++k) cm[k] += pos[k];
      }
      cm /= static_cast<double>(n);
      local.sum += cm;
      const double q = cm.squaredNorm();
      local.q += q;
      local.q2 += q * q;
    }
    acc[static_cast<std::size_t>(chunk)] = local;
  });

  Vector sum = Vector::Zero(d);
  double q = 0, q2 = 0;
  for (const auto& a : acc) {
    sum += a.sum;
    q += a.q;
    q2 += a.q2;
  }
  const double s = static_cast<double>(samples);
  CmStatistics out;
  out.mean = sum / s;
  const double eq = q / s;
  out.variance = (eq - out.mean.squaredNorm()) * s / (s - 1.0);
  // Standard error of the variance from the spread of ||cm||^2.
  const double var_q = std::max(0.0, q2 / s - eq * eq);
  out.stderr_variance = std::sqrt(var_q / s);
  out.samples = samples;
  return out;
}

// Formula-level second moment of the radial density in the carried
// convention: C * integral r^2 (e^{-a r^2}/r) dr = C/(2a). Cross-checked by
// adaptive quadrature of the integrand as written.
inline double radial_moment_quadrature(double a, double c, double rel_tol = 1e-10);

inline double radial_moment(double a, double c) {
  if (!(a > 0.0) || !(c > 0.0)) throw InvalidArgs("radial moment needs a > 0, C > 0");
  const double analytic = c / (2.0 * a);
  const double quad = radial_moment_quadrature(a, c);
  if (std::abs(quad - analytic) > 1e-8 * std::abs(analytic))
    throw EvaluationFailure("radial moment quadrature disagrees with C/(2a): " +
                            std::to_string(quad) + " vs " + std::to_string(analytic));
  return analytic;
}

// Second moment of the normalized radial density 2 a r e^{-a r^2}: exactly 1/a.
inline double radial_moment_normalized(double a) {
  if (!(a > 0.0)) throw InvalidArgs("radial moment needs a > 0");
  return 1.0 / a;
}

namespace detail {

template <typename F>
double adaptive_simpson(const F& f, double lo, double hi, double flo, double fmid, double fhi,
                        double whole, double tol, int depth) {
  const double mid = 0.5 * (lo + hi);
  const double lmid = 0.5 * (lo + mid), rmid = 0.5 * (mid + hi);
  const double flm = f(lmid), frm = f(rmid);
  const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
  const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, lo, mid, flo, flm, fmid, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(const F& f, double lo, double hi, double tol) {
  const double mid = 0.5 * (lo + hi);
  const double flo = f(lo), fmid = f(mid), fhi = f(hi);
  const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
  return adaptive_simpson(f, lo, hi, flo, fmid, fhi, whole, tol, 48);
}

}  // namespace detail

inline double radial_moment_quadrature(double a, double c, double rel_tol) {
  // Integrand r^2 * e^{-a r^2} / r = r e^{-a r^2}; the tail beyond
  // sqrt(50/a) is below 2e-22 of the total.
  const double rmax = std::sqrt(50.0 / a);
  const double val = detail::integrate(
      [a](double r) { return r * std::exp(-a * r * r); }, 0.0, rmax,
      rel_tol / (2.0 * a));
  return c * val;
}

// Scaled variance of the collective coordinate when the width parameter
// contracts as a = a0 N^m: N * <r^2>/2-form gives C/(2 a0) * N^{1-m}.
inline double scaled_variance(double a0, double c, double m_exp, std::int64_t n) {
  if (!(a0 > 0.0) || !(c > 0.0)) throw InvalidArgs("scaled variance needs a0 > 0, C > 0");
  if (n < 1) throw InvalidArgs("N must be >= 1");
  return c / (2.0 * a0) * std::pow(static_cast<double>(n), 1.0 - m_exp);
}

struct MomentRow {
  int n = 0;
  int order = 0;
  double estimate = 0.0;
  double stderr_estimate = 0.0;
};

struct MomentDecayOptions {
  std::int64_t samples = 20000;
  int tuples = 32;  // random distinct index tuples averaged per order
  int workers = 1;
};

// Central moments of relative coordinates s_i = x_i - x_cm (first axis),
// averaged over random distinct index tuples, for each N in n_list. The
// distribution must carry a truncation cutoff; moments of the raw unbounded
// density are refused.
inline std::vector<MomentRow> central_moment_decay(const EnsembleSpec& spec,
                                                   const std::vector<int>& orders,
                                                   const std::vector<int>& n_list,
                                                   const MomentDecayOptions& opt = {}) {
  spec.validate();
  if (!spec.truncation_sigmas)
    throw UnboundedDistribution("moment decay requires truncation_sigmas to be set");
  for (int m : orders)
    if (m < 1 || m > 8) throw InvalidSpec("moment order must be 1..8");
  if (opt.samples < 100) throw InvalidSpec("need at least 100 samples");

  std::vector<MomentRow> rows;
  for (int n : n_list) {
    if (n < 2) throw InvalidSpec("moment decay needs N >= 2");
    EnsembleSpec spec_n = spec;
    spec_n.n_particles = n;

    // Fixed tuple sets per (N, order), drawn up front from a dedicated stream.
    Rng trng = Rng::derive(spec.seed, 0x7475706cULL, static_cast<std::uint64_t>(n));
    std::vector<std::vector<std::vector<int>>> tuples(orders.size());
    for (std::size_t oi = 0; oi < orders.size(); ++oi) {
      tuples[oi].resize(static_cast<std::size_t>(opt.tuples));
      for (auto& tup : tuples[oi]) {
        // Distinct indices via partial Fisher-Yates over [0, n).
        std::vector<int> pool(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
        const int m = orders[oi];
        if (m > n) throw InvalidSpec("moment order exceeds particle count");
        tup.resize(static_cast<std::size_t>(m));
        for (int k = 0; k < m; ++k) {
          const int pick = k + trng.uniform_int(n - k);
          std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(pick)]);
          tup[static_cast<std::size_t>(k)] = pool[static_cast<std::size_t>(k)];
        }
      }
    }

    struct Acc {
      std::vector<double> y, y2;
    };
    std::vector<Acc> acc(static_cast<std::size_t>(std::max(opt.workers, 1)));
    for (auto& a : acc) {
      a.y.assign(orders.size(), 0.0);
      a.y2.assign(orders.size(), 0.0);
    }

    for_each_chunk(opt.samples, opt.workers, [&](int chunk, std::int64_t b, std::int64_t e) {
      Rng rng = Rng::derive(spec.seed, 0x6d6f6dULL ^ static_cast<std::uint64_t>(n),
                            static_cast<std::uint64_t>(chunk));
      std::vector<double> x(static_cast<std::size_t>(n));
      double pos[3];
      Acc local;
      local.y.assign(orders.size(), 0.0);
      local.y2.assign(orders.size(), 0.0);
      for (std::int64_t s = b; s < e; ++s) {
        double cm = 0.0;
        for (int p = 0; p < n; ++p) {
          detail::draw_particle(spec_n, n, rng, pos);
          x[static_cast<std::size_t>(p)] = pos[0];
          cm += pos[0];
        }
        cm /= static_cast<double>(n);
        for (std::size_t oi = 0; oi < orders.size(); ++oi) {
          double mean_over_tuples = 0.0;
          for (const auto& tup : tuples[oi]) {
            double prod = 1.0;
            for (int idx : tup) prod *= x[static_cast<std::size_t>(idx)] - cm;
            mean_over_tuples += prod;
          }
          mean_over_tuples /= static_cast<double>(tuples[oi].size());
          local.y[oi] += mean_over_tuples;
          local.y2[oi] += mean_over_tuples * mean_over_tuples;
        }
      }
      acc[static_cast<std::size_t>(chunk)] = local;
    });

    for (std::size_t oi = 0; oi < orders.size(); ++oi) {
      double y = 0, y2 = 0;
      for (const auto& a : acc) {
        y += a.y[oi];
        y2 += a.y2[oi];
      }
      const double s = static_cast<double>(opt.samples);
      MomentRow row;
      row.n = n;
      row.order = orders[oi];
      row.estimate = y / s;
      row.stderr_estimate = std::sqrt(std::max(0.0, y2 / s - row.estimate * row.estimate) / s);
      rows.push_back(row);
    }
  }
  return rows;
}

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

// Ordinary least squares of log|value| against log N.
inline PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw InvalidArgs("power-law fit needs >= 2 points");
  const double n = static_cast<double>(points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(std::abs(y) > 0.0)) throw InvalidArgs("power-law fit needs positive data");
    const double lx = std::log(x), ly = std::log(std::abs(y));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  PowerLawFit fit;
  const double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0;
  for (const auto& [x, y] : points) {
    const double r = std::log(std::abs(y)) - (fit.intercept + fit.slope * std::log(x));
    ss += r * r;
  }
  if (points.size() > 2)
    fit.slope_stderr = std::sqrt(ss / (n - 2.0) * n / denom);
  return fit;
}

}  // namespace isq::classical
