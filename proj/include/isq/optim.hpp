#pragma once

#include <cmath>
#include <deque>
#include <functional>
#include <utility>

#include <Eigen/Dense>

#include "isq/common.hpp"

namespace isq::optim {

struct Options {
  int max_iterations = 800;
  int history = 8;              // L-BFGS memory
  double grad_tol = 1e-11;      // stop when max-abs gradient falls below
  double target_f = -1.0;       // stop early when f <= target_f (if >= 0)
  double c1 = 1e-4;             // Armijo sufficient-decrease constant
  int max_backtracks = 40;
};

struct Result {
  Vector x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;  // gradient-satisfied or target reached
};

// Limited-memory BFGS with Armijo backtracking. `fg` returns f(x) and fills
// the gradient. Suited to the smooth small-dimension objectives in this
// library; no constraints, no scaling heuristics beyond the standard
// gamma * I initial inverse Hessian.
inline Result minimize(const std::function<double(const Vector&, Vector&)>& fg,
                       Vector x0, const Options& opt = {}) {
  const int n = static_cast<int>(x0.size());
  Vector x = std::move(x0);
  Vector g(n), g_new(n);
  double f = fg(x, g);

  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;

  Result res;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (max_abs(g) <= opt.grad_tol || (opt.target_f >= 0.0 && f <= opt.target_f)) {
      res.converged = true;
      break;
    }

    // Two-loop recursion for the search direction.
    Vector q = g;
    const int m = static_cast<int>(s_hist.size());
    Vector alpha(m);
    for (int k = m - 1; k >= 0; --k) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= alpha[k] * y_hist[k];
    }
    if (m > 0) {
      const double gamma = s_hist[m - 1].dot(y_hist[m - 1]) / y_hist[m - 1].squaredNorm();
      q *= gamma;
    }
    for (int k = 0; k < m; ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(q);
      q += (alpha[k] - beta) * s_hist[k];
    }
    Vector d = -q;

    double gd = g.dot(d);
    if (!(gd < 0.0)) {  // fallback to steepest descent on a bad direction
      d = -g;
      gd = g.dot(d);
    }

    double step = 1.0;
    double f_new = f;
    Vector x_new;
    bool accepted = false;
    for (int bt = 0; bt < opt.max_backtracks; ++bt) {
      x_new = x + step * d;
      f_new = fg(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + opt.c1 * step * gd) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // line search exhausted; current x is the answer

    Vector s = x_new - x;
    Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = std::move(x_new);
    f = f_new;
    g = g_new;
  }

  res.x = std::move(x);
  res.f = f;
  res.iterations = it;
  if (!res.converged && max_abs(g) <= opt.grad_tol) res.converged = true;
  return res;
}

}  // namespace isq::optim
