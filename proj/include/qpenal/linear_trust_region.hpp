#pragma once

// Derivative-free minimizer in the COBYLA family: a linear model is fitted on
// an n+1 point simplex, the model is minimized over a ball of radius rho, and
// rho only shrinks when a trial step fails to improve the best point.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qpenal/errors.hpp"

namespace qpenal {

struct TrustRegionOptions {
  double rho_begin = 0.5;
  double rho_end = 1e-4;
  int max_evals = 200;
};

struct Evaluation {
  std::vector<double> x;
  double value = 0.0;
};

struct TrustRegionResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  std::vector<Evaluation> trace;  // every objective evaluation, in order
  bool converged = false;         // false when max_evals stopped the search
};

namespace detail {

// Solves a x = b by Gaussian elimination with partial pivoting; nullopt if singular.
inline std::optional<std::vector<double>> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-14) return std::nullopt;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace detail

inline TrustRegionResult minimize_linear_trust_region(const std::function<double(std::span<const double>)>& f,
                                                      std::vector<double> x0, const TrustRegionOptions& opt = {}) {
  if (x0.empty()) throw ParameterError("need at least one parameter");
  if (!(opt.rho_begin > 0.0) || !(opt.rho_end > 0.0) || opt.rho_end > opt.rho_begin)
    throw ParameterError("need 0 < rho_end <= rho_begin");
  if (opt.max_evals < 1) throw ParameterError("max_evals must be >= 1");

  const std::size_t n = x0.size();
  TrustRegionResult res;
  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    res.trace.push_back({x, v});
    if (v < res.value) {
      res.value = v;
      res.x = x;
    }
    return v;
  };
  auto budget_left = [&] { return static_cast<int>(res.trace.size()) < opt.max_evals; };

  std::vector<std::vector<double>> pts;
  std::vector<double> vals;
  double rho = opt.rho_begin;

  auto rebuild = [&](const std::vector<double>& center, double center_value) {
    pts.assign(1, center);
    vals.assign(1, center_value);
    for (std::size_t i = 0; i < n && budget_left(); ++i) {
      auto p = center;
      p[i] += rho;
      vals.push_back(eval(p));
      pts.push_back(std::move(p));
    }
    return pts.size() == n + 1;
  };

  if (!rebuild(x0, eval(x0))) return res;

  while (budget_left()) {
    const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    std::swap(pts[0], pts[best]);
    std::swap(vals[0], vals[best]);

    std::vector<std::vector<double>> dirs(n, std::vector<double>(n));
    std::vector<double> diffs(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) dirs[i][k] = pts[i + 1][k] - pts[0][k];
      diffs[i] = vals[i + 1] - vals[0];
    }
    const auto grad = detail::solve_dense(dirs, diffs);
    double gnorm = 0.0;
    if (grad)
      for (double g : *grad) gnorm += g * g;
    gnorm = std::sqrt(gnorm);

    bool improved = false;
    if (grad && gnorm > 0.0 && std::isfinite(gnorm)) {
      std::vector<double> trial = pts[0];
      for (std::size_t k = 0; k < n; ++k) trial[k] -= rho * (*grad)[k] / gnorm;
      const double v = eval(trial);
      if (v < vals[0]) {
        improved = true;
        // drop the vertex farthest from the new point; the old best stays
        std::size_t drop = 1;
        for (std::size_t i = 2; i <= n; ++i)
          if (detail::distance(pts[i], trial) > detail::distance(pts[drop], trial)) drop = i;
        pts[drop] = std::move(trial);
        vals[drop] = v;
      }
    }
    if (improved) continue;

    if (rho <= opt.rho_end) {
      res.converged = true;
      break;
    }
    rho = std::max(0.5 * rho, opt.rho_end);
    if (!rebuild(pts[0], vals[0])) break;
  }
  return res;
}

}  // namespace qpenal
