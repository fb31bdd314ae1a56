#include "bellforge/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bellforge::optimize {

double golden_section_maximize(const std::function<double(double)>& f, double lo,
                               double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

Maximum coordinate_ascent(const Objective& f, std::vector<double> x0, double initial_step,
                          double tol) {
  Maximum best{std::move(x0), 0.0};
  best.value = f(best.x);
  double step = initial_step;
  while (step >= tol) {
    double largest_move = 0.0;
    for (std::size_t k = 0; k < best.x.size(); ++k) {
      std::vector<double> trial = best.x;
      const double center = best.x[k];
      auto line = [&](double t) {
        trial[k] = t;
        return f(trial);
      };
      const double t = golden_section_maximize(line, center - step, center + step, tol * 0.1);
      trial[k] = t;
      const double v = f(trial);
      if (v > best.value) {
        largest_move = std::max(largest_move, std::abs(t - center));
        best.x = trial;
        best.value = v;
      }
    }
    if (largest_move <= step / 4.0) step /= 2.0;
  }
  return best;
}

Maximum nelder_mead_maximize(const Objective& f, std::vector<double> x0, double step,
                             double xtol, double ftol, int max_iter) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t k = 0; k < n; ++k) simplex[k + 1][k] += step;
  // Work with the negated objective so the textbook minimization steps apply.
  std::vector<double> cost(n + 1);
  for (std::size_t k = 0; k <= n; ++k) cost[k] = -f(simplex[k]);

  std::vector<std::size_t> order(n + 1);
  for (int iter = 0; iter < max_iter; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cost[a] < cost[b]; });
    const std::size_t lo = order.front();
    const std::size_t hi = order.back();
    const std::size_t second = order[n - 1];

    double diameter = 0.0;
    for (std::size_t k = 0; k <= n; ++k)
      for (std::size_t j = 0; j < n; ++j)
        diameter = std::max(diameter, std::abs(simplex[k][j] - simplex[lo][j]));
    if (diameter < xtol && cost[hi] - cost[lo] < ftol) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == hi) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[k][j] / static_cast<double>(n);
    }
    auto along = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (simplex[hi][j] - centroid[j]);
      return p;
    };

    auto reflected = along(-1.0);
    const double fr = -f(reflected);
    if (fr < cost[lo]) {
      auto expanded = along(-2.0);
      const double fe = -f(expanded);
      if (fe < fr) {
        simplex[hi] = std::move(expanded);
        cost[hi] = fe;
      } else {
        simplex[hi] = std::move(reflected);
        cost[hi] = fr;
      }
      continue;
    }
    if (fr < cost[second]) {
      simplex[hi] = std::move(reflected);
      cost[hi] = fr;
      continue;
    }
    const bool outside = fr < cost[hi];
    auto contracted = along(outside ? -0.5 : 0.5);
    const double fc = -f(contracted);
    if (fc < (outside ? fr : cost[hi])) {
      simplex[hi] = std::move(contracted);
      cost[hi] = fc;
      continue;
    }
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == lo) continue;
      for (std::size_t j = 0; j < n; ++j)
        simplex[k][j] = simplex[lo][j] + 0.5 * (simplex[k][j] - simplex[lo][j]);
      cost[k] = -f(simplex[k]);
    }
  }
  const auto best = static_cast<std::size_t>(
      std::min_element(cost.begin(), cost.end()) - cost.begin());
  return {simplex[best], -cost[best]};
}

}  // namespace bellforge::optimize
