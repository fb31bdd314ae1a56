#pragma once

#include <functional>
#include <vector>

namespace bellforge::optimize {

using Objective = std::function<double(const std::vector<double>&)>;

struct Maximum {
  std::vector<double> x;
  double value = 0.0;
};

/// Golden-section search for a maximum of f on [lo, hi]. Assumes f is
/// unimodal on the bracket; otherwise returns a local maximum.
double golden_section_maximize(const std::function<double(double)>& f, double lo,
                               double hi, double tol);

/// Cyclic coordinate ascent. Each coordinate is line-searched on
/// [x_k - step, x_k + step]; the step halves whenever a sweep moves no
/// coordinate by more than step/4, and the search ends once step < tol.
Maximum coordinate_ascent(const Objective& f, std::vector<double> x0, double initial_step,
                          double tol);

/// Nelder-Mead simplex search for a maximum, with an axis-aligned initial
/// simplex of edge `step`. Stops when the simplex diameter falls below xtol
/// and the value spread below ftol, or after max_iter iterations.
Maximum nelder_mead_maximize(const Objective& f, std::vector<double> x0, double step,
                             double xtol, double ftol, int max_iter = 20000);

}  // namespace bellforge::optimize
