#pragma once

// Phase-space Bell functional over the four mixed position/momentum densities
// of a two-mode state, and the finite-cutoff sweep of the optimal states.

#include <cstddef>
#include <optional>
#include <vector>

#include "bellforge/waves.hpp"

namespace bellforge::psbell {

/// sigma_qq(q1,q2), sigma_qp(q1,p2), sigma_pq(p1,q2), sigma_pp(p1,p2).
struct QuadDensities {
  waves::Density qq, qp, pq, pp;

  /// Largest max-norm mismatch between single-axis marginals that two of the
  /// densities share (q1 of qq and qp, q2 of qq and pq, p1 of pq and pp, p2 of
  /// qp and pp).
  double consistency_error() const;
};

/// Partial Fourier transforms of a normalized 2-D position wavefunction.
QuadDensities quad_densities(const waves::GridWavefunction& psi);

/// Sign of a tabulated function through its sign changes: the value is
/// `initial` below changes[0] and flips at each listed point (0 exactly on one).
/// The default is sgn(w).
struct SignPattern {
  std::vector<double> changes{0.0};
  int initial = -1;

  double operator()(double w) const;
};

/// Integral of s1(w1) s2(w2) sigma(w1, w2).
double quadrant_correlator(const waves::Density& sigma, const SignPattern& s1 = {},
                           const SignPattern& s2 = {});

struct Correlators {
  double qq = 0.0, qp = 0.0, pq = 0.0, pp = 0.0;

  /// E_qq + E_qp + E_pq - E_pp
  double s() const { return qq + qp + pq - pp; }
};

Correlators correlators(const QuadDensities& qd);
double s_functional(const QuadDensities& qd);

/// The same four correlators evaluated term by term on a separable state,
/// without forming any 2-D array.
Correlators correlators(const waves::SeparableWavefunction& psi);
double s_functional(const waves::SeparableWavefunction& psi);

struct SweepOptions {
  std::size_t grid = std::size_t{1} << 22;  // samples per axis
  double pad = 32.0;                         // grid half extent in units of L
};

struct SweepRow {
  double L = 0.0;
  double s_plus = 0.0;
  double s_minus = 0.0;
  double norm_deficit = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;  // ascending L
  bool monotone = false;       // S(psi+) strictly increasing in L
  std::optional<double> exceeds_2_at;
  std::optional<double> extrapolated_limit;
  int fit_degree = 0;
};

/// S(psi+-, L) over a list of cutoffs, each evaluated on a cell-centered 1-D
/// grid (no sample on q = 0 or |q| = L) through the two-term product form of
/// the states. Rows come back sorted by L. Throws DomainError for L <= 0 and
/// NumericalError if S(psi+) + S(psi-) exceeds 1e-6 in magnitude. The limit is
/// a least-squares polynomial fit in 1/ln(L+1) of degree min(2, rows - 1).
SweepReport marginal_theorem_demo(std::vector<double> L_list, const SweepOptions& opts = {});

/// Least-squares polynomial coefficients (constant first).
std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree);

}  // namespace bellforge::psbell
