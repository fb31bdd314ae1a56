#pragma once

// Arthurs-Kelly simultaneous position/momentum readout modeled as a Gaussian
// windowed Fourier transform, and its momentum-peak comparison with the
// Roy-Singh map.

#include <string>
#include <vector>

#include "bellforge/waves.hpp"

namespace bellforge::akmeas {

struct AkConfig {
  double b = 1.0;  // apparatus width; the pointer variances added are b^2 and 1/(4 b^2)
};

/// P(x1, x2) = (1/2pi) |int psi(x) g_b(x - x1) exp(-i x2 x) dx|^2 with
/// g_b(x) = (2 pi b^2)^(-1/4) exp(-x^2 / (4 b^2)). Axes: the position axis of
/// psi for x1 and its conjugate for x2. Normalized to unit mass. Throws
/// InputError for b <= 0 and TruncationError when 4 b or 2/b overruns the grid.
waves::Density ak_distribution(const waves::GridWavefunction& psi, const AkConfig& cfg);

struct AkVariances {
  double var_x1 = 0.0;
  double var_x2 = 0.0;
  double var_q = 0.0;  // of |psi|^2
  double var_p = 0.0;  // of |psi~|^2
  /// var_x1 - (var_q + b^2) and var_x2 - (var_p + 1/(4 b^2))
  double residual_x1 = 0.0;
  double residual_x2 = 0.0;
};

AkVariances ak_variances(const waves::GridWavefunction& psi, const AkConfig& cfg);

struct PeakRow {
  double q = 0.0;
  double p_ak = 0.0;
  double p_rs = 0.0;
  bool flagged = false;  // no isolated maximum in the conditional readout
};

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double max_residual = 0.0;
};

struct PeakTable {
  std::vector<PeakRow> rows;  // grid points within 3 standard deviations of the mean of |psi|^2
  LineFit ak_fit;
  LineFit rs_fit;
  std::vector<std::string> warnings;  // regime conditions that do not hold
};

/// For each readout x1 = q, the x2 maximizing P(q, x2) (parabola through the
/// logarithms of the three samples around the grid maximum), next to the
/// Roy-Singh image p^(q) for the given epsilon.
PeakTable momentum_peaks(const waves::GridWavefunction& psi_t, const AkConfig& cfg, int epsilon);

/// Checks dq dp >> 1 and 1/dp << b << dq, each read as a factor of 10.
std::vector<std::string> regime_warnings(double dq, double dp, double b);

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace bellforge::akmeas
