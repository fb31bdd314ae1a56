#include "bellforge/akmeas.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bellforge/causal.hpp"
#include "bellforge/errors.hpp"
#include "bellforge/parallel.hpp"
#include "fft.hpp"

namespace bellforge::akmeas {

using waves::Axis;
using waves::Complex;
using waves::Density;
using waves::GridWavefunction;

Density ak_distribution(const GridWavefunction& psi, const AkConfig& cfg) {
  if (!(cfg.b > 0.0)) throw InputError("ak_distribution: b must be positive");
  if (psi.dim() != 1 || psi.axis(0).rep != waves::Representation::Position)
    throw InputError("ak_distribution: needs a 1-D position wavefunction");
  const Axis& xa = psi.axis(0);
  const Axis pa = xa.conjugate();
  if (4.0 * cfg.b > xa.half_extent() || 2.0 / cfg.b > pa.half_extent()) {
    std::ostringstream os;
    os << "ak_distribution: window b = " << cfg.b << " does not fit the grid (x range +-" << xa.half_extent()
       << ", p range +-" << pa.half_extent() << ")";
    throw TruncationError(os.str());
  }
  const std::size_t n = xa.n;
  const double norm = std::pow(2.0 * std::numbers::pi * cfg.b * cfg.b, -0.25);
  const double scale = xa.spacing / std::sqrt(2.0 * std::numbers::pi);
  Density d{{xa, pa}, std::vector<double>(n * n, 0.0)};
  parallel_for(n, [&](std::size_t i) {
    const double x1 = xa.coordinate(i);
    std::vector<Complex> row(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double u = xa.coordinate(k) - x1;
      row[k] = psi.at(k) * (norm * std::exp(-u * u / (4.0 * cfg.b * cfg.b)));
    }
    const std::array<std::size_t, 1> shape{n};
    detail::centered_dft(row, shape, 0, -1, scale);
    for (std::size_t j = 0; j < n; ++j) d.values[i * n + j] = std::norm(row[j]);
  });
  const double total = d.total();
  if (!(total > 0.0)) throw NumericalError("ak_distribution: zero readout distribution");
  for (auto& v : d.values) v /= total;
  return d;
}

AkVariances ak_variances(const GridWavefunction& psi, const AkConfig& cfg) {
  const Density d = ak_distribution(psi, cfg);
  AkVariances v;
  v.var_x1 = waves::moments(d, 0).variance;
  v.var_x2 = waves::moments(d, 1).variance;
  v.var_q = waves::moments(waves::density(psi)).variance;
  v.var_p = waves::moments(waves::density(waves::fourier(psi, 0))).variance;
  v.residual_x1 = v.var_x1 - (v.var_q + cfg.b * cfg.b);
  v.residual_x2 = v.var_x2 - (v.var_p + 1.0 / (4.0 * cfg.b * cfg.b));
  return v;
}

std::vector<std::string> regime_warnings(double dq, double dp, double b) {
  std::vector<std::string> w;
  std::ostringstream os;
  if (dq * dp < 10.0) {
    os << "dq*dp = " << dq * dp << " is not >> 1";
    w.push_back(os.str());
    os.str("");
  }
  if (b * dp < 10.0) {
    os << "b = " << b << " is not >> 1/dp = " << 1.0 / dp;
    w.push_back(os.str());
    os.str("");
  }
  if (dq < 10.0 * b) {
    os << "b = " << b << " is not << dq = " << dq;
    w.push_back(os.str());
  }
  return w;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("fit_line: need at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i)
    f.max_residual = std::max(f.max_residual, std::abs(y[i] - (f.intercept + f.slope * x[i])));
  return f;
}

PeakTable momentum_peaks(const GridWavefunction& psi_t, const AkConfig& cfg, int epsilon) {
  const Density d = ak_distribution(psi_t, cfg);
  const auto rs = causal::rs_map_1d(psi_t, epsilon);
  const Axis& xa = d.axes[0];
  const Axis& pa = d.axes[1];
  const auto mq = waves::moments(waves::density(psi_t));
  const double sq = std::sqrt(mq.variance);
  const double sp = std::sqrt(waves::moments(waves::density(waves::fourier(psi_t, 0))).variance);

  PeakTable table;
  table.warnings = regime_warnings(sq, sp, cfg.b);
  std::vector<double> qs, ak, rsv;
  for (std::size_t i = 0; i < xa.n; ++i) {
    const double q = xa.coordinate(i);
    if (std::abs(q - mq.mean) > 3.0 * sq) continue;
    const double* row = d.values.data() + i * pa.n;
    std::size_t best = 0;
    for (std::size_t j = 1; j < pa.n; ++j)
      if (row[j] > row[best]) best = j;
    PeakRow r{q, pa.coordinate(best), rs(q), false};
    if (best == 0 || best + 1 == pa.n || !(row[best - 1] > 0.0) || !(row[best + 1] > 0.0)) {
      r.flagged = true;
    } else {
      const double a = std::log(row[best - 1]), b = std::log(row[best]), c = std::log(row[best + 1]);
      const double curv = a - 2.0 * b + c;
      if (!(curv < 0.0)) {
        r.flagged = true;
      } else {
        r.p_ak += 0.5 * (a - c) / curv * pa.spacing;
      }
    }
    table.rows.push_back(r);
    if (!r.flagged) {
      qs.push_back(q);
      ak.push_back(r.p_ak);
    }
    rsv.push_back(r.p_rs);
  }
  if (qs.size() >= 2) table.ak_fit = fit_line(qs, ak);
  std::vector<double> all_q;
  for (const auto& r : table.rows) all_q.push_back(r.q);
  if (all_q.size() >= 2) table.rs_fit = fit_line(all_q, rsv);
  return table;
}

}  // namespace bellforge::akmeas
