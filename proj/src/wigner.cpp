#include "bellforge/wigner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "bellforge/errors.hpp"
#include "bellforge/optimize.hpp"
#include "bellforge/parallel.hpp"
#include "fft.hpp"

namespace bellforge::wigner {

using waves::Axis;
using waves::GridWavefunction;

double WignerGrid::cell_volume() const {
  double v = 1.0;
  for (const auto& a : q_axes) v *= a.spacing;
  for (const auto& a : p_axes) v *= a.spacing;
  return v;
}

double WignerGrid::total() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * cell_volume();
}

double WignerGrid::min() const { return *std::min_element(values.begin(), values.end()); }

double WignerGrid::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

namespace {

Axis half_momentum_axis(const Axis& q) {
  Axis p = q.conjugate();
  p.spacing /= 2.0;
  return p;
}

void require_position(const GridWavefunction& psi) {
  if (psi.dim() < 1 || psi.dim() > 2) throw InputError("wigner: needs a 1-D or 2-D wavefunction");
  for (const auto& a : psi.axes())
    if (a.rep != waves::Representation::Position)
      throw InputError("wigner: needs a position-representation wavefunction");
}

}  // namespace

WignerGrid wigner_transform(const GridWavefunction& psi) {
  require_position(psi);
  WignerGrid w;
  w.q_axes = psi.axes();
  for (const auto& a : psi.axes()) w.p_axes.push_back(half_momentum_axis(a));

  if (psi.dim() == 1) {
    const std::size_t n = psi.size();
    const double dx = psi.axis(0).spacing;
    w.values.assign(n * n, 0.0);
    parallel_for(n, [&](std::size_t j) {
      std::vector<Complex> f(n, Complex(0.0));
      for (std::size_t kk = 0; kk < n; ++kk) {
        const long k = static_cast<long>(kk) - static_cast<long>(n / 2);
        const long lo = static_cast<long>(j) - k;
        const long hi = static_cast<long>(j) + k;
        if (lo < 0 || hi < 0 || lo >= static_cast<long>(n) || hi >= static_cast<long>(n)) continue;
        f[kk] = psi.at(lo) * std::conj(psi.at(hi));
      }
      const std::array<std::size_t, 1> shape{n};
      detail::centered_dft(f, shape, 0, +1, dx / std::numbers::pi);
      for (std::size_t m = 0; m < n; ++m) w.values[j * n + m] = f[m].real();
    });
    return w;
  }

  const std::size_t n0 = psi.axis(0).n, n1 = psi.axis(1).n;
  const double scale = psi.axis(0).spacing * psi.axis(1).spacing / (std::numbers::pi * std::numbers::pi);
  w.values.assign(n0 * n1 * n0 * n1, 0.0);
  parallel_for(n0, [&](std::size_t j0) {
    std::vector<Complex> f(n0 * n1);
    const std::array<std::size_t, 2> shape{n0, n1};
    for (std::size_t j1 = 0; j1 < n1; ++j1) {
      std::fill(f.begin(), f.end(), Complex(0.0));
      for (std::size_t a = 0; a < n0; ++a) {
        const long k0 = static_cast<long>(a) - static_cast<long>(n0 / 2);
        const long lo0 = static_cast<long>(j0) - k0, hi0 = static_cast<long>(j0) + k0;
        if (lo0 < 0 || hi0 < 0 || lo0 >= static_cast<long>(n0) || hi0 >= static_cast<long>(n0)) continue;
        for (std::size_t b = 0; b < n1; ++b) {
          const long k1 = static_cast<long>(b) - static_cast<long>(n1 / 2);
          const long lo1 = static_cast<long>(j1) - k1, hi1 = static_cast<long>(j1) + k1;
          if (lo1 < 0 || hi1 < 0 || lo1 >= static_cast<long>(n1) || hi1 >= static_cast<long>(n1)) continue;
          f[a * n1 + b] = psi.at(lo0, lo1) * std::conj(psi.at(hi0, hi1));
        }
      }
      detail::centered_dft(f, shape, 0, +1, 1.0);
      detail::centered_dft(f, shape, 1, +1, scale);
      double* out = w.values.data() + (j0 * n1 + j1) * n0 * n1;
      for (std::size_t i = 0; i < n0 * n1; ++i) out[i] = f[i].real();
    }
  });
  return w;
}

namespace {

/// |psi|^2 with the listed axes taken to momentum on the half-spacing grid.
std::vector<double> reference_density(const GridWavefunction& psi, const std::vector<bool>& momentum) {
  GridWavefunction g = psi;
  for (std::size_t k = 0; k < psi.dim(); ++k)
    if (momentum[k]) g = waves::fourier(waves::zero_pad(g, k, 2), k);
  std::vector<std::size_t> offset(psi.dim(), 0);
  for (std::size_t k = 0; k < psi.dim(); ++k)
    if (momentum[k]) offset[k] = psi.axis(k).n / 2;
  if (psi.dim() == 1) {
    std::vector<double> out(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) out[i] = std::norm(g.at(i + offset[0]));
    return out;
  }
  const std::size_t n0 = psi.axis(0).n, n1 = psi.axis(1).n;
  std::vector<double> out(n0 * n1);
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j) out[i * n1 + j] = std::norm(g.at(i + offset[0], j + offset[1]));
  return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

std::vector<MarginalError> marginal_errors(const WignerGrid& w, const GridWavefunction& psi) {
  if (w.q_axes != psi.axes()) throw InputError("marginal_errors: Wigner grid does not match psi");
  std::vector<MarginalError> out;
  if (w.dim() == 1) {
    const std::size_t n = w.q_axes[0].n;
    const double dq = w.q_axes[0].spacing, dp = w.p_axes[0].spacing;
    std::vector<double> mq(n, 0.0), mp(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t m = 0; m < n; ++m) {
        mq[j] += w.at(j, m) * dp;
        mp[m] += w.at(j, m) * dq;
      }
    out.push_back({"q", max_abs_diff(mq, reference_density(psi, {false}))});
    out.push_back({"p", max_abs_diff(mp, reference_density(psi, {true}))});
    return out;
  }
  const std::size_t n0 = w.q_axes[0].n, n1 = w.q_axes[1].n;
  const double dq0 = w.q_axes[0].spacing, dq1 = w.q_axes[1].spacing;
  const double dp0 = w.p_axes[0].spacing, dp1 = w.p_axes[1].spacing;
  std::vector<double> qq(n0 * n1, 0.0), qp(n0 * n1, 0.0), pq(n0 * n1, 0.0), pp(n0 * n1, 0.0);
  for (std::size_t j0 = 0; j0 < n0; ++j0)
    for (std::size_t j1 = 0; j1 < n1; ++j1) {
      const double* block = w.values.data() + (j0 * n1 + j1) * n0 * n1;
      for (std::size_t m0 = 0; m0 < n0; ++m0)
        for (std::size_t m1 = 0; m1 < n1; ++m1) {
          const double v = block[m0 * n1 + m1];
          qq[j0 * n1 + j1] += v * dp0 * dp1;
          qp[j0 * n1 + m1] += v * dq1 * dp0;
          pq[m0 * n1 + j1] += v * dq0 * dp1;
          pp[m0 * n1 + m1] += v * dq0 * dq1;
        }
    }
  out.push_back({"qq", max_abs_diff(qq, reference_density(psi, {false, false}))});
  out.push_back({"qp", max_abs_diff(qp, reference_density(psi, {false, true}))});
  out.push_back({"pq", max_abs_diff(pq, reference_density(psi, {true, false}))});
  out.push_back({"pp", max_abs_diff(pp, reference_density(psi, {true, true}))});
  return out;
}

namespace {

double gaussian_fit_residual(const GridWavefunction& psi) {
  double peak = 0.0;
  for (const auto& v : psi.values()) peak = std::max(peak, std::norm(v));
  const double floor = 1e-6 * peak;
  const std::size_t terms = psi.dim() == 1 ? 3 : 6;
  std::vector<std::array<double, 6>> rows;
  std::vector<double> ys, ws;
  auto add = [&](double x1, double x2, const Complex& v) {
    const double d = std::norm(v);
    if (d < floor || d == 0.0) return;
    if (psi.dim() == 1)
      rows.push_back({1.0, x1, x1 * x1, 0.0, 0.0, 0.0});
    else
      rows.push_back({1.0, x1, x2, x1 * x1, x1 * x2, x2 * x2});
    ys.push_back(0.5 * std::log(d));
    ws.push_back(d);
  };
  if (psi.dim() == 1) {
    for (std::size_t i = 0; i < psi.size(); ++i) add(psi.axis(0).coordinate(i), 0.0, psi.at(i));
  } else {
    for (std::size_t i = 0; i < psi.axis(0).n; ++i)
      for (std::size_t j = 0; j < psi.axis(1).n; ++j)
        add(psi.axis(0).coordinate(i), psi.axis(1).coordinate(j), psi.at(i, j));
  }
  if (rows.size() < terms) return INFINITY;
  Eigen::MatrixXd A(rows.size(), terms);
  Eigen::VectorXd b(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double sw = std::sqrt(ws[i]);
    for (std::size_t c = 0; c < terms; ++c) A(i, c) = sw * rows[i][c];
    b(i) = sw * ys[i];
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd r = A * coef - b;
  double wsum = 0.0;
  for (double w : ws) wsum += w;
  return std::sqrt(r.squaredNorm() / wsum);
}

}  // namespace

HudsonReport hudson_check(const GridWavefunction& psi, const WignerGrid& w) {
  HudsonReport h;
  h.min_w = w.min();
  h.gaussian_fit_residual = gaussian_fit_residual(psi);
  h.is_gaussian = h.gaussian_fit_residual < 1e-6;
  return h;
}

HudsonReport hudson_check(const GridWavefunction& psi) {
  return hudson_check(psi, wigner_transform(psi));
}

double tmsv_wigner(const TmsvParams& params, double q1, double p1, double q2, double p2) {
  const double c = std::cosh(2.0 * params.r), s = std::sinh(2.0 * params.r);
  const double e = -c * (q1 * q1 + q2 * q2 + p1 * p1 + p2 * p2) + 2.0 * s * (q1 * q2 - p1 * p2);
  return std::exp(e) / (std::numbers::pi * std::numbers::pi);
}

double parity_correlation(const TmsvParams& params, Complex alpha, Complex beta) {
  const double k = std::numbers::sqrt2;
  const double c = std::cosh(2.0 * params.r), s = std::sinh(2.0 * params.r);
  const double q1 = k * alpha.real(), p1 = k * alpha.imag();
  const double q2 = k * beta.real(), p2 = k * beta.imag();
  return std::exp(-c * (q1 * q1 + q2 * q2 + p1 * p1 + p2 * p2) + 2.0 * s * (q1 * q2 - p1 * p2));
}

double chsh_parity(const TmsvParams& params, const ParitySettings& s) {
  const double ab = parity_correlation(params, s.alpha, s.beta);
  const double abp = parity_correlation(params, s.alpha, s.beta_prime);
  const double apb = parity_correlation(params, s.alpha_prime, s.beta);
  const double apbp = parity_correlation(params, s.alpha_prime, s.beta_prime);
  return std::abs(ab - abp) + std::abs(apb + apbp);
}

namespace {

// Displacements are searched in units of e^-r: the correlation kernel pins
// differences of displacements across the modes to that scale.
struct Family {
  ParityFamily kind;
  int anchored_alpha = 0;  // which of (alpha, alpha') sits at the origin
  int anchored_beta = 0;   // which of (beta, beta') sits at the origin
  double unit = 1.0;

  std::size_t real_dim() const { return kind == ParityFamily::General ? 4 : 2; }

  ParitySettings settings(const std::vector<double>& z, bool complex_parts) const {
    const std::size_t d = real_dim();
    auto at = [&](std::size_t i) {
      return unit * Complex(z[i], complex_parts ? z[d + i] : 0.0);
    };
    ParitySettings s{};
    if (kind == ParityFamily::General) {
      s.alpha = at(0);
      s.alpha_prime = at(1);
      s.beta = at(2);
      s.beta_prime = at(3);
    } else {
      (anchored_alpha == 0 ? s.alpha_prime : s.alpha) = at(0);
      (anchored_beta == 0 ? s.beta_prime : s.beta) = at(1);
    }
    return s;
  }
};

struct Candidate {
  Family family;
  std::vector<double> z;
  double value = -1.0;
};

Candidate polish(const TmsvParams& params, const Family& fam, std::vector<double> z, bool complex_parts) {
  auto f = [&](const std::vector<double>& x) { return chsh_parity(params, fam.settings(x, complex_parts)); };
  auto m = optimize::nelder_mead_maximize(f, std::move(z), 0.1, 1e-10, 1e-14);
  return {fam, m.x, m.value};
}

bool better(const Candidate& a, const Candidate& b) { return a.value > b.value + 1e-12; }

}  // namespace

ParityOptimum maximize_chsh_parity(const TmsvParams& params, std::uint64_t seed, ParityFamily family) {
  if (!(params.r >= 0.0)) throw InputError("maximize_chsh_parity: r must be nonnegative");
  const double unit = std::exp(-params.r);
  std::vector<Family> families;
  if (family == ParityFamily::General) {
    families.push_back({family, 0, 0, unit});
  } else {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) families.push_back({family, a, b, unit});
  }

  std::mt19937_64 rng(seed);
  Candidate best;
  for (const auto& fam : families) {
    const std::size_t d = fam.real_dim();
    const int pts = d == 2 ? 121 : 21;
    const double lo = d == 2 ? -3.0 : -2.5;
    const double step = -2.0 * lo / (pts - 1);
    std::size_t total = 1;
    for (std::size_t k = 0; k < d; ++k) total *= pts;
    // Keep the four best grid points (first occurrence wins ties).
    std::vector<Candidate> top;
    std::vector<double> z(d);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rest = idx;
      for (std::size_t k = d; k-- > 0;) {
        z[k] = lo + step * static_cast<double>(rest % pts);
        rest /= pts;
      }
      const double v = chsh_parity(params, fam.settings(z, false));
      Candidate c{fam, z, v};
      auto pos = std::find_if(top.begin(), top.end(), [&](const Candidate& t) { return better(c, t); });
      if (top.size() < 4 || pos != top.end()) {
        top.insert(pos, c);
        if (top.size() > 4) top.pop_back();
      }
    }
    std::vector<std::vector<double>> starts;
    for (const auto& c : top) starts.push_back(c.z);
    std::uniform_real_distribution<double> u(lo, -lo);
    for (int k = 0; k < 8; ++k) {
      std::vector<double> s(d);
      for (auto& v : s) v = u(rng);
      starts.push_back(s);
    }
    for (const auto& s : starts) {
      Candidate c = polish(params, fam, s, false);
      if (best.value < 0.0 || better(c, best)) best = c;
    }
  }

  ParityOptimum out;
  out.family = family;
  out.real_value = best.value;
  std::vector<double> zc = best.z;
  zc.resize(2 * best.family.real_dim(), 0.0);
  Candidate refined = polish(params, best.family, zc, true);
  if (better(refined, best)) {
    out.settings = refined.family.settings(refined.z, true);
    out.value = refined.value;
  } else {
    out.settings = best.family.settings(best.z, false);
    out.value = best.value;
  }
  return out;
}

}  // namespace bellforge::wigner
