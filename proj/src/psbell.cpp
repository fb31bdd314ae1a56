#include "bellforge/psbell.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "bellforge/errors.hpp"
#include "bellforge/parallel.hpp"

namespace bellforge::psbell {

using waves::Complex;
using waves::Density;
using waves::GridWavefunction;

namespace {

double max_diff(const Density& a, const Density& b) {
  if (a.values.size() != b.values.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace

double QuadDensities::consistency_error() const {
  return std::max({max_diff(waves::marginal(qq, 0), waves::marginal(qp, 0)),
                   max_diff(waves::marginal(qq, 1), waves::marginal(pq, 1)),
                   max_diff(waves::marginal(pq, 0), waves::marginal(pp, 0)),
                   max_diff(waves::marginal(qp, 1), waves::marginal(pp, 1))});
}

QuadDensities quad_densities(const GridWavefunction& psi) {
  if (psi.dim() != 2) throw InputError("quad_densities: needs a 2-D wavefunction");
  for (const auto& a : psi.axes())
    if (a.rep != waves::Representation::Position)
      throw InputError("quad_densities: needs position representation on both axes");
  const auto qp = waves::fourier(psi, 1);
  const auto pq = waves::fourier(psi, 0);
  const auto pp = waves::fourier(qp, 0);
  return {waves::density(psi), waves::density(qp), waves::density(pq), waves::density(pp)};
}

double SignPattern::operator()(double w) const {
  double s = initial;
  for (double c : changes) {
    if (w == c) return 0.0;
    if (w > c) s = -s;
  }
  return s;
}

double quadrant_correlator(const Density& sigma, const SignPattern& s1, const SignPattern& s2) {
  if (sigma.axes.size() != 2) throw InputError("quadrant_correlator: needs a 2-D density");
  const auto& a0 = sigma.axes[0];
  const auto& a1 = sigma.axes[1];
  std::vector<double> w1(a1.n);
  for (std::size_t j = 0; j < a1.n; ++j) w1[j] = s2(a1.coordinate(j));
  double total = 0.0;
  for (std::size_t i = 0; i < a0.n; ++i) {
    const double w0 = s1(a0.coordinate(i));
    if (w0 == 0.0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < a1.n; ++j) row += w1[j] * sigma.values[i * a1.n + j];
    total += w0 * row;
  }
  return total * sigma.cell_volume();
}

Correlators correlators(const QuadDensities& qd) {
  return {quadrant_correlator(qd.qq), quadrant_correlator(qd.qp), quadrant_correlator(qd.pq),
          quadrant_correlator(qd.pp)};
}

double s_functional(const QuadDensities& qd) { return correlators(qd).s(); }

namespace {

/// <a| sgn |b> on a shared 1-D axis.
Complex sign_matrix_element(const GridWavefunction& a, const GridWavefunction& b) {
  const auto& ax = a.axis(0);
  Complex s(0.0);
  for (std::size_t i = 0; i < ax.n; ++i) {
    const double c = ax.coordinate(i);
    if (c > 0.0)
      s += std::conj(a.at(i)) * b.at(i);
    else if (c < 0.0)
      s -= std::conj(a.at(i)) * b.at(i);
  }
  return s * ax.spacing;
}

double separable_correlator(const std::vector<waves::SeparableWavefunction::Term>& t0,
                            const std::vector<waves::SeparableWavefunction::Term>& t1) {
  // t0 supplies the first factors and coefficients, t1 the second factors.
  Complex s(0.0);
  for (std::size_t k = 0; k < t0.size(); ++k)
    for (std::size_t l = 0; l < t0.size(); ++l)
      s += t0[k].coefficient * std::conj(t0[l].coefficient) *
           sign_matrix_element(t0[l].first, t0[k].first) *
           sign_matrix_element(t1[l].second, t1[k].second);
  return s.real();
}

}  // namespace

Correlators correlators(const waves::SeparableWavefunction& psi) {
  for (std::size_t k = 0; k < 2; ++k)
    if (psi.axis(k).rep != waves::Representation::Position)
      throw InputError("correlators: needs position representation on both axes");
  const auto p1 = psi.fourier(0);
  const auto p2 = psi.fourier(1);
  const auto& q = psi.terms();
  return {separable_correlator(q, q), separable_correlator(q, p2.terms()),
          separable_correlator(p1.terms(), q), separable_correlator(p1.terms(), p2.terms())};
}

double s_functional(const waves::SeparableWavefunction& psi) { return correlators(psi).s(); }

std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree) {
  if (x.size() != y.size() || degree < 0 || x.size() < static_cast<std::size_t>(degree) + 1)
    throw InputError("polyfit: not enough points for the requested degree");
  Eigen::MatrixXd A(x.size(), degree + 1);
  Eigen::VectorXd b(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double p = 1.0;
    for (int d = 0; d <= degree; ++d, p *= x[i]) A(i, d) = p;
    b(i) = y[i];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  return std::vector<double>(c.data(), c.data() + c.size());
}

namespace {

struct SweepPoint {
  double s_plus = 0.0;
  double s_minus = 0.0;
  double raw_deficit = 0.0;
};

// psi+- on a cell-centered grid x_j = (j - n/2 + 1/2) dx, so that neither the
// sign change at q = 0 nor the cutoff at |q| = L sits on a sample. The
// momentum factors come from the ordinary centered transform: the half-cell
// shift only multiplies them by a phase exp(-i p dx/2), which cancels in every
// matrix element below.
SweepPoint sweep_point(double L, const SweepOptions& opts) {
  const auto axis = waves::Axis::centered(opts.grid, opts.pad * L);
  const double dx = axis.spacing;
  auto h = GridWavefunction::sample(axis, [&](double q) { return Complex(waves::cutoff_profile(L, q + 0.5 * dx)); });
  auto sh = GridWavefunction::sample(axis, [&](double q) {
    const double x = q + 0.5 * dx;
    return Complex(x > 0.0 ? waves::cutoff_profile(L, x) : -waves::cutoff_profile(L, x));
  });
  const double n2 = h.norm_squared();
  SweepPoint out;
  out.raw_deficit = 1.0 - n2 * n2 / 4.0;
  for (auto& v : h.values()) v *= std::sqrt(2.0 / n2);
  for (auto& v : sh.values()) v *= std::sqrt(2.0 / n2);
  const auto ht = waves::fourier(h, 0);
  const auto sht = waves::fourier(sh, 0);

  const std::array<const GridWavefunction*, 2> fq{&h, &sh};
  const std::array<const GridWavefunction*, 2> fp{&ht, &sht};
  // Sign matrix elements <f_l| sgn |f_k> on each side.
  std::array<std::array<Complex, 2>, 2> mq{}, mp{};
  for (int l = 0; l < 2; ++l)
    for (int k = 0; k < 2; ++k) {
      Complex sq(0.0);
      for (std::size_t j = 0; j < axis.n; ++j) {
        const Complex t = std::conj(fq[l]->at(j)) * fq[k]->at(j);
        sq += axis.coordinate(j) + 0.5 * dx > 0.0 ? t : -t;
      }
      mq[l][k] = sq * dx;
      mp[l][k] = sign_matrix_element(*fp[l], *fp[k]);
    }
  for (auto sign : {waves::MarginalSign::Plus, waves::MarginalSign::Minus}) {
    const Complex e = std::polar(1.0, std::numbers::pi / 4.0) * (sign == waves::MarginalSign::Plus ? 1.0 : -1.0);
    const std::array<Complex, 2> c{Complex(0.5 / std::numbers::sqrt2), 0.5 / std::numbers::sqrt2 * e};
    auto corr = [&](const auto& m1, const auto& m2) {
      Complex acc(0.0);
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) acc += c[k] * std::conj(c[l]) * m1[l][k] * m2[l][k];
      return acc.real();
    };
    const Correlators cr{corr(mq, mq), corr(mq, mp), corr(mp, mq), corr(mp, mp)};
    (sign == waves::MarginalSign::Plus ? out.s_plus : out.s_minus) = cr.s();
  }
  return out;
}

}  // namespace

SweepReport marginal_theorem_demo(std::vector<double> L_list, const SweepOptions& opts) {
  if (L_list.empty()) throw InputError("marginal_theorem_demo: empty L list");
  for (double L : L_list)
    if (!(L > 0.0)) throw DomainError("marginal_theorem_demo: every L must be positive");
  if (!(opts.pad > 1.0)) throw DomainError("marginal_theorem_demo: grid extent must exceed L");
  std::sort(L_list.begin(), L_list.end());
  L_list.erase(std::unique(L_list.begin(), L_list.end()), L_list.end());

  SweepReport rep;
  rep.rows.resize(L_list.size());
  parallel_for(L_list.size(), [&](std::size_t i) {
    const double L = L_list[i];
    const auto pt = sweep_point(L, opts);
    rep.rows[i] = {L, pt.s_plus, pt.s_minus, pt.raw_deficit};
  });
  for (const auto& r : rep.rows)
    if (std::abs(r.s_plus + r.s_minus) > 1e-6) {
      std::ostringstream os;
      os << "marginal_theorem_demo: S(psi+) = " << r.s_plus << " and S(psi-) = " << r.s_minus
         << " are not opposite at L = " << r.L;
      throw NumericalError(os.str());
    }

  rep.monotone = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (!(rep.rows[i].s_plus > rep.rows[i - 1].s_plus)) rep.monotone = false;
  for (const auto& r : rep.rows)
    if (r.s_plus > 2.0) {
      rep.exceeds_2_at = r.L;
      break;
    }
  if (rep.rows.size() >= 2) {
    rep.fit_degree = static_cast<int>(std::min<std::size_t>(2, rep.rows.size() - 1));
    std::vector<double> x, y;
    for (const auto& r : rep.rows) {
      x.push_back(1.0 / std::log(r.L + 1.0));
      y.push_back(r.s_plus);
    }
    rep.extrapolated_limit = polyfit(x, y, rep.fit_degree)[0];
  }
  return rep;
}

}  // namespace bellforge::psbell
