#include "bellforge/causal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "bellforge/errors.hpp"
#include "bellforge/parallel.hpp"

namespace bellforge::causal {

using waves::Axis;
using waves::Complex;
using waves::GridWavefunction;

namespace {

constexpr int kSubcells = 4;
constexpr int kCoarsen = 4;

void require_epsilon(int e) {
  if (e != 1 && e != -1) throw InputError("epsilon must be +1 or -1");
}

std::vector<double> abs2(const GridWavefunction& psi) {
  std::vector<double> d(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) d[i] = std::norm(psi.at(i));
  return d;
}

// Cell averages of a smooth density from its point samples, accurate to
// fourth order: rho_k + (rho_{k+1} - 2 rho_k + rho_{k-1}) / 24, floored at 0.
std::vector<double> cell_average(const std::vector<double>& d) {
  std::vector<double> out(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double lo = k > 0 ? d[k - 1] : 0.0;
    const double hi = k + 1 < d.size() ? d[k + 1] : 0.0;
    out[k] = std::max(0.0, d[k] + (hi - 2.0 * d[k] + lo) / 24.0);
  }
  return out;
}

std::size_t cell_of(const Axis& a, double x) {
  const double t = std::round((x - a.coordinate(0)) / a.spacing);
  if (!(t > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(t), a.n - 1);
}

// Spreads `mass` uniformly over [lo, hi] and reports each overlapped bin.
template <class F>
void spread(const Axis& a, double lo, double hi, double mass, F&& emit) {
  if (lo > hi) std::swap(lo, hi);
  const double e0 = a.coordinate(0) - 0.5 * a.spacing;
  const double ta = (lo - e0) / a.spacing;
  const double tb = (hi - e0) / a.spacing;
  const long n = static_cast<long>(a.n);
  if (tb - ta < 1e-12) {
    const long k = static_cast<long>(std::floor(ta));
    if (k >= 0 && k < n) emit(static_cast<std::size_t>(k), mass);
    return;
  }
  const long k0 = std::max(0L, static_cast<long>(std::floor(ta)));
  const long k1 = std::min(n - 1, static_cast<long>(std::floor(tb)));
  for (long k = k0; k <= k1; ++k) {
    const double overlap = std::min(tb, k + 1.0) - std::max(ta, static_cast<double>(k));
    if (overlap > 0.0) emit(static_cast<std::size_t>(k), mass * overlap / (tb - ta));
  }
}

double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

std::vector<double> coarsen(const std::vector<double>& v, std::size_t n0, std::size_t n1) {
  // n1 == 1 for 1-D data.
  const std::size_t c0 = (n0 + kCoarsen - 1) / kCoarsen;
  const std::size_t c1 = n1 == 1 ? 1 : (n1 + kCoarsen - 1) / kCoarsen;
  std::vector<double> out(c0 * c1, 0.0);
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j)
      out[(i / kCoarsen) * c1 + (n1 == 1 ? 0 : j / kCoarsen)] += v[i * n1 + j];
  return out;
}

std::size_t coarse_bin(const Axis& a, double x, bool& inside) {
  const double t = std::floor((x - (a.coordinate(0) - 0.5 * a.spacing)) / a.spacing);
  inside = t >= 0.0 && t < static_cast<double>(a.n);
  return inside ? static_cast<std::size_t>(t) / kCoarsen : 0;
}

}  // namespace

MomentumField debb_momentum_field(const GridWavefunction& psi) {
  if (psi.dim() != 1 || psi.axis(0).rep != waves::Representation::Position)
    throw InputError("debb_momentum_field: needs a 1-D position wavefunction");
  auto k = waves::fourier(psi, 0);
  const Axis& pa = k.axis(0);
  for (std::size_t i = 0; i < k.size(); ++i) k.values()[i] *= Complex(0.0, pa.coordinate(i));
  const auto d = waves::fourier(k, 0);
  MomentumField f{psi.axis(0), std::vector<double>(psi.size()), std::vector<bool>(psi.size())};
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (std::abs(psi.at(i)) < 1e-12) {
      f.values[i] = std::numeric_limits<double>::quiet_NaN();
      f.defined[i] = false;
    } else {
      f.values[i] = (d.at(i) / psi.at(i)).imag();
      f.defined[i] = true;
    }
  }
  return f;
}

TakabayasiReport takabayasi_gap(const GridWavefunction& psi) {
  const auto field = debb_momentum_field(psi);
  const auto mom = waves::fourier(psi, 0);
  const Axis& pa = mom.axis(0);
  const double dx = psi.axis(0).spacing;
  std::vector<double> push(pa.n, 0.0);
  TakabayasiReport rep;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double m = std::norm(psi.at(i)) * dx;
    if (!field.defined[i]) {
      rep.excluded_mass += m;
      continue;
    }
    const double t = (field.values[i] - pa.coordinate(0)) / pa.spacing;
    const double k = std::floor(t);
    const double frac = t - k;
    bool landed = false;
    if (k >= 0.0 && k < static_cast<double>(pa.n)) {
      push[static_cast<std::size_t>(k)] += m * (1.0 - frac);
      landed = true;
    }
    if (k + 1.0 >= 0.0 && k + 1.0 < static_cast<double>(pa.n)) {
      push[static_cast<std::size_t>(k + 1.0)] += m * frac;
      landed = true;
    }
    if (!landed) rep.excluded_mass += m;
  }
  double gap = 0.0;
  for (std::size_t k = 0; k < pa.n; ++k) gap += std::abs(push[k] - std::norm(mom.at(k)) * pa.spacing);
  rep.gap = gap;
  return rep;
}

Cdf::Cdf(const Axis& axis, const std::vector<double>& density) : axis_(axis) {
  if (density.size() != axis.n) throw InputError("Cdf: density size does not match axis");
  const std::size_t n = axis.n;
  values_.assign(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (density[k] < 0.0) throw InputError("Cdf: negative density");
    values_[k + 1] = values_[k] + density[k] * axis.spacing;
  }
  total_ = values_.back();
  slopes_.assign(n + 1, 0.0);
  if (total_ <= 0.0) return;
  for (auto& v : values_) v /= total_;
  values_.back() = 1.0;
  // Edge slopes interpolated from the four nearest cell averages, limited (Fritsch-Carlson) so the
  // cubic in every cell stays monotone.
  auto cell = [&](long i) { return i >= 0 && i < static_cast<long>(n) ? density[i] : 0.0; };
  for (std::size_t k = 0; k <= n; ++k) {
    const long i = static_cast<long>(k);
    const double edge_value = (-cell(i - 2) + 7.0 * cell(i - 1) + 7.0 * cell(i) - cell(i + 1)) / 12.0;
    slopes_[k] = std::max(0.0, edge_value) / total_;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double delta = (values_[k + 1] - values_[k]) / axis.spacing;
    if (delta <= 0.0) {
      slopes_[k] = slopes_[k + 1] = 0.0;
      continue;
    }
    const double a = slopes_[k] / delta, b = slopes_[k + 1] / delta;
    if (a * a + b * b > 9.0) {
      const double tau = 3.0 / std::hypot(a, b);
      slopes_[k] *= tau;
      slopes_[k + 1] *= tau;
    }
  }
}

double Cdf::edge(std::size_t k) const {
  return axis_.coordinate(0) + (static_cast<double>(k) - 0.5) * axis_.spacing;
}

double Cdf::within(std::size_t k, double t) const {
  const double h = axis_.spacing;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * values_[k] + (t3 - 2 * t2 + t) * h * slopes_[k] +
         (-2 * t3 + 3 * t2) * values_[k + 1] + (t3 - t2) * h * slopes_[k + 1];
}

double Cdf::operator()(double x) const {
  if (empty()) return 0.0;
  const double t = (x - edge(0)) / axis_.spacing;
  if (!(t > 0.0)) return 0.0;
  if (t >= static_cast<double>(axis_.n)) return 1.0;
  const auto k = static_cast<std::size_t>(t);
  return within(k, t - static_cast<double>(k));
}

double Cdf::inverse(double u) const {
  if (empty()) return 0.0;
  const auto lo = std::lower_bound(values_.begin(), values_.end(), u);
  if (lo == values_.end()) return edge(axis_.n);
  const auto k = static_cast<std::size_t>(lo - values_.begin());
  if (*lo == u) {
    const auto hi = std::upper_bound(values_.begin(), values_.end(), u);
    const auto last = static_cast<std::size_t>(hi - values_.begin()) - 1;
    return 0.5 * (edge(k) + edge(last));
  }
  if (k == 0) return edge(0);
  // Safeguarded Newton on the monotone cubic of cell k - 1.
  const std::size_t c = k - 1;
  const double h = axis_.spacing;
  double a = 0.0, b = 1.0;
  double t = (u - values_[c]) / (values_[k] - values_[c]);
  for (int it = 0; it < 60; ++it) {
    const double f = within(c, t) - u;
    if (f > 0.0) b = t; else a = t;
    const double t2 = t * t;
    const double df = (6 * t2 - 6 * t) * values_[c] + (3 * t2 - 4 * t + 1) * h * slopes_[c] +
                      (-6 * t2 + 6 * t) * values_[k] + (3 * t2 - 2 * t) * h * slopes_[k];
    double next = df > 0.0 ? t - f / df : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - t) < 1e-15 || b - a < 1e-15) {
      t = next;
      break;
    }
    t = next;
  }
  return edge(c) + t * h;
}

MonotoneMap::MonotoneMap(Cdf source, Cdf target, int epsilon)
    : source_(std::move(source)), target_(std::move(target)), epsilon_(epsilon) {
  require_epsilon(epsilon);
}

double MonotoneMap::operator()(double x) const {
  const double u = source_(x);
  return target_.inverse(epsilon_ > 0 ? u : 1.0 - u);
}

std::vector<double> MonotoneMap::image() const {
  const Axis& a = source_.axis();
  std::vector<double> out(a.n);
  for (std::size_t i = 0; i < a.n; ++i) out[i] = (*this)(a.coordinate(i));
  return out;
}

bool MonotoneMap::is_monotone() const {
  const auto im = image();
  for (std::size_t i = 1; i < im.size(); ++i) {
    const double d = im[i] - im[i - 1];
    if (epsilon_ > 0 ? d < 0.0 : d > 0.0) return false;
  }
  return true;
}

MonotoneMap rs_map_1d(const GridWavefunction& psi, int epsilon) {
  require_epsilon(epsilon);
  if (psi.dim() != 1 || psi.axis(0).rep != waves::Representation::Position)
    throw InputError("rs_map_1d: needs a 1-D position wavefunction");
  const auto mom = waves::fourier(psi, 0);
  return MonotoneMap(Cdf(psi.axis(0), cell_average(abs2(psi))), Cdf(mom.axis(0), cell_average(abs2(mom))),
                     epsilon);
}

MonotoneMap position_flow(const GridWavefunction& psi_t, const GridWavefunction& psi_t2) {
  if (psi_t.dim() != 1 || psi_t2.dim() != 1) throw InputError("position_flow: needs 1-D wavefunctions");
  return MonotoneMap(Cdf(psi_t.axis(0), cell_average(abs2(psi_t))),
                     Cdf(psi_t2.axis(0), cell_average(abs2(psi_t2))), 1);
}

double pushforward_distance(const MonotoneMap& map, const std::vector<double>& source,
                            const std::vector<double>& target) {
  const Axis& sa = map.source().axis();
  const Axis& ta = map.target().axis();
  if (source.size() != sa.n || target.size() != ta.n)
    throw InputError("pushforward_distance: density sizes do not match the map");
  const auto src = cell_average(source);
  const auto dst = cell_average(target);
  // Sub-cell masses follow the interpolated source CDF.
  const Cdf source_cdf(sa, src);
  const double mass = source_cdf.total_mass();
  std::vector<double> pushed(ta.n, 0.0);
  const double h = sa.spacing / kSubcells;
  const double e0 = sa.coordinate(0) - 0.5 * sa.spacing;
  double prev = map(e0);
  double prev_f = 0.0;
  for (std::size_t i = 0; i < sa.n; ++i) {
    for (int s = 1; s <= kSubcells; ++s) {
      const double x = e0 + (static_cast<double>(i * kSubcells) + s) * h;
      const double next = map(x);
      const double next_f = source_cdf(x);
      const double m = (next_f - prev_f) * mass;
      if (m > 0.0) spread(ta, prev, next, m, [&](std::size_t k, double w) { pushed[k] += w; });
      prev = next;
      prev_f = next_f;
    }
  }
  std::vector<double> ref(ta.n);
  for (std::size_t k = 0; k < ta.n; ++k) ref[k] = dst[k] * ta.spacing;
  return l1(pushed, ref);
}

const MarginalEntry* MarginalReport::find(const std::string& ccs) const {
  for (const auto& e : entries)
    if (e.ccs == ccs) return &e;
  return nullptr;
}

namespace {

void finish(MarginalReport& rep, bool mc) {
  rep.tolerance = mc ? 5e-2 : 5e-3;
  rep.pass = true;
  for (auto& e : rep.entries) {
    e.pass = e.in_chain && e.l1 < rep.tolerance;
    if (e.in_chain && !e.pass) rep.pass = false;
  }
}

}  // namespace

MarginalReport verify_marginals(const MonotoneMap& map, const GridWavefunction& psi,
                                const VerifyOptions& opts) {
  if (psi.dim() != 1) throw InputError("verify_marginals: map is 1-D but psi is not");
  if (psi.axis(0) != map.source().axis())
    throw InputError("verify_marginals: map was not built on this grid");
  const auto rho_x = abs2(psi);
  const auto mom = waves::fourier(psi, 0);
  const auto rho_p = abs2(mom);
  const Axis& xa = psi.axis(0);
  const Axis& pa = mom.axis(0);
  MarginalReport rep;
  if (!opts.monte_carlo) {
    // The x marginal is |psi|^2 by construction.
    rep.entries.push_back({"x", 0.0});
    rep.entries.push_back({"p", pushforward_distance(map, rho_x, rho_p)});
  } else {
    if (opts.samples == 0) throw InputError("verify_marginals: need at least one sample");
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const Cdf& src = map.source();
    std::vector<double> hx((xa.n + kCoarsen - 1) / kCoarsen, 0.0), hp((pa.n + kCoarsen - 1) / kCoarsen, 0.0);
    const double w = 1.0 / static_cast<double>(opts.samples);
    for (std::uint64_t s = 0; s < opts.samples; ++s) {
      const double x = src.inverse(unif(rng));
      const double p = map(x);
      bool in = false;
      std::size_t b = coarse_bin(xa, x, in);
      if (in) hx[b] += w;
      b = coarse_bin(pa, p, in);
      if (in) hp[b] += w;
    }
    std::vector<double> mx(xa.n), mp(pa.n);
    for (std::size_t i = 0; i < xa.n; ++i) mx[i] = rho_x[i] * xa.spacing;
    for (std::size_t k = 0; k < pa.n; ++k) mp[k] = rho_p[k] * pa.spacing;
    rep.entries.push_back({"x", l1(hx, coarsen(mx, xa.n, 1))});
    rep.entries.push_back({"p", l1(hp, coarsen(mp, pa.n, 1))});
  }
  finish(rep, opts.monte_carlo);
  return rep;
}

namespace {

GridWavefunction transpose(const GridWavefunction& psi) {
  const std::size_t n0 = psi.axis(0).n, n1 = psi.axis(1).n;
  std::vector<Complex> v(n0 * n1);
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j) v[j * n0 + i] = psi.at(i, j);
  return GridWavefunction({psi.axis(1), psi.axis(0)}, std::move(v));
}

// The four densities of a 2-D state in a frame where axis 0 ("u") is
// transformed first and axis 1 ("v") second.
struct Frame {
  Axis u, v, pu, pv;
  std::vector<double> uv, puv, upv, pupv;  // cell-averaged densities, row-major
};

std::vector<double> cell_average_2d(const std::vector<double>& d, std::size_t n0, std::size_t n1) {
  std::vector<double> out(d.size());
  std::vector<double> line(n0);
  for (std::size_t j = 0; j < n1; ++j) {
    for (std::size_t i = 0; i < n0; ++i) line[i] = d[i * n1 + j];
    const auto avg = cell_average(line);
    for (std::size_t i = 0; i < n0; ++i) out[i * n1 + j] = avg[i];
  }
  for (std::size_t i = 0; i < n0; ++i) {
    const auto avg = cell_average(std::vector<double>(out.begin() + i * n1, out.begin() + (i + 1) * n1));
    std::copy(avg.begin(), avg.end(), out.begin() + i * n1);
  }
  return out;
}

Frame make_frame(const GridWavefunction& oriented) {
  const auto puv = waves::fourier(oriented, 0);
  const auto upv = waves::fourier(oriented, 1);
  const auto pupv = waves::fourier(puv, 1);
  const std::size_t n0 = oriented.axis(0).n, n1 = oriented.axis(1).n;
  return {oriented.axis(0), oriented.axis(1), puv.axis(0), upv.axis(1),
          cell_average_2d(abs2(oriented), n0, n1), cell_average_2d(abs2(puv), n0, n1),
          cell_average_2d(abs2(upv), n0, n1), cell_average_2d(abs2(pupv), n0, n1)};
}

GridWavefunction oriented(const GridWavefunction& psi, ChainOrdering o) {
  return o == ChainOrdering::MomentumFirst ? psi : transpose(psi);
}

std::vector<double> column(const std::vector<double>& d, std::size_t n0, std::size_t n1, std::size_t j) {
  std::vector<double> c(n0);
  for (std::size_t i = 0; i < n0; ++i) c[i] = d[i * n1 + j];
  return c;
}

std::vector<double> row(const std::vector<double>& d, std::size_t n1, std::size_t i) {
  return std::vector<double>(d.begin() + i * n1, d.begin() + (i + 1) * n1);
}

}  // namespace

ChainedMap2D rs_map_2d(const GridWavefunction& psi, int epsilon1, int epsilon2, ChainOrdering ordering) {
  require_epsilon(epsilon1);
  require_epsilon(epsilon2);
  if (psi.dim() != 2) throw InputError("rs_map_2d: needs a 2-D wavefunction");
  for (const auto& a : psi.axes())
    if (a.rep != waves::Representation::Position)
      throw InputError("rs_map_2d: needs position representation on both axes");
  const bool mf = ordering == ChainOrdering::MomentumFirst;
  const Frame f = make_frame(oriented(psi, ordering));
  const int eps_u = mf ? epsilon1 : epsilon2;
  const int eps_v = mf ? epsilon2 : epsilon1;
  const std::size_t nu = f.u.n, nv = f.v.n;

  ChainedMap2D map;
  map.ordering = ordering;
  map.epsilon1 = epsilon1;
  map.epsilon2 = epsilon2;
  map.x1 = psi.axis(0);
  map.x2 = psi.axis(1);
  map.p1 = psi.axis(0).conjugate();
  map.p2 = psi.axis(1).conjugate();
  map.first.resize(nv);
  map.second.resize(f.pu.n);

  std::vector<double> mismatch(nv, 0.0);
  parallel_for(nv, [&](std::size_t j) {
    const auto src = column(f.uv, nu, nv, j);
    const auto dst = column(f.puv, f.pu.n, nv, j);
    Cdf a(f.u, src), b(f.pu, dst);
    mismatch[j] = std::abs(a.total_mass() - b.total_mass());
    map.first[j] = MonotoneMap(std::move(a), std::move(b), eps_u);
  });
  for (std::size_t j = 0; j < nv; ++j)
    if (mismatch[j] > 1e-5) {
      std::ostringstream os;
      os << "rs_map_2d: slice " << j << " totals differ by " << mismatch[j] << " between representations";
      throw GridResolutionError(os.str());
    }
  std::vector<double> mismatch2(f.pu.n, 0.0);
  parallel_for(f.pu.n, [&](std::size_t m) {
    Cdf a(f.v, row(f.puv, nv, m)), b(f.pv, row(f.pupv, f.pv.n, m));
    mismatch2[m] = std::abs(a.total_mass() - b.total_mass());
    map.second[m] = MonotoneMap(std::move(a), std::move(b), eps_v);
  });
  for (std::size_t m = 0; m < f.pu.n; ++m)
    if (mismatch2[m] > 1e-5) {
      std::ostringstream os;
      os << "rs_map_2d: slice " << m << " totals differ by " << mismatch2[m] << " between representations";
      throw GridResolutionError(os.str());
    }
  return map;
}

std::pair<double, double> ChainedMap2D::image(double x1v, double x2v) const {
  if (ordering == ChainOrdering::MomentumFirst) {
    const double q = first[cell_of(x2, x2v)](x1v);
    return {q, second[cell_of(p1, q)](x2v)};
  }
  const double q = first[cell_of(x1, x1v)](x2v);
  return {second[cell_of(p2, q)](x1v), q};
}

std::vector<double> ChainedMap2D::image_table() const {
  std::vector<double> t(2 * x1.n * x2.n);
  parallel_for(x1.n, [&](std::size_t i) {
    for (std::size_t j = 0; j < x2.n; ++j) {
      const auto [a, b] = image(x1.coordinate(i), x2.coordinate(j));
      t[2 * (i * x2.n + j)] = a;
      t[2 * (i * x2.n + j) + 1] = b;
    }
  });
  return t;
}

double image_difference(const ChainedMap2D& a, const ChainedMap2D& b, const GridWavefunction& psi,
                        double floor) {
  const auto ta = a.image_table();
  const auto tb = b.image_table();
  const auto rho = abs2(psi);
  const double cut = floor * *std::max_element(rho.begin(), rho.end());
  double m = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i)
    if (rho[i] >= cut)
      m = std::max({m, std::abs(ta[2 * i] - tb[2 * i]), std::abs(ta[2 * i + 1] - tb[2 * i + 1])});
  return m;
}

MarginalReport verify_marginals(const ChainedMap2D& map, const GridWavefunction& psi,
                                const VerifyOptions& opts) {
  if (psi.dim() != 2 || psi.axis(0) != map.x1 || psi.axis(1) != map.x2)
    throw InputError("verify_marginals: map was not built on this grid");
  const bool mf = map.ordering == ChainOrdering::MomentumFirst;
  const Frame f = make_frame(oriented(psi, map.ordering));
  const std::size_t nu = f.u.n, nv = f.v.n, npu = f.pu.n, npv = f.pv.n;
  const double cell = f.u.spacing * f.v.spacing;

  std::vector<double> puv(npu * nv, 0.0), upv(nu * npv, 0.0), pupv(npu * npv, 0.0);
  std::vector<double> huv;  // position histogram, Monte Carlo path only
  if (!opts.monte_carlo) {
    // Images of the sub-cell edges of every slice.
    const std::size_t eu = nu * kSubcells + 1, ev = nv * kSubcells + 1;
    std::vector<double> img1(nv * eu), img2(npu * ev);
    const double u0 = f.u.coordinate(0) - 0.5 * f.u.spacing;
    const double v0 = f.v.coordinate(0) - 0.5 * f.v.spacing;
    parallel_for(nv, [&](std::size_t j) {
      for (std::size_t s = 0; s < eu; ++s)
        img1[j * eu + s] = map.first[j](u0 + static_cast<double>(s) * f.u.spacing / kSubcells);
    });
    parallel_for(npu, [&](std::size_t m) {
      for (std::size_t s = 0; s < ev; ++s)
        img2[m * ev + s] = map.second[m](v0 + static_cast<double>(s) * f.v.spacing / kSubcells);
    });
    // Sub-cell masses follow the interpolated slice CDFs of each stage.
    std::vector<double> frac1(nv * eu), frac2(npu * ev);
    parallel_for(nv, [&](std::size_t j) {
      const Cdf& c = map.first[j].source();
      for (std::size_t s = 0; s < eu; ++s) frac1[j * eu + s] = c(u0 + static_cast<double>(s) * f.u.spacing / kSubcells);
    });
    parallel_for(npu, [&](std::size_t m) {
      const Cdf& c = map.second[m].source();
      for (std::size_t s = 0; s < ev; ++s) frac2[m * ev + s] = c(v0 + static_cast<double>(s) * f.v.spacing / kSubcells);
    });
    for (std::size_t j = 0; j < nv; ++j) {
      const double slice = map.first[j].source().total_mass() * f.v.spacing;
      if (slice <= 0.0) continue;
      for (std::size_t e = 0; e < nu * kSubcells; ++e) {
        const double mass = (frac1[j * eu + e + 1] - frac1[j * eu + e]) * slice;
        if (mass <= 0.0) continue;
        const std::size_t i = e / kSubcells;
        spread(f.pu, img1[j * eu + e], img1[j * eu + e + 1], mass, [&](std::size_t m, double w) {
          puv[m * nv + j] += w;
          const double* fr = &frac2[m * ev + j * kSubcells];
          const double span = fr[kSubcells] - fr[0];
          for (int s2 = 0; s2 < kSubcells; ++s2) {
            const double share = span > 0.0 ? (fr[s2 + 1] - fr[s2]) / span : 1.0 / kSubcells;
            const std::size_t g = j * kSubcells + s2;
            spread(f.pv, img2[m * ev + g], img2[m * ev + g + 1], w * share, [&](std::size_t k, double w3) {
              upv[i * npv + k] += w3;
              pupv[m * npv + k] += w3;
            });
          }
        });
      }
    }
  } else {
    if (opts.samples == 0) throw InputError("verify_marginals: need at least one sample");
    std::vector<double> cum(nu * nv);
    double acc = 0.0;
    for (std::size_t k = 0; k < cum.size(); ++k) cum[k] = (acc += f.uv[k]);
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double w = 1.0 / static_cast<double>(opts.samples);
    huv.assign(nu * nv, 0.0);
    // Histograms at full resolution; coarsened below together with the references.
    for (std::uint64_t s = 0; s < opts.samples; ++s) {
      const double target = unif(rng) * acc;
      std::size_t k = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin());
      k = std::min(k, cum.size() - 1);
      const std::size_t i = k / nv, j = k % nv;
      huv[k] += w;
      const double u = f.u.coordinate(i) + (unif(rng) - 0.5) * f.u.spacing;
      const double v = f.v.coordinate(j) + (unif(rng) - 0.5) * f.v.spacing;
      const double pu = map.first[j](u);
      const std::size_t m = cell_of(f.pu, pu);
      const double pv = map.second[m](v);
      const double tpu = std::floor((pu - (f.pu.coordinate(0) - 0.5 * f.pu.spacing)) / f.pu.spacing);
      const double tpv = std::floor((pv - (f.pv.coordinate(0) - 0.5 * f.pv.spacing)) / f.pv.spacing);
      const bool in_pu = tpu >= 0.0 && tpu < static_cast<double>(npu);
      const bool in_pv = tpv >= 0.0 && tpv < static_cast<double>(npv);
      const auto bpu = static_cast<std::size_t>(in_pu ? tpu : 0.0);
      const auto bpv = static_cast<std::size_t>(in_pv ? tpv : 0.0);
      if (in_pu) puv[bpu * nv + j] += w;
      if (in_pv) upv[i * npv + bpv] += w;
      if (in_pu && in_pv) pupv[bpu * npv + bpv] += w;
    }
  }

  auto masses = [](const std::vector<double>& d, double area) {
    std::vector<double> m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m[i] = d[i] * area;
    return m;
  };
  auto distance = [&](const std::vector<double>& got, const std::vector<double>& density, double area,
                      std::size_t n0, std::size_t n1) {
    const auto ref = masses(density, area);
    if (!opts.monte_carlo) return l1(got, ref);
    return l1(coarsen(got, n0, n1), coarsen(ref, n0, n1));
  };

  // The position marginal is the base density itself on the deterministic path.
  const double d_uv = opts.monte_carlo ? distance(huv, f.uv, cell, nu, nv) : 0.0;
  const double d_puv = distance(puv, f.puv, f.pu.spacing * f.v.spacing, npu, nv);
  const double d_upv = distance(upv, f.upv, f.u.spacing * f.pv.spacing, nu, npv);
  const double d_pupv = distance(pupv, f.pupv, f.pu.spacing * f.pv.spacing, npu, npv);

  // Back to the x1/x2 labels of psi.
  const double d_p1x2 = mf ? d_puv : d_upv;
  const double d_x1p2 = mf ? d_upv : d_puv;
  const std::string chain_mid = mf ? "p1x2" : "x1p2";
  MarginalReport rep;
  rep.entries.push_back({"x1x2", d_uv});
  rep.entries.push_back({chain_mid, mf ? d_p1x2 : d_x1p2});
  rep.entries.push_back({"p1p2", d_pupv});
  for (const auto& c : opts.extra_ccs) {
    if (rep.find(c)) continue;
    if (c == "p1x2")
      rep.entries.push_back({c, d_p1x2, false});
    else if (c == "x1p2")
      rep.entries.push_back({c, d_x1p2, false});
    else
      throw InputError("verify_marginals: unknown CCS '" + c + "'");
  }
  finish(rep, opts.monte_carlo);
  return rep;
}

VariantSurvey survey_variants(const GridWavefunction& psi, double tolerance) {
  VariantSurvey s;
  std::vector<std::vector<double>> tables;
  const auto rho = abs2(psi);
  const double cut = 1e-6 * *std::max_element(rho.begin(), rho.end());
  for (auto o : {ChainOrdering::MomentumFirst, ChainOrdering::PositionFirst})
    for (int e1 : {1, -1})
      for (int e2 : {1, -1}) {
        s.variants.push_back({o, e1, e2});
        tables.push_back(rs_map_2d(psi, e1, e2, o).image_table());
      }
  for (std::size_t a = 0; a < tables.size(); ++a) {
    int g = static_cast<int>(a);
    for (std::size_t b = 0; b < a && g == static_cast<int>(a); ++b) {
      if (s.group[b] != static_cast<int>(b)) continue;
      double m = 0.0;
      for (std::size_t i = 0; i < rho.size(); ++i)
        if (rho[i] >= cut)
          m = std::max({m, std::abs(tables[a][2 * i] - tables[b][2 * i]),
                        std::abs(tables[a][2 * i + 1] - tables[b][2 * i + 1])});
      if (m < tolerance) g = static_cast<int>(b);
    }
    s.group.push_back(g);
  }
  return s;
}

std::string ordering_name(ChainOrdering o) { return o == ChainOrdering::MomentumFirst ? "px" : "xp"; }

}  // namespace bellforge::causal
