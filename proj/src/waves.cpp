#include "bellforge/waves.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bellforge/errors.hpp"
#include "fft.hpp"

namespace bellforge::waves {

namespace {

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

std::size_t total_size(const std::vector<Axis>& axes) {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.n;
  return n;
}

double volume(const std::vector<Axis>& axes) {
  double v = 1.0;
  for (const auto& a : axes) v *= a.spacing;
  return v;
}

void require_same_axes(const std::vector<Axis>& a, const std::vector<Axis>& b, const char* what) {
  if (a != b) throw InputError(std::string(what) + ": axes differ");
}

}  // namespace

Axis Axis::centered(std::size_t n, double half_extent, Representation rep) {
  if (!is_power_of_two(n)) throw InputError("grid size must be a power of two >= 2");
  if (!(half_extent > 0.0)) throw InputError("grid half extent must be positive");
  return Axis{rep, n, 2.0 * half_extent / static_cast<double>(n)};
}

Axis Axis::conjugate() const {
  const auto other =
      rep == Representation::Position ? Representation::Momentum : Representation::Position;
  return Axis{other, n, 2.0 * std::numbers::pi / (static_cast<double>(n) * spacing)};
}

double Density::cell_volume() const { return volume(axes); }

double Density::total() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * cell_volume();
}

GridWavefunction::GridWavefunction(std::vector<Axis> axes, std::vector<Complex> values)
    : axes_(std::move(axes)), values_(std::move(values)) {
  if (axes_.empty() || axes_.size() > 2) throw InputError("wavefunction must have 1 or 2 axes");
  if (total_size(axes_) != values_.size()) throw InputError("sample count does not match axes");
}

GridWavefunction GridWavefunction::sample(const Axis& axis,
                                          const std::function<Complex(double)>& f) {
  std::vector<Complex> v(axis.n);
  for (std::size_t i = 0; i < axis.n; ++i) v[i] = f(axis.coordinate(i));
  return GridWavefunction({axis}, std::move(v));
}

GridWavefunction GridWavefunction::sample(const Axis& a0, const Axis& a1,
                                          const std::function<Complex(double, double)>& f) {
  std::vector<Complex> v(a0.n * a1.n);
  for (std::size_t i = 0; i < a0.n; ++i) {
    const double x = a0.coordinate(i);
    for (std::size_t j = 0; j < a1.n; ++j) v[i * a1.n + j] = f(x, a1.coordinate(j));
  }
  return GridWavefunction({a0, a1}, std::move(v));
}

std::vector<std::size_t> GridWavefunction::shape() const {
  std::vector<std::size_t> s;
  for (const auto& a : axes_) s.push_back(a.n);
  return s;
}

double GridWavefunction::norm_squared() const {
  double s = 0.0;
  for (const auto& v : values_) s += std::norm(v);
  return s * volume(axes_);
}

double GridWavefunction::normalize() {
  const double n2 = norm_squared();
  if (!(n2 > 0.0)) throw NormalizationError("cannot normalize a zero wavefunction");
  const double f = 1.0 / std::sqrt(n2);
  for (auto& v : values_) v *= f;
  deficit_ = 1.0 - n2;
  return deficit_;
}

GridWavefunction fourier(const GridWavefunction& psi, std::size_t axis) {
  if (axis >= psi.dim()) throw InputError("fourier: axis out of range");
  const Axis& from = psi.axis(axis);
  const int sign = from.rep == Representation::Position ? -1 : +1;
  auto axes = psi.axes();
  axes[axis] = from.conjugate();
  std::vector<Complex> values = psi.values();
  const auto shape = psi.shape();
  detail::centered_dft(values, shape, axis, sign, from.spacing / std::sqrt(2.0 * std::numbers::pi));
  return GridWavefunction(std::move(axes), std::move(values));
}

Density density(const GridWavefunction& psi) {
  Density d{psi.axes(), std::vector<double>(psi.size())};
  for (std::size_t i = 0; i < psi.size(); ++i) d.values[i] = std::norm(psi.at(i));
  return d;
}

double l1_distance(const Density& a, const Density& b) {
  require_same_axes(a.axes, b.axes, "l1_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += std::abs(a.values[i] - b.values[i]);
  return s * a.cell_volume();
}

Density marginal(const Density& d, std::size_t keep_axis) {
  if (d.axes.size() != 2 || keep_axis > 1) throw InputError("marginal: needs a 2-axis density");
  const std::size_t n0 = d.axes[0].n;
  const std::size_t n1 = d.axes[1].n;
  const double w = d.axes[1 - keep_axis].spacing;
  Density m{{d.axes[keep_axis]}, std::vector<double>(d.axes[keep_axis].n, 0.0)};
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j) m.values[keep_axis == 0 ? i : j] += d.values[i * n1 + j] * w;
  return m;
}

Moments moments(const Density& d, std::size_t axis) {
  const Density m = d.axes.size() == 1 ? d : marginal(d, axis);
  const Axis& a = m.axes[0];
  double w = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < a.n; ++i) {
    const double x = a.coordinate(i);
    w += m.values[i];
    s1 += m.values[i] * x;
    s2 += m.values[i] * x * x;
  }
  if (!(w > 0.0)) throw NumericalError("moments of an empty density");
  const double mean = s1 / w;
  return {mean, s2 / w - mean * mean};
}

double spread_width(const GaussianPacket& g) {
  const double s2 = g.sigma * g.sigma;
  return std::sqrt(s2 + g.t * g.t / (4.0 * s2 * g.mass * g.mass));
}

Complex gaussian_packet_value(const GaussianPacket& g, double x) {
  const double s2 = g.sigma * g.sigma;
  const Complex z(1.0, g.t / (2.0 * g.mass * s2));
  const double xc = x - g.x0 - g.p0 * g.t / g.mass;
  const Complex arg = -xc * xc / (4.0 * s2 * z) +
                     Complex(0.0, g.p0 * (x - g.x0) - g.p0 * g.p0 * g.t / (2.0 * g.mass));
  return std::pow(2.0 * std::numbers::pi * s2, -0.25) / std::sqrt(z) * std::exp(arg);
}

GridWavefunction gaussian_packet(const GaussianPacket& g, const Axis& axis) {
  if (!(g.sigma > 0.0)) throw InputError("gaussian_packet: sigma must be positive");
  if (!(g.mass > 0.0)) throw InputError("gaussian_packet: mass must be positive");
  if (axis.rep != Representation::Position) throw InputError("gaussian_packet: needs a position axis");
  const double center = g.x0 + g.p0 * g.t / g.mass;
  const double width = spread_width(g);
  const double xmax = axis.half_extent();
  const double pmax = axis.conjugate().half_extent();
  const double pwidth = 1.0 / (2.0 * g.sigma);
  if (std::abs(center) + 4.0 * width > xmax || std::abs(g.p0) + 4.0 * pwidth > pmax) {
    std::ostringstream os;
    os << "gaussian_packet: grid [-" << xmax << ", " << xmax << ") with momentum range +-" << pmax
       << " does not hold the packet (center " << center << ", width " << width << ")";
    throw TruncationError(os.str());
  }
  auto psi = GridWavefunction::sample(axis, [&](double x) { return gaussian_packet_value(g, x); });
  const double deficit = psi.normalize();
  if (std::abs(deficit) > 1e-6) throw TruncationError("gaussian_packet: norm deficit exceeds 1e-6");
  return psi;
}

GridWavefunction oscillator_state(unsigned level, const Axis& axis) {
  auto psi = GridWavefunction::sample(axis, [level](double x) {
    double prev = 0.0;
    double cur = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    for (unsigned n = 0; n < level; ++n) {
      const double next = std::sqrt(2.0 / (n + 1.0)) * x * cur - std::sqrt(n / (n + 1.0)) * prev;
      prev = cur;
      cur = next;
    }
    return Complex(cur, 0.0);
  });
  psi.normalize();
  return psi;
}

GridWavefunction superpose(std::span<const Complex> coefficients,
                           std::span<const GridWavefunction> states) {
  if (coefficients.size() != states.size() || states.empty())
    throw InputError("superpose: need one coefficient per state");
  std::vector<Complex> v(states[0].size(), Complex(0.0));
  for (std::size_t k = 0; k < states.size(); ++k) {
    require_same_axes(states[k].axes(), states[0].axes(), "superpose");
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += coefficients[k] * states[k].at(i);
  }
  GridWavefunction out(states[0].axes(), std::move(v));
  out.normalize();
  return out;
}

GridWavefunction two_gaussian(const Axis& axis) {
  const std::vector<GridWavefunction> parts{
      gaussian_packet({-2.0, 0.5, 0.8, 0.0, 1.0}, axis),
      gaussian_packet({1.5, -1.0, 0.6, 0.0, 1.0}, axis)};
  const std::vector<Complex> c{Complex(0.8, 0.0), Complex(0.6, 0.0)};
  return superpose(c, parts);
}

GridWavefunction product(const GridWavefunction& f, const GridWavefunction& g) {
  if (f.dim() != 1 || g.dim() != 1) throw InputError("product: factors must be 1-D");
  std::vector<Complex> v(f.size() * g.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) v[i * g.size() + j] = f.at(i) * g.at(j);
  return GridWavefunction({f.axis(0), g.axis(0)}, std::move(v));
}

GridWavefunction gaussian_2d(const Gaussian2d& g, const Axis& a0, const Axis& a1) {
  const double det = g.a11 * g.a22 - g.a12 * g.a12;
  if (!(g.a11 > 0.0) || !(det > 0.0)) throw InputError("gaussian_2d: A must be positive definite");
  auto psi = GridWavefunction::sample(a0, a1, [&](double x1, double x2) {
    const double u = x1 - g.c1;
    const double v = x2 - g.c2;
    const Complex q11(g.a11, -g.b11), q12(g.a12, -g.b12), q22(g.a22, -g.b22);
    const Complex quad = q11 * u * u + 2.0 * q12 * u * v + q22 * v * v;
    return std::exp(-0.5 * quad + Complex(0.0, g.p1 * x1 + g.p2 * x2));
  });
  psi.normalize();
  return psi;
}

GridWavefunction reflect(const GridWavefunction& psi) {
  if (psi.dim() != 1) throw InputError("reflect: needs a 1-D wavefunction");
  const std::size_t n = psi.size();
  std::vector<Complex> v(n);
  for (std::size_t i = 0; i < n; ++i) v[(n - i) % n] = psi.at(i);
  return GridWavefunction(psi.axes(), std::move(v));
}

GridWavefunction zero_pad(const GridWavefunction& psi, std::size_t axis, std::size_t factor) {
  if (axis >= psi.dim()) throw InputError("zero_pad: axis out of range");
  if (factor == 0 || (factor & (factor - 1)) != 0) throw InputError("zero_pad: factor must be a power of two");
  auto axes = psi.axes();
  const std::size_t n = axes[axis].n;
  axes[axis].n = n * factor;
  const std::size_t offset = (n * factor) / 2 - n / 2;
  std::vector<Complex> v(total_size(axes), Complex(0.0));
  if (psi.dim() == 1) {
    for (std::size_t i = 0; i < n; ++i) v[i + offset] = psi.at(i);
  } else {
    const std::size_t n0 = psi.axis(0).n, n1 = psi.axis(1).n;
    const std::size_t m1 = axes[1].n;
    for (std::size_t i = 0; i < n0; ++i)
      for (std::size_t j = 0; j < n1; ++j) {
        const std::size_t ii = axis == 0 ? i + offset : i;
        const std::size_t jj = axis == 1 ? j + offset : j;
        v[ii * m1 + jj] = psi.at(i, j);
      }
  }
  return GridWavefunction(std::move(axes), std::move(v));
}

double cutoff_profile(double L, double q) {
  const double a = std::abs(q);
  if (a > L) return 0.0;
  const double h = 1.0 / std::sqrt((a + 1.0) * std::log(L + 1.0));
  // On the edge theta(0) = 1/2 for the density, so |h|^2 gets half weight.
  return a == L ? h * std::numbers::sqrt2 / 2.0 : h;
}

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

Complex interference_phase(MarginalSign sign) {
  const Complex e = std::polar(1.0, std::numbers::pi / 4.0);
  return sign == MarginalSign::Plus ? e : -e;
}

void check_marginal_domain(double L, const Axis& a) {
  if (!(L > 0.0)) throw DomainError("marginal-theorem state: L must be positive");
  if (a.rep != Representation::Position) throw DomainError("marginal-theorem state: needs position axes");
  if (!(a.half_extent() > L)) {
    std::ostringstream os;
    os << "marginal-theorem state: grid half extent " << a.half_extent() << " must exceed L = " << L;
    throw DomainError(os.str());
  }
}

}  // namespace

namespace {

// h_L(|q|) and sgn(q) h_L(|q|) on one axis. Each is rescaled to its continuum
// norm 2: the sgn factor drops the sample at q = 0, a first-order loss that
// would otherwise tilt the weights of the two product terms. `raw_deficit`
// receives 1 - (norm of the state built from the unscaled samples).
std::pair<GridWavefunction, GridWavefunction> marginal_profiles(double L, const Axis& axis,
                                                                double& raw_deficit) {
  auto h = GridWavefunction::sample(axis, [L](double q) { return Complex(cutoff_profile(L, q)); });
  auto sh = GridWavefunction::sample(
      axis, [L](double q) { return Complex(sgn(q) * cutoff_profile(L, q)); });
  const double nh = h.norm_squared(), nsh = sh.norm_squared();
  // Cross terms vanish (h even, sgn h odd), so the raw norm is (nh^2 + nsh^2)/8.
  raw_deficit = 1.0 - (nh * nh + nsh * nsh) / 8.0;
  for (auto& v : h.values()) v *= std::sqrt(2.0 / nh);
  for (auto& v : sh.values()) v *= std::sqrt(2.0 / nsh);
  return {std::move(h), std::move(sh)};
}

}  // namespace

GridWavefunction psi_marginal_state(MarginalSign sign, double L, const Axis& a0, const Axis& a1) {
  check_marginal_domain(L, a0);
  check_marginal_domain(L, a1);
  double d0 = 0.0, d1 = 0.0;
  const auto [h0, sh0] = marginal_profiles(L, a0, d0);
  const auto [h1, sh1] = marginal_profiles(L, a1, d1);
  const Complex c = interference_phase(sign);
  const double pre = 1.0 / (2.0 * std::numbers::sqrt2);
  std::vector<Complex> v(a0.n * a1.n);
  for (std::size_t i = 0; i < a0.n; ++i)
    for (std::size_t j = 0; j < a1.n; ++j)
      v[i * a1.n + j] = pre * (h0.at(i) * h1.at(j) + c * sh0.at(i) * sh1.at(j));
  GridWavefunction psi({a0, a1}, std::move(v));
  psi.normalize();
  psi.set_normalization_deficit(a0 == a1 ? d0 : std::max(std::abs(d0), std::abs(d1)));
  return psi;
}

SeparableWavefunction::SeparableWavefunction(std::vector<Term> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw InputError("separable wavefunction needs at least one term");
  for (const auto& t : terms_) {
    if (t.first.dim() != 1 || t.second.dim() != 1) throw InputError("separable factors must be 1-D");
    if (t.first.axis(0) != terms_[0].first.axis(0) || t.second.axis(0) != terms_[0].second.axis(0))
      throw InputError("separable terms must share axes");
  }
}

const Axis& SeparableWavefunction::axis(std::size_t k) const {
  if (k > 1) throw InputError("separable wavefunction has two axes");
  return k == 0 ? terms_[0].first.axis(0) : terms_[0].second.axis(0);
}

namespace {

Complex inner(const GridWavefunction& a, const GridWavefunction& b) {
  Complex s(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a.at(i)) * b.at(i);
  return s * a.axis(0).spacing;
}

}  // namespace

double SeparableWavefunction::norm_squared() const {
  Complex s(0.0);
  for (const auto& k : terms_)
    for (const auto& l : terms_)
      s += k.coefficient * std::conj(l.coefficient) * inner(l.first, k.first) *
           inner(l.second, k.second);
  return s.real();
}

double SeparableWavefunction::normalize() {
  const double n2 = norm_squared();
  if (!(n2 > 0.0)) throw NormalizationError("cannot normalize a zero wavefunction");
  for (auto& t : terms_) t.coefficient /= std::sqrt(n2);
  deficit_ = 1.0 - n2;
  return deficit_;
}

SeparableWavefunction SeparableWavefunction::fourier(std::size_t axis) const {
  if (axis > 1) throw InputError("fourier: axis out of range");
  SeparableWavefunction out = *this;
  for (auto& t : out.terms_) {
    auto& f = axis == 0 ? t.first : t.second;
    f = waves::fourier(f, 0);
  }
  return out;
}

GridWavefunction SeparableWavefunction::to_grid() const {
  const Axis& a0 = axis(0);
  const Axis& a1 = axis(1);
  std::vector<Complex> v(a0.n * a1.n, Complex(0.0));
  for (const auto& t : terms_)
    for (std::size_t i = 0; i < a0.n; ++i) {
      const Complex ci = t.coefficient * t.first.at(i);
      for (std::size_t j = 0; j < a1.n; ++j) v[i * a1.n + j] += ci * t.second.at(j);
    }
  return GridWavefunction({a0, a1}, std::move(v));
}

SeparableWavefunction psi_marginal_separable(MarginalSign sign, double L, const Axis& axis) {
  check_marginal_domain(L, axis);
  double deficit = 0.0;
  auto [h, sh] = marginal_profiles(L, axis, deficit);
  const double pre = 1.0 / (2.0 * std::numbers::sqrt2);
  SeparableWavefunction psi({{Complex(pre), h, h}, {pre * interference_phase(sign), sh, sh}});
  psi.normalize();
  psi.set_normalization_deficit(deficit);
  return psi;
}

}  // namespace bellforge::waves
