#include "bellforge/spinor.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "bellforge/errors.hpp"
#include "bellforge/optimize.hpp"

namespace bellforge::spinor {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

double wrap_angle(double theta) {
  double t = std::fmod(theta, kPi);
  if (t < 0.0) t += kPi;
  if (t >= kPi) t -= kPi;
  return t;
}

Eigen::Matrix4cd kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) m(2 * i + j, 2 * k + l) = a(i, k) * b(j, l);
  return m;
}

Eigen::Matrix2cd pauli_dot(const Vec3& n) {
  Eigen::Matrix2cd m;
  m << Complex(n[2], 0.0), Complex(n[0], -n[1]), Complex(n[0], n[1]), Complex(-n[2], 0.0);
  return m;
}

void require_unit(const Vec3& v, const char* name) {
  const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (std::abs(norm - 1.0) > 1e-9)
    throw DomainError(std::string(name) + " is not a unit vector (|v| = " +
                      std::to_string(norm) + ")");
}

}  // namespace

StateVector4::StateVector4(const std::array<Complex, 4>& amplitudes) : amps_(amplitudes) {
  double norm = 0.0;
  for (const auto& a : amps_) norm += std::norm(a);
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-12)
    throw NormalizationError("state is not normalized: sum |a|^2 = " + std::to_string(norm));
}

StateVector4 StateVector4::normalized(const std::array<Complex, 4>& amplitudes) {
  double norm = 0.0;
  for (const auto& a : amplitudes) norm += std::norm(a);
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw NormalizationError("cannot normalize a zero or non-finite state");
  auto scaled = amplitudes;
  const double s = 1.0 / std::sqrt(norm);
  for (auto& a : scaled) a *= s;
  return StateVector4(scaled);
}

StateVector4 StateVector4::psi_plus() {
  const double h = 1.0 / std::sqrt(2.0);
  return StateVector4({Complex(h), Complex(0.0), Complex(0.0), Complex(h)});
}

StateVector4 StateVector4::psi_minus() {
  const double h = 1.0 / std::sqrt(2.0);
  return StateVector4({Complex(0.0), Complex(h), Complex(-h), Complex(0.0)});
}

StateVector4 StateVector4::singlet() { return psi_minus(); }

StateVector4 StateVector4::product(const Eigen::Vector2cd& a, const Eigen::Vector2cd& b) {
  return normalized({a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1)});
}

Eigen::Vector4cd StateVector4::vector() const {
  return Eigen::Vector4cd(amps_[0], amps_[1], amps_[2], amps_[3]);
}

char kind_letter(AnalyzerKind kind) { return kind == AnalyzerKind::Linear ? 'L' : 'E'; }

AnalyzerKind kind_from_letter(char c) {
  switch (c) {
    case 'L':
    case 'l':
      return AnalyzerKind::Linear;
    case 'E':
    case 'e':
      return AnalyzerKind::Elliptic;
    default:
      throw InputError(std::string("unknown analyzer kind '") + c + "' (expected L or E)");
  }
}

AnalyzerSetting::AnalyzerSetting(double theta, AnalyzerKind kind)
    : theta_(wrap_angle(theta)), kind_(kind) {
  if (!std::isfinite(theta)) throw InputError("analyzer angle must be finite");
}

Eigen::Vector2cd AnalyzerSetting::ket() const {
  const double c = std::cos(theta_);
  const double s = std::sin(theta_);
  if (kind_ == AnalyzerKind::Linear) return {Complex(c), Complex(s)};
  return {Complex(c), kI * s};
}

Eigen::Vector2cd AnalyzerSetting::orthogonal_ket() const {
  const double c = std::cos(theta_);
  const double s = std::sin(theta_);
  if (kind_ == AnalyzerKind::Linear) return {Complex(-s), Complex(c)};
  return {Complex(-s), kI * c};
}

double ChshCorrelations::chsh() const {
  return std::abs(ab - ab_prime) + std::abs(a_prime_b + a_prime_b_prime);
}

DichotomicObservable observable_from_setting(const AnalyzerSetting& s) {
  const Eigen::Vector2cd pass = s.ket();
  const Eigen::Vector2cd block = s.orthogonal_ket();
  return {pass * pass.adjoint() - block * block.adjoint()};
}

double correlation(const StateVector4& state, const AnalyzerSetting& sa,
                   const AnalyzerSetting& sb) {
  const Eigen::Vector4cd psi = state.vector();
  const Eigen::Matrix4cd op =
      kron(observable_from_setting(sa).matrix, observable_from_setting(sb).matrix);
  return (psi.adjoint() * op * psi)(0, 0).real();
}

double singlet_correlation(const Vec3& a, const Vec3& b) {
  require_unit(a, "a");
  require_unit(b, "b");
  return -(a[0] * b[0] + a[1] * b[1] + a[2] * b[2]);
}

double singlet_correlation_matrix(const Vec3& a, const Vec3& b) {
  require_unit(a, "a");
  require_unit(b, "b");
  // Spin basis |u>=|x>, |d>=|y>, so the singlet is psi_minus.
  const Eigen::Vector4cd psi = StateVector4::singlet().vector();
  const Eigen::Matrix4cd op = kron(pauli_dot(a), pauli_dot(b));
  return (psi.adjoint() * op * psi)(0, 0).real();
}

ChshCorrelations chsh_correlations(const StateVector4& state, const ChshSettings& s) {
  return {correlation(state, s.a, s.b), correlation(state, s.a, s.b_prime),
          correlation(state, s.a_prime, s.b), correlation(state, s.a_prime, s.b_prime)};
}

double chsh_value(const StateVector4& state, const ChshSettings& s) {
  return chsh_correlations(state, s).chsh();
}

ChshKinds kinds_from_string(const std::string& letters) {
  if (letters.size() != 4)
    throw InputError("kinds must have exactly four letters (a, b, a', b'), got '" + letters + "'");
  return {kind_from_letter(letters[0]), kind_from_letter(letters[1]), kind_from_letter(letters[2]),
          kind_from_letter(letters[3])};
}

namespace {

ChshSettings settings_from(const std::vector<double>& t, const ChshKinds& k) {
  // t and k are ordered (a, b, a', b').
  return {AnalyzerSetting(t[0], k[0]), AnalyzerSetting(t[2], k[2]), AnalyzerSetting(t[1], k[1]),
          AnalyzerSetting(t[3], k[3])};
}

}  // namespace

ChshOptimum maximize_chsh(const StateVector4& state, const ChshKinds& kinds, std::uint64_t seed) {
  constexpr int kSteps = 64;
  const double step = kPi / kSteps;

  // Correlation tables for the four (side A, side B) kind pairings.
  auto table = [&](AnalyzerKind ka, AnalyzerKind kb) {
    std::vector<double> t(kSteps * kSteps);
    for (int i = 0; i < kSteps; ++i)
      for (int j = 0; j < kSteps; ++j)
        t[i * kSteps + j] =
            correlation(state, AnalyzerSetting(i * step, ka), AnalyzerSetting(j * step, kb));
    return t;
  };
  const auto t_ab = table(kinds[0], kinds[1]);
  const auto t_abp = table(kinds[0], kinds[3]);
  const auto t_apb = table(kinds[2], kinds[1]);
  const auto t_apbp = table(kinds[2], kinds[3]);

  double best = -1.0;
  std::array<int, 4> arg{0, 0, 0, 0};
  for (int a = 0; a < kSteps; ++a)
    for (int b = 0; b < kSteps; ++b)
      for (int ap = 0; ap < kSteps; ++ap)
        for (int bp = 0; bp < kSteps; ++bp) {
          const double v = std::abs(t_ab[a * kSteps + b] - t_abp[a * kSteps + bp]) +
                           std::abs(t_apb[ap * kSteps + b] + t_apbp[ap * kSteps + bp]);
          if (v > best + 1e-12) {
            best = v;
            arg = {a, b, ap, bp};
          }
        }

  auto objective = [&](const std::vector<double>& t) {
    return chsh_value(state, settings_from(t, kinds));
  };

  std::vector<double> start{arg[0] * step, arg[1] * step, arg[2] * step, arg[3] * step};
  auto incumbent = optimize::coordinate_ascent(objective, start, step, 1e-8);
  if (incumbent.value < best) incumbent = {start, best};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, kPi);
  for (int restart = 0; restart < 4; ++restart) {
    std::vector<double> x0{angle(rng), angle(rng), angle(rng), angle(rng)};
    auto candidate = optimize::coordinate_ascent(objective, x0, 4.0 * step, 1e-8);
    if (candidate.value > incumbent.value + 1e-12) incumbent = candidate;
  }
  return {settings_from(incumbent.x, kinds), incumbent.value};
}

}  // namespace bellforge::spinor
