#pragma once

// Two-photon polarization states, dichotomic analyzer observables and the
// CHSH functional.
//
// Two-photon amplitudes are stored in the ordered basis |xx>, |xy>, |yx>, |yy>
// (first factor = photon A). Analyzer angles are radians; observables are
// pi-periodic in the angle, so settings are normalized into [0, pi).

#include <array>
#include <complex>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

namespace bellforge::spinor {

using Complex = std::complex<double>;

inline constexpr double kTsirelson = 2.8284271247461903;  // 2 sqrt 2

class StateVector4 {
 public:
  /// Throws NormalizationError unless sum |a_i|^2 = 1 within 1e-12.
  explicit StateVector4(const std::array<Complex, 4>& amplitudes);

  /// Rescales arbitrary non-zero amplitudes to unit norm.
  static StateVector4 normalized(const std::array<Complex, 4>& amplitudes);

  /// (|xx> + |yy>)/sqrt 2
  static StateVector4 psi_plus();
  /// (|xy> - |yx>)/sqrt 2
  static StateVector4 psi_minus();
  /// Spin singlet (|ud> - |du>)/sqrt 2 with u -> x, d -> y; equal to psi_minus.
  static StateVector4 singlet();
  /// Product state |a> (x) |b> of single-photon kets (each normalized first).
  static StateVector4 product(const Eigen::Vector2cd& a, const Eigen::Vector2cd& b);

  const std::array<Complex, 4>& amplitudes() const { return amps_; }
  Eigen::Vector4cd vector() const;

 private:
  std::array<Complex, 4> amps_;
};

enum class AnalyzerKind { Linear, Elliptic };

char kind_letter(AnalyzerKind kind);
AnalyzerKind kind_from_letter(char c);  // 'L' or 'E', throws InputError otherwise

class AnalyzerSetting {
 public:
  AnalyzerSetting() = default;
  AnalyzerSetting(double theta, AnalyzerKind kind);

  double theta() const { return theta_; }
  AnalyzerKind kind() const { return kind_; }

  /// Transmitted ket: cos t |x> + sin t |y> (Linear) or cos t |x> + i sin t |y>
  /// (Elliptic).
  Eigen::Vector2cd ket() const;
  /// The orthogonal, blocked ket (the same family at t + pi/2).
  Eigen::Vector2cd orthogonal_ket() const;

 private:
  double theta_ = 0.0;
  AnalyzerKind kind_ = AnalyzerKind::Linear;
};

struct DichotomicObservable {
  Eigen::Matrix2cd matrix;
};

/// Settings for one CHSH experiment: side A uses a, a'; side B uses b, b'.
struct ChshSettings {
  AnalyzerSetting a;
  AnalyzerSetting a_prime;
  AnalyzerSetting b;
  AnalyzerSetting b_prime;
};

struct ChshCorrelations {
  double ab = 0.0;
  double ab_prime = 0.0;
  double a_prime_b = 0.0;
  double a_prime_b_prime = 0.0;

  /// |P(a,b) - P(a,b')| + |P(a',b) + P(a',b')|
  double chsh() const;
};

/// |t><t| - |t+pi/2><t+pi/2| for the setting's ket family.
DichotomicObservable observable_from_setting(const AnalyzerSetting& s);

/// <psi| A(sa) (x) B(sb) |psi>.
double correlation(const StateVector4& state, const AnalyzerSetting& sa,
                   const AnalyzerSetting& sb);

using Vec3 = std::array<double, 3>;

/// Closed-form singlet correlation -a.b for unit vectors (1e-9 tolerance,
/// otherwise DomainError).
double singlet_correlation(const Vec3& a, const Vec3& b);

/// Same quantity by the trace <singlet| sigma.a (x) sigma.b |singlet>.
double singlet_correlation_matrix(const Vec3& a, const Vec3& b);

ChshCorrelations chsh_correlations(const StateVector4& state, const ChshSettings& s);
double chsh_value(const StateVector4& state, const ChshSettings& s);

/// Kinds in the order a, b, a', b'.
using ChshKinds = std::array<AnalyzerKind, 4>;
ChshKinds kinds_from_string(const std::string& letters);  // e.g. "EEEE", "LELE"

struct ChshOptimum {
  ChshSettings settings;
  double value = 0.0;
};

/// Grid scan over [0, pi)^4 at step pi/64 followed by coordinate ascent to
/// 1e-8. Among equal grid maxima the lexicographically smallest (a, b, a', b')
/// tuple wins; `seed` drives a few extra random starts for the refinement.
ChshOptimum maximize_chsh(const StateVector4& state, const ChshKinds& kinds, std::uint64_t seed);

}  // namespace bellforge::spinor
