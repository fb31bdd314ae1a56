#pragma once

// Local-hidden-variable feasibility for two settings and two outcomes per
// side. Outcome index 0 stands for +1 and index 1 for -1; setting index 0 is
// a (resp. b) and 1 is a' (resp. b').

#include <array>
#include <optional>
#include <string>

#include "bellforge/spinor.hpp"

namespace bellforge::lhv {

inline constexpr double kMarginalTolerance = 1e-7;

struct Behavior {
  /// p[i][j][r][s] = probability of outcomes (r, s) under settings (a_i, b_j).
  std::array<std::array<std::array<std::array<double, 2>, 2>, 2>, 2> p{};

  double correlator(int i, int j) const;

  /// Throws InputError naming the first violated constraint: positivity,
  /// normalization (1e-9) or no-signalling on either side (1e-9).
  void validate() const;
};

/// Joint distribution over (r, r', s, s'); index = 8 r + 4 r' + 2 s + s'.
struct JointDistribution {
  std::array<double, 16> q{};

  static int index(int r, int r_prime, int s, int s_prime) {
    return 8 * r + 4 * r_prime + 2 * s + s_prime;
  }
  /// The four pairwise marginals of the joint distribution.
  Behavior marginals() const;
};

/// A CHSH-form functional sum_k c_k E_k over (E_ab, E_ab', E_a'b, E_a'b')
/// with c_k = +-1 and exactly one coefficient of opposite sign to the rest.
struct ChshCertificate {
  std::array<int, 4> coefficients{};
  double value = 0.0;

  double evaluate(const Behavior& b) const;
};

/// All eight sign variants evaluated on b.
std::array<ChshCertificate, 8> chsh_variants(const Behavior& b);

struct Verdict {
  bool feasible = false;
  std::optional<JointDistribution> joint;
  std::optional<ChshCertificate> certificate;  // set when infeasible
  double residual = 0.0;                       // max-norm marginal mismatch of the best q
};

/// Outcome probabilities of projective polarization measurements on state.
Behavior quantum_behavior(const spinor::StateVector4& state, const spinor::ChshSettings& s);

/// Deterministic behavior with fixed local outcomes r(a_i), s(b_j) in {+1,-1}.
Behavior deterministic_behavior(std::array<int, 2> alice, std::array<int, 2> bob);

/// Phase-one simplex on the nine independent no-signalling coordinates.
Verdict lhv_feasible(const Behavior& b);

/// Nonnegative least squares over the sixteen local deterministic vertices.
Verdict brute_force_feasible(const Behavior& b);

std::string describe(const ChshCertificate& c);

}  // namespace bellforge::lhv
