#include "bellforge/lhv.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "bellforge/errors.hpp"

namespace bellforge::lhv {

namespace {

constexpr int kVertices = 16;

int outcome_of(int vertex, int party, int setting) {
  // vertex bits: r (8), r' (4), s (2), s' (1)
  const int shift = party == 0 ? (setting == 0 ? 3 : 2) : (setting == 0 ? 1 : 0);
  return (vertex >> shift) & 1;
}

// Row of the full marginal map for entry (i, j, r, s).
int entry_row(int i, int j, int r, int s) { return 8 * i + 4 * j + 2 * r + s; }

Eigen::Matrix<double, 16, 16> marginal_matrix() {
  Eigen::Matrix<double, 16, 16> m = Eigen::Matrix<double, 16, 16>::Zero();
  for (int v = 0; v < kVertices; ++v)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m(entry_row(i, j, outcome_of(v, 0, i), outcome_of(v, 1, j)), v) = 1;
  return m;
}

Eigen::Matrix<double, 16, 1> flatten(const Behavior& b) {
  Eigen::Matrix<double, 16, 1> v;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s) v(entry_row(i, j, r, s)) = b.p[i][j][r][s];
  return v;
}

double max_residual(const JointDistribution& q, const Behavior& b) {
  const Behavior m = q.marginals();
  double worst = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s)
          worst = std::max(worst, std::abs(m.p[i][j][r][s] - b.p[i][j][r][s]));
  return worst;
}

JointDistribution clean(const std::array<double, 16>& raw) {
  JointDistribution q;
  double total = 0.0;
  for (int k = 0; k < kVertices; ++k) {
    q.q[k] = std::max(0.0, raw[k]);
    total += q.q[k];
  }
  if (total > 0.0)
    for (auto& v : q.q) v /= total;
  return q;
}

Verdict conclude(const Behavior& b, const JointDistribution& q) {
  Verdict out;
  out.residual = max_residual(q, b);
  if (out.residual <= kMarginalTolerance) {
    out.feasible = true;
    out.joint = q;
    return out;
  }
  const auto variants = chsh_variants(b);
  out.certificate = *std::max_element(
      variants.begin(), variants.end(),
      [](const ChshCertificate& x, const ChshCertificate& y) { return x.value < y.value; });
  return out;
}

}  // namespace

double Behavior::correlator(int i, int j) const {
  const auto& t = p[i][j];
  return t[0][0] - t[0][1] - t[1][0] + t[1][1];
}

void Behavior::validate() const {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double total = 0.0;
      for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s) {
          const double v = p[i][j][r][s];
          if (!std::isfinite(v) || v < -1e-12)
            throw InputError("positivity violated: p[" + std::to_string(i + 1) +
                             std::to_string(j + 1) + "] has entry " + std::to_string(v));
          total += v;
        }
      if (std::abs(total - 1.0) > 1e-9)
        throw InputError("normalization violated: setting pair " + std::to_string(i + 1) +
                         std::to_string(j + 1) + " sums to " + std::to_string(total));
    }
  for (int i = 0; i < 2; ++i)
    for (int r = 0; r < 2; ++r) {
      const double with_b = p[i][0][r][0] + p[i][0][r][1];
      const double with_b_prime = p[i][1][r][0] + p[i][1][r][1];
      if (std::abs(with_b - with_b_prime) > 1e-9)
        throw InputError("no-signalling violated on side A at setting " + std::to_string(i + 1));
    }
  for (int j = 0; j < 2; ++j)
    for (int s = 0; s < 2; ++s) {
      const double with_a = p[0][j][0][s] + p[0][j][1][s];
      const double with_a_prime = p[1][j][0][s] + p[1][j][1][s];
      if (std::abs(with_a - with_a_prime) > 1e-9)
        throw InputError("no-signalling violated on side B at setting " + std::to_string(j + 1));
    }
}

Behavior JointDistribution::marginals() const {
  Behavior b;
  for (int v = 0; v < kVertices; ++v)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        b.p[i][j][outcome_of(v, 0, i)][outcome_of(v, 1, j)] += q[v];
  return b;
}

double ChshCertificate::evaluate(const Behavior& b) const {
  return coefficients[0] * b.correlator(0, 0) + coefficients[1] * b.correlator(0, 1) +
         coefficients[2] * b.correlator(1, 0) + coefficients[3] * b.correlator(1, 1);
}

std::array<ChshCertificate, 8> chsh_variants(const Behavior& b) {
  std::array<ChshCertificate, 8> out;
  int n = 0;
  for (int overall : {1, -1})
    for (int odd = 0; odd < 4; ++odd) {
      ChshCertificate c;
      for (int k = 0; k < 4; ++k) c.coefficients[k] = (k == odd ? -overall : overall);
      c.value = c.evaluate(b);
      out[n++] = c;
    }
  return out;
}

Behavior quantum_behavior(const spinor::StateVector4& state, const spinor::ChshSettings& s) {
  const Eigen::Vector4cd psi = state.vector();
  const std::array<spinor::AnalyzerSetting, 2> side_a{s.a, s.a_prime};
  const std::array<spinor::AnalyzerSetting, 2> side_b{s.b, s.b_prime};
  Behavior b;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const std::array<Eigen::Vector2cd, 2> ka{side_a[i].ket(), side_a[i].orthogonal_ket()};
      const std::array<Eigen::Vector2cd, 2> kb{side_b[j].ket(), side_b[j].orthogonal_ket()};
      for (int r = 0; r < 2; ++r)
        for (int t = 0; t < 2; ++t) {
          // <ka (x) kb | psi>, with basis index 2 * (A component) + (B component)
          std::complex<double> amp = 0.0;
          for (int u = 0; u < 2; ++u)
            for (int w = 0; w < 2; ++w) amp += std::conj(ka[r](u) * kb[t](w)) * psi(2 * u + w);
          b.p[i][j][r][t] = std::norm(amp);
        }
    }
  return b;
}

Behavior deterministic_behavior(std::array<int, 2> alice, std::array<int, 2> bob) {
  Behavior b;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) b.p[i][j][alice[i] > 0 ? 0 : 1][bob[j] > 0 ? 0 : 1] = 1.0;
  return b;
}

Verdict lhv_feasible(const Behavior& b) {
  b.validate();

  // Constraint rows: normalization, P_A(+|a_i), P_B(+|b_j), P(++|a_i,b_j).
  constexpr int kRows = 9;
  constexpr int kCols = kVertices + kRows;  // structural + artificial
  std::vector<std::array<double, kCols + 1>> t(kRows);
  std::array<double, kRows> rhs{};
  auto row_of = [&](int k, auto&& member) {
    for (int v = 0; v < kVertices; ++v) t[k][v] = member(v) ? 1.0 : 0.0;
  };
  row_of(0, [](int) { return true; });
  rhs[0] = 1.0;
  for (int i = 0; i < 2; ++i) {
    row_of(1 + i, [i](int v) { return outcome_of(v, 0, i) == 0; });
    rhs[1 + i] = b.p[i][0][0][0] + b.p[i][0][0][1];
  }
  for (int j = 0; j < 2; ++j) {
    row_of(3 + j, [j](int v) { return outcome_of(v, 1, j) == 0; });
    rhs[3 + j] = b.p[0][j][0][0] + b.p[0][j][1][0];
  }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const int k = 5 + 2 * i + j;
      row_of(k, [i, j](int v) { return outcome_of(v, 0, i) == 0 && outcome_of(v, 1, j) == 0; });
      rhs[k] = b.p[i][j][0][0];
    }
  std::array<int, kRows> basis{};
  for (int k = 0; k < kRows; ++k) {
    for (int a = 0; a < kRows; ++a) t[k][kVertices + a] = (a == k) ? 1.0 : 0.0;
    t[k][kCols] = std::max(0.0, rhs[k]);
    basis[k] = kVertices + k;
  }

  // Phase one: minimize the sum of artificials, Bland's rule.
  constexpr double kPivotTol = 1e-12;
  for (int iteration = 0; iteration < 1000; ++iteration) {
    // Reduced cost of column c: 0 for artificials in basis; -(sum of column over rows)
    // for structurals, adjusted for basic artificials.
    int entering = -1;
    for (int c = 0; c < kCols && entering < 0; ++c) {
      if (std::find(basis.begin(), basis.end(), c) != basis.end()) continue;
      double reduced = (c >= kVertices) ? 1.0 : 0.0;
      for (int k = 0; k < kRows; ++k)
        if (basis[k] >= kVertices) reduced -= t[k][c];
      if (reduced < -1e-11) entering = c;
    }
    if (entering < 0) break;
    int leaving = -1;
    double best_ratio = 0.0;
    for (int k = 0; k < kRows; ++k) {
      if (t[k][entering] <= kPivotTol) continue;
      const double ratio = t[k][kCols] / t[k][entering];
      if (leaving < 0 || ratio < best_ratio - 1e-15 ||
          (std::abs(ratio - best_ratio) <= 1e-15 && basis[k] < basis[leaving])) {
        leaving = k;
        best_ratio = ratio;
      }
    }
    if (leaving < 0) break;  // unbounded direction cannot occur in phase one
    const double pivot = t[leaving][entering];
    for (auto& v : t[leaving]) v /= pivot;
    for (int k = 0; k < kRows; ++k) {
      if (k == leaving) continue;
      const double factor = t[k][entering];
      if (factor == 0.0) continue;
      for (int c = 0; c <= kCols; ++c) t[k][c] -= factor * t[leaving][c];
    }
    basis[leaving] = entering;
  }

  std::array<double, 16> raw{};
  for (int k = 0; k < kRows; ++k)
    if (basis[k] < kVertices) raw[basis[k]] = t[k][kCols];
  return conclude(b, clean(raw));
}

Verdict brute_force_feasible(const Behavior& b) {
  b.validate();

  // Lawson-Hanson NNLS for min || A q - y || with q >= 0, where A stacks the
  // 16 vertex behaviors and a normalization row.
  Eigen::Matrix<double, 17, 16> a;
  a.topRows<16>() = marginal_matrix();
  a.row(16).setOnes();
  Eigen::Matrix<double, 17, 1> y;
  y.head<16>() = flatten(b);
  y(16) = 1.0;

  Eigen::Matrix<double, 16, 1> x = Eigen::Matrix<double, 16, 1>::Zero();
  std::array<bool, 16> passive{};
  constexpr double kTol = 1e-13;

  auto solve_passive = [&]() {
    std::vector<int> cols;
    for (int c = 0; c < 16; ++c)
      if (passive[c]) cols.push_back(c);
    Eigen::MatrixXd sub(17, cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) sub.col(k) = a.col(cols[k]);
    const Eigen::VectorXd zp = sub.colPivHouseholderQr().solve(y);
    Eigen::Matrix<double, 16, 1> z = Eigen::Matrix<double, 16, 1>::Zero();
    for (std::size_t k = 0; k < cols.size(); ++k) z(cols[k]) = zp(k);
    return z;
  };

  for (int outer = 0; outer < 100; ++outer) {
    const Eigen::Matrix<double, 16, 1> w = a.transpose() * (y - a * x);
    int entering = -1;
    for (int c = 0; c < 16; ++c)
      if (!passive[c] && w(c) > kTol && (entering < 0 || w(c) > w(entering))) entering = c;
    if (entering < 0) break;
    passive[entering] = true;
    for (int inner = 0; inner < 100; ++inner) {
      const auto z = solve_passive();
      bool all_positive = true;
      for (int c = 0; c < 16; ++c)
        if (passive[c] && z(c) <= 0.0) all_positive = false;
      if (all_positive) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (int c = 0; c < 16; ++c)
        if (passive[c] && z(c) <= 0.0) alpha = std::min(alpha, x(c) / (x(c) - z(c)));
      x += alpha * (z - x);
      for (int c = 0; c < 16; ++c)
        if (passive[c] && x(c) <= kTol) {
          passive[c] = false;
          x(c) = 0.0;
        }
    }
  }

  std::array<double, 16> raw{};
  for (int c = 0; c < 16; ++c) raw[c] = x(c);
  return conclude(b, clean(raw));
}

std::string describe(const ChshCertificate& c) {
  static const char* names[4] = {"E(a,b)", "E(a,b')", "E(a',b)", "E(a',b')"};
  std::ostringstream out;
  for (int k = 0; k < 4; ++k) {
    out << (c.coefficients[k] > 0 ? (k == 0 ? "" : " + ") : (k == 0 ? "-" : " - ")) << names[k];
  }
  out << " <= 2";
  return out.str();
}

}  // namespace bellforge::lhv
