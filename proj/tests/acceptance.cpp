// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bellforge/akmeas.hpp"
#include "bellforge/causal.hpp"
#include "bellforge/cli.hpp"
#include "bellforge/lhv.hpp"
#include "bellforge/psbell.hpp"
#include "bellforge/spinor.hpp"
#include "bellforge/waves.hpp"
#include "bellforge/wigner.hpp"

using namespace bellforge;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTsirelson = 2.0 * std::numbers::sqrt2;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... v) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, v...);
  return buf;
}

struct Cli {
  int code;
  json out;
};

Cli cli_json(const std::vector<std::string>& args) {
  std::istringstream in;
  std::ostringstream out, err;
  const int code = cli::run(args, in, out, err);
  return {code, code == cli::kExitInput ? json() : json::parse(out.str())};
}

spinor::ChshSettings angles(spinor::AnalyzerKind k) {
  using spinor::AnalyzerSetting;
  // {2a, 2b, 2a', 2b'} = {0, pi/4, pi/2, 3pi/4}
  return {AnalyzerSetting(0.0, k), AnalyzerSetting(kPi / 4, k), AnalyzerSetting(kPi / 8, k),
          AnalyzerSetting(3 * kPi / 8, k)};
}

spinor::StateVector4 random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  using C = spinor::Complex;
  return spinor::StateVector4::normalized(
      {C(g(rng), g(rng)), C(g(rng), g(rng)), C(g(rng), g(rng)), C(g(rng), g(rng))});
}

Outcome bell_chsh() {
  using spinor::AnalyzerKind;
  const auto pp = spinor::StateVector4::psi_plus();
  const double ee = spinor::chsh_value(pp, angles(AnalyzerKind::Elliptic));
  const double ll = spinor::chsh_value(pp, angles(AnalyzerKind::Linear));
  const auto r = cli_json({"chsh", "--state", "psi-plus", "--kinds", "EEEE", "--angles", "0,22.5,45,67.5", "--degrees"});
  const double via_cli = r.code == 0 ? r.out["S"].get<double>() : 0.0;
  return {std::abs(ee - kTsirelson) < 1e-6 && std::abs(ll - kTsirelson) < 1e-6 && std::abs(via_cli - kTsirelson) < 1e-6,
          fmt("EE %.12f, LL %.12f, cli %.12f", ee, ll, via_cli)};
}

Outcome mixed_null() {
  double worst = 0.0;
  std::string d;
  for (const auto& state : {spinor::StateVector4::psi_plus(), spinor::StateVector4::psi_minus()})
    for (const char* k : {"LELE", "ELEL"}) {
      const double v = spinor::maximize_chsh(state, spinor::kinds_from_string(k), 1).value;
      worst = std::max(worst, std::abs(v - 2.0));
      d += fmt("%s %.8f ", k, v);
    }
  return {worst < 1e-4, d + fmt("(max |S-2| %.2e)", worst)};
}

Outcome closed_forms() {
  using spinor::AnalyzerSetting;
  const auto L = spinor::AnalyzerKind::Linear, E = spinor::AnalyzerKind::Elliptic;
  const auto pp = spinor::StateVector4::psi_plus(), pm = spinor::StateVector4::psi_minus();
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> u(-2 * kPi, 2 * kPi);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double a = u(rng), b = u(rng);
    auto c = [&](const spinor::StateVector4& s, spinor::AnalyzerKind ka, spinor::AnalyzerKind kb) {
      return spinor::correlation(s, AnalyzerSetting(a, ka), AnalyzerSetting(b, kb));
    };
    const double minus = std::cos(2 * (a - b)), plus = std::cos(2 * (a + b)), mixed = std::cos(2 * a) * std::cos(2 * b);
    worst = std::max({worst, std::abs(c(pp, L, L) - minus), std::abs(c(pm, L, L) + minus), std::abs(c(pp, E, E) - plus),
                      std::abs(c(pm, E, E) + minus), std::abs(c(pp, L, E) - mixed), std::abs(c(pp, E, L) - mixed),
                      std::abs(c(pm, L, E) + mixed), std::abs(c(pm, E, L) + mixed)});
  }
  return {worst < 1e-10, fmt("10000 pairs, max deviation %.2e", worst)};
}

Outcome tsirelson() {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, kPi);
  std::bernoulli_distribution coin;
  auto kind = [&] { return coin(rng) ? spinor::AnalyzerKind::Linear : spinor::AnalyzerKind::Elliptic; };
  double worst = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const auto s = random_state(rng);
    const spinor::ChshSettings set{{u(rng), kind()}, {u(rng), kind()}, {u(rng), kind()}, {u(rng), kind()}};
    worst = std::max(worst, spinor::chsh_value(s, set));
  }
  return {worst <= kTsirelson + 1e-9, fmt("100000 draws, max S %.12f", worst)};
}

lhv::Behavior pr_box(int alpha, int beta, int gamma) {
  lhv::Behavior b;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s)
          b.p[i][j][r][s] = ((r ^ s) == ((i & j) ^ (alpha & i) ^ (beta & j) ^ gamma)) ? 0.5 : 0.0;
  return b;
}

// Dirichlet mix of a few of the 24 no-signalling vertices (16 local, 8 PR boxes).
lhv::Behavior random_behavior(std::mt19937_64& rng) {
  std::gamma_distribution<double> g(0.5);
  std::uniform_int_distribution<int> pick(0, 23), count(1, 5);
  const int m = count(rng);
  std::vector<double> w(m);
  double tot = 0.0;
  for (auto& x : w) tot += (x = g(rng) + 1e-3);
  lhv::Behavior out;
  for (int k = 0; k < m; ++k) {
    const int v = pick(rng);
    const auto vb = v < 16 ? lhv::deterministic_behavior({(v & 8) ? -1 : 1, (v & 4) ? -1 : 1},
                                                         {(v & 2) ? -1 : 1, (v & 1) ? -1 : 1})
                           : pr_box((v >> 2) & 1, (v >> 1) & 1, v & 1);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int r = 0; r < 2; ++r)
          for (int s = 0; s < 2; ++s) out.p[i][j][r][s] += w[k] / tot * vb.p[i][j][r][s];
  }
  return out;
}

Outcome lhv_agreement() {
  std::mt19937_64 rng(22);
  int disagree = 0, feasible = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto b = random_behavior(rng);
    const bool fast = lhv::lhv_feasible(b).feasible;
    disagree += fast != lhv::brute_force_feasible(b).feasible;
    feasible += fast;
  }
  const auto s = spinor::StateVector4::singlet();
  const auto opt = spinor::maximize_chsh(s, spinor::kinds_from_string("LLLL"), 1);
  const auto v = lhv::lhv_feasible(lhv::quantum_behavior(s, opt.settings));
  const double cert = v.certificate ? v.certificate->value : 0.0;
  return {disagree == 0 && !v.feasible && std::abs(cert - kTsirelson) < 1e-6,
          fmt("1000 behaviors (%d feasible), %d disagreements; singlet certificate %.9f", feasible, disagree, cert)};
}

Outcome rs_1d() {
  std::string d;
  bool ok = true;
  for (const char* psi : {"gaussian", "two-gaussian"}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = cli_json({"rs1d", "--psi", psi, "--grid", "4096", "--sigma", "1.3", "--p0", "0.7", "--t", "0.5"});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.code == cli::kExitInput) return {false, std::string("rs1d rejected ") + psi};
    double worst = 0.0;
    for (const auto& m : r.out["marginals"]) worst = std::max(worst, m["l1"].get<double>());
    ok = ok && r.code == 0 && worst < 5e-3 && secs < 5.0;
    d += fmt("%s max L1 %.2e in %.2fs; ", psi, worst, secs);
  }
  return {ok, d};
}

Outcome rs_2d() {
  const auto r = cli_json({"rs2d", "--grid", "1024", "--gauss", "1.0,0.6,0.8,0.3,-0.2,0.25,0.4,-0.3,0.5,-0.4",
                           "--ordering", "px", "--swap-check"});
  if (r.code == cli::kExitInput) return {false, "rs2d rejected its arguments"};
  double worst = 0.0;
  for (const auto& m : r.out["marginals"]) worst = std::max(worst, m["l1"].get<double>());
  double worst_swapped = 0.0;
  for (const auto& m : r.out["swap"]["report"]["marginals"]) worst_swapped = std::max(worst_swapped, m["l1"].get<double>());
  const double diff = r.out["swap"]["map_difference"].get<double>();
  return {r.code == 0 && worst < 5e-3 && worst_swapped < 5e-3 && diff > 1e-3,
          fmt("chain max L1 %.2e, swapped chain max L1 %.2e, map difference %.4f", worst, worst_swapped, diff)};
}

Outcome takabayasi() {
  const auto a = waves::Axis::centered(2048, 40.0);
  std::vector<double> gaps;
  for (double t : {0.0, 1.0, 2.0, 4.0})
    gaps.push_back(causal::takabayasi_gap(waves::gaussian_packet({0.0, 0.0, 1.0, t, 1.0}, a)).gap);
  bool ok = gaps[0] > 1.5;
  for (std::size_t k = 1; k < gaps.size(); ++k) ok = ok && gaps[k] < gaps[k - 1];
  return {ok, fmt("gaps at t=0,1,2,4: %.4f %.4f %.4f %.4f", gaps[0], gaps[1], gaps[2], gaps[3])};
}

Outcome marginal_theorem() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = psbell::marginal_theorem_demo({10.0, 100.0, 1000.0, 10000.0});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = rep.monotone && rep.rows.size() == 4 && secs < 120.0;
  std::string d;
  for (const auto& r : rep.rows) {
    ok = ok && r.s_plus <= kTsirelson + 1e-6 && std::abs(r.s_plus + r.s_minus) < 1e-6;
    d += fmt("%.5f ", r.s_plus);
  }
  const double lim = rep.extrapolated_limit.value_or(0.0);
  ok = ok && std::abs(lim / kTsirelson - 1.0) < 0.05;
  return {ok, "S = " + d + fmt("limit %.4f (%.2f%% off), %.1fs", lim, 100 * std::abs(lim / kTsirelson - 1.0), secs)};
}

Outcome wigner_checks() {
  const auto a = waves::Axis::centered(256, 16.0);
  double min_w = 1.0, worst = 0.0;
  auto check = [&](const waves::GridWavefunction& psi) {
    const auto w = wigner::wigner_transform(psi);
    min_w = std::min(min_w, w.min());
    for (const auto& e : wigner::marginal_errors(w, psi)) worst = std::max(worst, e.max_error);
  };
  check(waves::gaussian_packet({0.5, 1.0, 0.8, 0.0, 1.0}, a));
  check(waves::gaussian_packet({-1.0, 0.0, 1.3, 0.7, 1.0}, a));
  const auto b = waves::Axis::centered(64, 8.0);
  check(waves::gaussian_2d({1.0, 0.4, 0.8, 0.2, -0.1, 0.3, 0.3, -0.2, 0.5, 0.0}, b, b));
  const auto w1 = wigner::wigner_transform(waves::oscillator_state(1, a));
  const double origin = w1.at(a.n / 2, a.n / 2);
  return {min_w >= -1e-8 && worst < 1e-5 && std::abs(origin + 1.0 / kPi) < 1e-4,
          fmt("Gaussian min W %.2e, max marginal error %.2e; excited W(0,0) %.8f", min_w, worst, origin)};
}

Outcome parity() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> v;
  for (double r : {0.0, 0.5, 1.0, 2.0, 3.0}) v.push_back(wigner::maximize_chsh_parity({r}, 1).value);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = v[0] <= 2.0 + 1e-9 && v.back() >= 2.15 && v.back() <= 2.20 && secs < 30.0;
  for (std::size_t k = 1; k < v.size(); ++k) ok = ok && v[k] >= v[k - 1];
  return {ok, fmt("r=0,0.5,1,2,3: %.5f %.5f %.5f %.5f %.5f in %.2fs", v[0], v[1], v[2], v[3], v[4], secs)};
}

Outcome ak_variances() {
  const std::size_t n = 1024;
  const auto a = waves::Axis::centered(n, std::sqrt(kPi * n / 2.0));
  double worst = 0.0;
  for (double s : {0.5, 1.0, 2.0})
    for (double b : {0.2, 1.0}) {
      const auto v = akmeas::ak_variances(waves::gaussian_packet({0.0, 0.0, s, 0.0, 1.0}, a), {b});
      worst = std::max({worst, std::abs(v.var_x1 / (s * s + b * b) - 1.0),
                        std::abs(v.var_x2 / (1 / (4 * s * s) + 1 / (4 * b * b)) - 1.0)});
    }
  return {worst < 1e-2, fmt("6 (sigma, b) pairs, max relative error %.2e", worst)};
}

Outcome ak_figure() {
  const std::string path = "acceptance_ak.csv";
  const auto r = cli_json({"ak-compare", "--sigma", "1", "--t", "1", "--mass", "1", "--b", "1", "--epsilon", "1",
                           "--grid", "2048", "--out", path});
  if (r.code != 0) return {false, "ak-compare failed"};
  std::ifstream f(path);
  std::string line;
  std::getline(f, line);
  if (line != "q,p_ak,p_rs\r") return {false, "unexpected header " + line};
  std::vector<double> q, ak, rs;
  while (std::getline(f, line)) {
    double x, y, z;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &z) != 3) continue;  // flagged rows have no p_ak
    q.push_back(x);
    ak.push_back(y);
    rs.push_back(z);
  }
  const auto fa = akmeas::fit_line(q, ak), fr = akmeas::fit_line(q, rs);
  return {q.size() > 10 && fa.max_residual < 1e-3 && fr.max_residual < 1e-3 && std::abs(fa.slope - fr.slope) > 1e-2,
          fmt("%zu rows; AK slope %.5f (residual %.1e), RS slope %.5f (residual %.1e)", q.size(), fa.slope,
              fa.max_residual, fr.slope, fr.max_residual)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"CHSH with linear and elliptic analyzers reaches 2 sqrt 2", bell_chsh},
      {"mixed linear/elliptic kinds give no violation", mixed_null},
      {"closed-form correlations", closed_forms},
      {"Tsirelson ceiling", tsirelson},
      {"LHV feasibility against the vertex oracle", lhv_agreement},
      {"Roy-Singh 1-D marginals", rs_1d},
      {"Roy-Singh 2-D marginals and context swap", rs_2d},
      {"Takabayasi gap", takabayasi},
      {"marginal theorem sweep", marginal_theorem},
      {"Wigner checks", wigner_checks},
      {"displaced-parity CHSH", parity},
      {"Arthurs-Kelly variances", ak_variances},
      {"Arthurs-Kelly against Roy-Singh momentum peaks", ak_figure},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("%s %2zu %s: %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
