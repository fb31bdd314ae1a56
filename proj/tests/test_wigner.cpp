#include "doctest.h"

#include <chrono>
#include <cmath>
#include <numbers>

#include "bellforge/errors.hpp"
#include "bellforge/wigner.hpp"

using namespace bellforge;
using namespace bellforge::wigner;
using waves::Axis;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("Gaussian Wigner function is the analytic one") {
  const auto a = Axis::centered(256, 16.0);
  const double s = 0.8;
  const auto psi = waves::gaussian_packet({0.5, 1.0, s, 0.0, 1.0}, a);
  const auto w = wigner_transform(psi);
  CHECK(w.p_axes[0].spacing == doctest::Approx(0.5 * a.conjugate().spacing));
  double worst = 0.0;
  for (std::size_t j = 0; j < a.n; ++j)
    for (std::size_t m = 0; m < a.n; ++m) {
      const double q = w.q_axes[0].coordinate(j) - 0.5, p = w.p_axes[0].coordinate(m) - 1.0;
      const double ref = std::exp(-q * q / (2 * s * s) - 2 * s * s * p * p) / kPi;
      worst = std::max(worst, std::abs(w.at(j, m) - ref));
    }
  CHECK(worst < 1e-10);
  CHECK(w.total() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(w.min() >= -1e-8);
  for (const auto& e : marginal_errors(w, psi)) CHECK(e.max_error < 1e-5);
  const auto h = hudson_check(psi, w);
  CHECK(h.is_gaussian);
  CHECK(h.min_w >= -1e-8);
}

TEST_CASE("first excited state has W(0,0) = -1/pi") {
  const auto a = Axis::centered(256, 16.0);
  const auto psi = waves::oscillator_state(1, a);
  const auto w = wigner_transform(psi);
  CHECK(w.at(a.n / 2, a.n / 2) == doctest::Approx(-1.0 / kPi).epsilon(1e-4));
  CHECK(w.min() == doctest::Approx(-1.0 / kPi).epsilon(1e-4));
  for (const auto& e : marginal_errors(w, psi)) CHECK(e.max_error < 1e-5);
  const auto h = hudson_check(psi, w);
  CHECK_FALSE(h.is_gaussian);
  CHECK(h.min_w < -0.3);
}

TEST_CASE("non-Gaussian superposition has negative regions") {
  const auto a = Axis::centered(256, 20.0);
  const auto psi = waves::two_gaussian(a);
  const auto h = hudson_check(psi);
  CHECK_FALSE(h.is_gaussian);
  CHECK(h.min_w < -1e-3);
}

TEST_CASE("2-D Wigner marginals") {
  const auto a = Axis::centered(64, 8.0);
  const auto psi = waves::gaussian_2d({1.0, 0.4, 0.8, 0.2, -0.1, 0.3, 0.3, -0.2, 0.5, 0.0}, a, a);
  const auto w = wigner_transform(psi);
  REQUIRE(w.dim() == 2);
  CHECK(w.total() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(w.min() >= -1e-8);
  const auto errs = marginal_errors(w, psi);
  CHECK(errs.size() == 4);
  for (const auto& e : errs) {
    CHECK(e.max_error < 1e-5);
    MESSAGE(e.ccs << " " << e.max_error);
  }
}

TEST_CASE("TMSV Wigner function") {
  CHECK_THROWS_AS(maximize_chsh_parity({-1.0}, 1), InputError);
  CHECK(tmsv_wigner({0.0}, 0, 0, 0, 0) == doctest::Approx(1.0 / (kPi * kPi)));
  // Midpoint rule along the principal axes u = (q1+q2)/sqrt2, v = (q1-q2)/sqrt2
  // and likewise for p, with boxes matched to the squeezed widths.
  const TmsvParams p{1.0};
  const int n = 40;
  const double wide = 12.0, narrow = 3.0;
  const double hw = 2 * wide / n, hn = 2 * narrow / n;
  const double r2 = std::numbers::sqrt2 / 2;
  double total = 0.0, pos = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double u = -wide + (i + 0.5) * hw, v = -narrow + (j + 0.5) * hn;
          const double pu = -narrow + (k + 0.5) * hn, pv = -wide + (l + 0.5) * hw;
          const double v4 = tmsv_wigner(p, r2 * (u + v), r2 * (pu + pv), r2 * (u - v), r2 * (pu - pv));
          total += v4;
          pos = std::min(pos, v4);
        }
  const double h = std::sqrt(hw * hn);
  CHECK(total * h * h * h * h == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(pos >= 0.0);
  CHECK(parity_correlation(p, 0.0, 0.0) == doctest::Approx(1.0));
  // pi^2 W at q = sqrt2 Re a with equal real displacements.
  const double x = 0.3;
  const double ref = std::exp(-std::cosh(2.0) * 4 * x * x + 2 * std::sinh(2.0) * 2 * x * x);
  CHECK(parity_correlation(p, x, x) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("parity CHSH optimum, origin-anchored family") {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> rs{0.0, 0.5, 1.0, 2.0, 3.0};
  const std::vector<double> expect{2.0, 2.144420, 2.183900, 2.190428, 2.190549};
  double prev = 0.0;
  for (std::size_t k = 0; k < rs.size(); ++k) {
    const auto opt = maximize_chsh_parity({rs[k]}, 1);
    CHECK(opt.value == doctest::Approx(expect[k]).epsilon(2e-6));
    CHECK(opt.value >= prev - 1e-9);
    CHECK(opt.value >= opt.real_value - 1e-12);
    CHECK(chsh_parity({rs[k]}, opt.settings) == doctest::Approx(opt.value).epsilon(1e-12));
    if (rs[k] > 0.0) CHECK(std::abs(opt.settings.alpha) + std::abs(opt.settings.alpha_prime) > 0.0);
    prev = opt.value;
    MESSAGE("r=" << rs[k] << " S=" << opt.value);
  }
  CHECK(maximize_chsh_parity({0.0}, 1).value <= 2.0 + 1e-9);
  const auto again = maximize_chsh_parity({3.0}, 1);
  CHECK(again.value >= 2.15);
  CHECK(again.value <= 2.20);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 30.0);
}

TEST_CASE("parity CHSH with all displacements free exceeds the anchored value") {
  const auto gen = maximize_chsh_parity({3.0}, 1, ParityFamily::General);
  const auto anc = maximize_chsh_parity({3.0}, 1);
  CHECK(gen.family == ParityFamily::General);
  CHECK(gen.value > anc.value);
  CHECK(gen.value <= 2.0 * std::numbers::sqrt2);
  MESSAGE("general r=3 S=" << gen.value);
}
