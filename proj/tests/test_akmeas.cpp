#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>

#include "bellforge/akmeas.hpp"
#include "bellforge/errors.hpp"

using namespace bellforge;
using namespace bellforge::akmeas;
using waves::Axis;

namespace {

Axis matched_axis(std::size_t n) { return Axis::centered(n, std::sqrt(std::numbers::pi * n / 2.0)); }

// Slope of argmax_x2 P(x1, x2) in x1 for a free Gaussian (m = 1) read out with
// width b: with A = 1/(4 s^2 + 2 i t), c = 1/(4 b^2) and K = 1/(4 (A + c)) the
// log-density has the x2 terms -2 Re K x2^2 + 8 c Im K x1 x2.
double ak_slope(double s, double t, double b) {
  const std::complex<double> A = 1.0 / std::complex<double>(4 * s * s, 2 * t);
  const double c = 1.0 / (4 * b * b);
  const auto K = 1.0 / (4.0 * (A + c));
  return 2.0 * c * K.imag() / K.real();
}

}  // namespace

TEST_CASE("window and grid checks") {
  const auto a = Axis::centered(256, 16.0);
  const auto psi = waves::gaussian_packet({0.0, 0.0, 1.0, 0.0, 1.0}, a);
  CHECK_THROWS_AS(ak_distribution(psi, {0.0}), InputError);
  CHECK_THROWS_AS(ak_distribution(psi, {5.0}), TruncationError);
  CHECK_THROWS_AS(ak_distribution(psi, {0.05}), TruncationError);
  const auto d = ak_distribution(psi, {1.0});
  CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : d.values) CHECK(v >= 0.0);
}

TEST_CASE("readout variances add the apparatus width") {
  const auto a = matched_axis(1024);
  for (double s : {0.5, 1.0, 2.0})
    for (double b : {0.2, 1.0}) {
      const auto psi = waves::gaussian_packet({0.0, 0.0, s, 0.0, 1.0}, a);
      const auto v = ak_variances(psi, {b});
      const double want1 = s * s + b * b, want2 = 1.0 / (4 * s * s) + 1.0 / (4 * b * b);
      CHECK(std::abs(v.var_x1 / want1 - 1.0) < 1e-2);
      CHECK(std::abs(v.var_x2 / want2 - 1.0) < 1e-2);
      CHECK(std::abs(v.residual_x1) < 1e-6 * want1);
      CHECK(std::abs(v.residual_x2) < 1e-6 * want2);
    }
}

TEST_CASE("variance relation for a non-Gaussian state") {
  const auto a = matched_axis(1024);
  const auto psi = waves::two_gaussian(a);
  const auto v = ak_variances(psi, {0.7});
  CHECK(std::abs(v.residual_x1) < 1e-6);
  CHECK(std::abs(v.residual_x2) < 1e-6);
}

TEST_CASE("momentum peaks of a spreading Gaussian are linear in q") {
  const auto a = matched_axis(2048);
  const double s = 1.0, t = 1.0, b = 1.0;
  const auto psi = waves::gaussian_packet({0.0, 0.0, s, t, 1.0}, a);
  const auto table = momentum_peaks(psi, {b}, +1);
  REQUIRE(table.rows.size() > 50);
  for (const auto& r : table.rows) CHECK_FALSE(r.flagged);
  CHECK(table.ak_fit.max_residual < 1e-3);
  CHECK(table.rs_fit.max_residual < 1e-3);
  CHECK(table.ak_fit.slope == doctest::Approx(ak_slope(s, t, b)).epsilon(1e-4));
  const double width = std::sqrt(s * s + t * t / (4 * s * s));
  CHECK(table.rs_fit.slope == doctest::Approx(1.0 / (2 * s * width)).epsilon(1e-4));
  CHECK(std::abs(table.ak_fit.slope - table.rs_fit.slope) > 0.05);
  CHECK_FALSE(table.warnings.empty());

  const auto down = momentum_peaks(psi, {b}, -1);
  CHECK(down.rs_fit.slope == doctest::Approx(-table.rs_fit.slope).epsilon(1e-6));
  CHECK(down.ak_fit.slope == doctest::Approx(table.ak_fit.slope).epsilon(1e-12));
}

TEST_CASE("regime warnings") {
  CHECK(regime_warnings(100.0, 100.0, 1.0).empty());
  CHECK(regime_warnings(1.0, 0.5, 1.0).size() == 3);
  CHECK(regime_warnings(100.0, 100.0, 20.0).size() == 1);
}

TEST_CASE("line fit") {
  const auto f = fit_line({0.0, 1.0, 2.0}, {1.0, 3.0, 5.0});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.max_residual < 1e-12);
  CHECK_THROWS_AS(fit_line({1.0}, {1.0}), InputError);
}
