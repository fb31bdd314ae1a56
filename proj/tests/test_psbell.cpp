#include "doctest.h"

#include <cmath>
#include <numbers>

#include "bellforge/errors.hpp"
#include "bellforge/psbell.hpp"
#include "oracle.hpp"

using namespace bellforge;
using namespace bellforge::psbell;
using waves::Axis;

TEST_CASE("overlap oracle reproduces the frozen high-precision values") {
  CHECK(oracle::hilbert_overlap(10.0) == doctest::Approx(1.17404412467208).epsilon(1e-11));
  CHECK(oracle::hilbert_overlap(100.0) == doctest::Approx(1.39291318424853).epsilon(1e-11));
  CHECK(oracle::hilbert_overlap(1000.0) == doctest::Approx(1.54827020224582).epsilon(1e-11));
  CHECK(oracle::hilbert_overlap(10000.0) == doctest::Approx(1.64951973750217).epsilon(1e-11));
}

TEST_CASE("quadrant correlator") {
  const auto a = Axis::centered(64, 6.0);
  waves::Density even{{a, a}, std::vector<double>(64 * 64, 0.0)};
  waves::Density diag = even;
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < 64; ++j) {
      const double x = a.coordinate(i), y = a.coordinate(j);
      even.values[i * 64 + j] = std::exp(-x * x - (y - 0.7) * (y - 0.7) - 0.3 * y);
      if (x * y > 0.0) diag.values[i * 64 + j] = std::exp(-(x - y) * (x - y) - 0.1 * (x + y) * (x + y));
    }
  auto unit = [](waves::Density d) {
    const double t = d.total();
    for (auto& v : d.values) v /= t;
    return d;
  };
  even = unit(even);
  diag = unit(diag);
  CHECK(std::abs(quadrant_correlator(even)) < 1e-9);
  CHECK(quadrant_correlator(diag) == doctest::Approx(1.0).epsilon(1e-12));
  SUBCASE("sign patterns") {
    SignPattern flipped{{0.0}, +1};
    CHECK(quadrant_correlator(diag, flipped) == doctest::Approx(-1.0).epsilon(1e-12));
    SignPattern two{{-1.0, 1.0}, +1};
    CHECK(two(-2.0) == 1.0);
    CHECK(two(0.0) == -1.0);
    CHECK(two(3.0) == 1.0);
    CHECK(two(1.0) == 0.0);
  }
}

TEST_CASE("four densities of a product of self-dual Gaussians share their moments") {
  const auto a = Axis::centered(128, 12.0);
  const auto g = waves::gaussian_packet({0.0, 0.0, 1.0 / std::numbers::sqrt2, 0.0, 1.0}, a);
  const auto qd = quad_densities(waves::product(g, g));
  for (const auto* d : {&qd.qq, &qd.qp, &qd.pq, &qd.pp}) {
    CHECK(d->total() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(waves::moments(*d, 0).variance == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(waves::moments(*d, 1).variance == doctest::Approx(0.5).epsilon(1e-9));
  }
  CHECK(std::abs(s_functional(qd)) < 1e-12);
  CHECK(qd.consistency_error() < 1e-12);
}

TEST_CASE("odd first factor puts a node line at q1 = 0") {
  const auto a = Axis::centered(128, 12.0);
  const auto qd = quad_densities(waves::product(waves::oscillator_state(1, a), waves::oscillator_state(0, a)));
  for (std::size_t j = 0; j < a.n; ++j) CHECK(qd.qq.at(a.n / 2, j) < 1e-30);
}

TEST_CASE("Gaussian pure states respect |S| <= 2") {
  const auto a = Axis::centered(128, 14.0);
  for (const waves::Gaussian2d g :
       {waves::Gaussian2d{1.0, 0.9, 1.0, 0.0, 0.0, 0.0}, waves::Gaussian2d{2.0, -1.2, 1.0, 0.5, 0.3, -0.2},
        waves::Gaussian2d{0.6, 0.5, 0.6, -0.4, 0.4, -0.4, 0.3, -0.2}}) {
    const auto qd = quad_densities(waves::gaussian_2d(g, a, a));
    CHECK(std::abs(s_functional(qd)) <= 2.0 + 1e-6);
    CHECK(qd.consistency_error() < 1e-4);
  }
}

TEST_CASE("grid and separable routes agree for psi+-") {
  const auto a = Axis::centered(256, 24.0);
  for (auto sign : {waves::MarginalSign::Plus, waves::MarginalSign::Minus}) {
    const auto grid = quad_densities(waves::psi_marginal_state(sign, 10.0, a, a));
    const auto sep = correlators(waves::psi_marginal_separable(sign, 10.0, a));
    const auto c = correlators(grid);
    CHECK(std::abs(c.qq - sep.qq) < 1e-10);
    CHECK(std::abs(c.qp - sep.qp) < 1e-10);
    CHECK(std::abs(c.pq - sep.pq) < 1e-10);
    CHECK(std::abs(c.pp - sep.pp) < 1e-10);
    CHECK(grid.qq.total() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(grid.pp.total() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(grid.consistency_error() < 1e-4);
    const double e_qp = quadrant_correlator(grid.qp);
    if (sign == waves::MarginalSign::Plus) {
      CHECK(e_qp > 0.0);
      CHECK(e_qp < 1.0);
    }
  }
}

TEST_CASE("sweep matches the quadrature oracle") {
  const auto rep = marginal_theorem_demo({10.0, 100.0, 1000.0, 10000.0});
  REQUIRE(rep.rows.size() == 4);
  for (const auto& r : rep.rows) {
    const double ref = oracle::marginal_s(r.L);
    CHECK(r.s_plus == doctest::Approx(ref).epsilon(5e-4));
    CHECK(std::abs(r.s_plus + r.s_minus) < 1e-6);
    CHECK(r.s_plus <= 2.0 * std::numbers::sqrt2 + 1e-6);
    MESSAGE("L=" << r.L << " S=" << r.s_plus << " oracle=" << ref);
  }
  CHECK(rep.monotone);
  REQUIRE(rep.exceeds_2_at.has_value());
  CHECK(*rep.exceeds_2_at == 100.0);
  REQUIRE(rep.extrapolated_limit.has_value());
  CHECK(std::abs(*rep.extrapolated_limit / (2.0 * std::numbers::sqrt2) - 1.0) < 0.05);
  CHECK(rep.fit_degree == 2);
}

TEST_CASE("sweep is stable under grid refinement") {
  for (double L : {10.0, 100.0}) {
    const auto coarse = marginal_theorem_demo({L}, {std::size_t{1} << 20, 32.0});
    const auto fine = marginal_theorem_demo({L}, {std::size_t{1} << 21, 32.0});
    CHECK(std::abs(coarse.rows[0].s_plus - fine.rows[0].s_plus) < 1e-3);
  }
}

TEST_CASE("sweep input checks") {
  CHECK_THROWS_AS(marginal_theorem_demo({10.0, -1.0}), DomainError);
  CHECK_THROWS_AS(marginal_theorem_demo({10.0}, {1024, 1.0}), DomainError);
  CHECK_THROWS_AS(marginal_theorem_demo({}), InputError);
  const auto two = marginal_theorem_demo({100.0, 10.0}, {std::size_t{1} << 18, 32.0});
  CHECK(two.rows[0].L == 10.0);
  CHECK(two.fit_degree == 1);
}

TEST_CASE("polyfit recovers an exact quadratic") {
  const auto c = polyfit({0.0, 1.0, 2.0, 3.0}, {1.0, 2.0, 5.0, 10.0}, 2);
  CHECK(c[0] == doctest::Approx(1.0));
  CHECK(c[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(c[2] == doctest::Approx(1.0));
}
