#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fracgreen/quadrature.hpp"

using namespace fracgreen;

TEST_CASE("finite interval against closed forms") {
  const Estimate e = integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, {});
  CHECK(e.value == doctest::Approx(2.0).epsilon(1e-12));

  const QuadResult r = integrate_log([](double x) { return -x * x; }, -10.0, 10.0, {});
  CHECK(r.converged);
  CHECK(r.value() == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-10));
}

TEST_CASE("half line in log form") {
  // int_0^inf x^(s-1) e^-x = Gamma(s)
  for (double s : {0.3, 1.0, 2.5, 7.0}) {
    const QuadResult r = integrate_log_halfline([&](double x) { return (s - 1) * std::log(x) - x; }, {});
    CHECK(r.log_value == doctest::Approx(std::lgamma(s)).epsilon(1e-9));
  }
  // values far below double range stay finite in log form
  const QuadResult tiny = integrate_log_halfline([](double x) { return -1000.0 - x; }, {});
  CHECK(tiny.log_value == doctest::Approx(-1000.0).epsilon(1e-10));
  CHECK(tiny.underflow());
}

TEST_CASE("endpoint singularity") {
  const QuadResult r = integrate_log([](double x) { return -0.5 * std::log(x); }, 0.0, 1.0, {});
  CHECK(r.value() == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("log_add") {
  CHECK(log_add(std::log(2.0), std::log(3.0)) == doctest::Approx(std::log(5.0)));
  CHECK(log_add(-INFINITY, 1.5) == 1.5);
  CHECK(log_add(-800.0, -800.0) == doctest::Approx(-800.0 + std::log(2.0)));
}

TEST_CASE("config validation") {
  QuadratureConfig qc;
  qc.rel_tol = -1.0;
  CHECK_THROWS_AS(qc.validate(), std::invalid_argument);
  QuadratureConfig ok;
  CHECK_NOTHROW(ok.validate());
}
