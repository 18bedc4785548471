#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "fracgreen/special_functions.hpp"

using namespace fracgreen;

namespace {
double levy(double r) {
  return std::exp(-1.0 / (4.0 * r)) / (2.0 * std::sqrt(std::numbers::pi) * std::pow(r, 1.5));
}
}  // namespace

TEST_CASE("alpha = 1/2 density matches the Levy form") {
  const StableParams sp = default_stable_params(0.5);
  for (double r : {1e-3, 0.02, 0.3, 1.0, 4.0, 50.0, 1e4}) {
    CAPTURE(r);
    CHECK(stable_density(sp, r) == doctest::Approx(levy(r)).epsilon(1e-8));
  }
  CHECK(stable_density(sp, 1.0) == doctest::Approx(0.21970).epsilon(1e-4));
}

TEST_CASE("integral and series representations agree where both converge") {
  for (double a : {0.3, 0.5, 0.8}) {
    for (double r : {2.0, 5.0, 20.0}) {
      CAPTURE(a);
      CAPTURE(r);
      CHECK(log_stable_density_integral(a, r) ==
            doctest::Approx(log_stable_density_series(a, r)).epsilon(1e-8));
    }
  }
}

TEST_CASE("density integrates to one and has Laplace transform exp(-lambda^alpha)") {
  boost::math::quadrature::exp_sinh<double> q;
  for (double a : {0.3, 0.5, 0.8, 0.95}) {
    const auto w = stable_density_table(a);
    CAPTURE(a);
    CHECK(q.integrate([&](double r) { return (*w)(r); }) == doctest::Approx(1.0).epsilon(1e-6));
    for (double lam : {0.5, 2.0}) {
      const double lt = q.integrate([&](double r) { return std::exp(-lam * r) * (*w)(r); });
      CHECK(lt == doctest::Approx(std::exp(-std::pow(lam, a))).epsilon(1e-6));
    }
  }
}

TEST_CASE("small-r saddle and tail asymptotics") {
  for (double a : {0.3, 0.5, 0.8}) {
    const StableParams sp = default_stable_params(a);
    const SaddleConstants sc = saddle_constants(a);
    CAPTURE(a);
    const double r_small = std::pow(10.0, -1.0 / (1.0 - a));
    CHECK(std::exp(log_stable_density(sp, r_small) - log_stable_density_small_asymptote(sc, r_small)) ==
          doctest::Approx(1.0).epsilon(0.05));
    const double r_big = 1e6;
    const double tail = tail_constant(a) * std::pow(r_big, -1.0 - a);
    // next series term is relatively O(r^-alpha)
    CHECK(stable_density(sp, r_big) / tail == doctest::Approx(1.0).epsilon(2.0 * std::pow(r_big, -a)));
  }
  CHECK(tail_constant(0.5) == doctest::Approx(0.5 / std::sqrt(std::numbers::pi)));
}

TEST_CASE("log density is continuous across the handoff radii") {
  for (double a : {0.1, 0.3, 0.5, 0.8, 0.95}) {
    const StableParams sp = default_stable_params(a);
    for (double r : {sp.switch_radius, sp.tail_radius}) {
      const double lo = log_stable_density(sp, r * (1 - 1e-9));
      const double hi = log_stable_density(sp, r * (1 + 1e-9));
      CAPTURE(a);
      CAPTURE(r);
      CHECK(std::abs(lo - hi) < 2e-6 * std::max(1.0, std::abs(lo)));
    }
  }
}

TEST_CASE("stable params validation") {
  StableParams sp;
  sp.alpha = 1.2;
  CHECK_THROWS_AS(sp.validate(), std::invalid_argument);
  CHECK_THROWS(saddle_constants(0.0));
}

TEST_CASE("upper incomplete gamma") {
  CHECK(upper_incomplete_gamma(1.0, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  for (double s : {0.5, 2.0, 3.7}) {
    for (double A : {0.1, 1.0, 10.0, 200.0}) {
      CAPTURE(s);
      CAPTURE(A);
      const double ref = std::log(boost::math::tgamma(s, A));
      CHECK(log_upper_incomplete_gamma(s, A) == doctest::Approx(ref).epsilon(1e-10));
    }
  }
  // large-A asymptote A^(s-1) e^-A
  const double A = 1e4;
  CHECK(std::exp(log_upper_incomplete_gamma(2.5, A) - 1.5 * std::log(A) + A) ==
        doctest::Approx(1.0).epsilon(2e-4));
}

TEST_CASE("Laplace method asymptotes") {
  // int_0^inf e^{-A x} dx = 1/A : boundary minimum with g = 1, h(0)=0, h'=1
  CHECK(laplace_boundary_asymptote(1.0, 0.0, 1.0, 50.0) == doctest::Approx(1.0 / 50.0));
  // int e^{-A x^2/2} = sqrt(2 pi / A)
  CHECK(laplace_interior_asymptote(1.0, 0.0, 1.0, 50.0) ==
        doctest::Approx(std::sqrt(2.0 * std::numbers::pi / 50.0)));
}

TEST_CASE("one-barrier problem approaches its asymptote") {
  for (auto [a, N, c] : {std::tuple{2.0, 0.0, 1.0}, {4.0, 1.0, 0.5}, {1.5, -0.5, 2.0}}) {
    LaplaceProblem lp;
    lp.barrier_power = a;
    lp.integrand_power = N;
    lp.barrier_coeff = c;
    double prev = INFINITY;
    for (double om : {1e2, 1e3, 1e4}) {
      lp.large_parameter = om;
      const QuadResult q = laplace_problem_quadrature(lp, {});
      const double err = std::abs(q.log_value - log_one_barrier_asymptote(a, N, c, om));
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < std::log(1.05));
  }
}

TEST_CASE("two-barrier asymptote without the second barrier") {
  LaplaceProblem lp;
  lp.form = LaplaceProblem::Form::two_barrier;
  lp.barrier_power = 2.0;
  lp.integrand_power = 0.0;
  lp.scale = 1.0;
  lp.large_parameter = 1e4;
  const QuadResult q = laplace_problem_quadrature(lp, {});
  CHECK(std::abs(q.log_value - log_two_barrier_asymptote(lp)) < 0.02);
}

TEST_CASE("two-barrier asymptote is only a shape when both barriers act") {
  // a = 4, b = 2, A = 1: the quadrature falls further below the formula as Omega grows
  LaplaceProblem lp;
  lp.form = LaplaceProblem::Form::two_barrier;
  lp.barrier_power = 4.0;
  lp.second_barrier_power = 2.0;
  double prev = 0.0;
  for (double om : {1e2, 1e3, 1e4}) {
    lp.large_parameter = om;
    const double lr = laplace_problem_quadrature(lp, {}).log_value - log_two_barrier_asymptote(lp);
    CHECK(lr < prev);
    prev = lr;
  }
  CHECK(prev < -100.0);
  // without the second barrier the same a converges
  lp.second_barrier_power = 0.0;
  lp.scale = 100.0;
  CHECK(std::abs(laplace_problem_quadrature(lp, {}).log_value - log_two_barrier_asymptote(lp)) < 0.01);
}
