#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fracgreen/greens.hpp"

using namespace fracgreen;

namespace {
const double kPi = std::numbers::pi;

// beta = gamma = 1/2, d = 1 from the Levy closed forms.
double levy_g1(double t, double r, double dx) {
  auto f = [&](double s) {
    const double heat = std::exp(-dx * dx / (4 * s)) / std::sqrt(4 * kPi * s);
    const double trans = s * std::pow(r, -1.5) * std::exp(-s * s / (4 * r)) / (2 * std::sqrt(kPi));
    const double exit = std::exp(-s * s / (4 * t)) / std::sqrt(kPi * t);
    return heat * trans * exit;
  };
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate(f);
}
}  // namespace

TEST_CASE("G1 against an independent Levy-form quadrature") {
  const MixedOrderParams mp{0.5, 0.5, 1};
  for (auto [t, r, dx] : {std::tuple{1.0, 1.0, 0.0}, {1.3, 0.7, 0.5}, {0.2, 3.0, 2.0}}) {
    const std::vector<double> x{0.0}, y{dx};
    const QuadResult g = greens_quadrature(mp, {}, t, r, x, y);
    CAPTURE(t);
    CAPTURE(r);
    CHECK(g.converged);
    CHECK(g.value() == doctest::Approx(levy_g1(t, r, dx)).epsilon(1e-8));
  }
}

TEST_CASE("scaling: G1 = prefactor * normalized(Omega, A)") {
  const MixedOrderParams mp{0.5, 0.8, 3};
  const std::vector<double> x{0.1, 0.0, -0.2}, y{0.4, 0.3, 0.5};
  for (double t : {0.3, 1.0, 4.0}) {
    const double r = 1.7;
    const ScalingCoordinates sc = scaling_coordinates(mp, t, r, x, y);
    const QuadResult g = greens_quadrature(mp, {}, t, r, x, y);
    const QuadResult n = greens_normalized(mp, {}, sc.omega, sc.cap_a);
    CAPTURE(t);
    CHECK(g.log_value == doctest::Approx(sc.log_prefactor + n.log_value).epsilon(1e-8));
  }
}

TEST_CASE("G1 is symmetric in x and y and translation invariant") {
  const MixedOrderParams mp{0.8, 0.3, 2};
  const std::vector<double> x{0.2, 1.0}, y{-0.3, 0.4};
  const std::vector<double> xs{1.2, 2.0}, ys{0.7, 1.4};
  const double a = greens_quadrature(mp, {}, 1.1, 0.6, x, y).log_value;
  CHECK(greens_quadrature(mp, {}, 1.1, 0.6, y, x).log_value == doctest::Approx(a).epsilon(1e-12));
  CHECK(greens_quadrature(mp, {}, 1.1, 0.6, xs, ys).log_value == doctest::Approx(a).epsilon(1e-10));
}

TEST_CASE("physical_point inverts the scaling coordinates") {
  const MixedOrderParams mp{0.5, 0.8, 2};
  const PhysicalPoint p = physical_point(mp, 3.0, 0.2);
  const ScalingCoordinates sc = scaling_coordinates(mp, 1.0, p.r, p.x, p.y);
  CHECK(sc.omega == doctest::Approx(3.0));
  CHECK(sc.cap_a == doctest::Approx(0.2));
  CHECK(sc.log_prefactor == 0.0);
}

TEST_CASE("comparator shape in Omega") {
  EnvelopeOptions opt;
  SUBCASE("d = 3: no Omega dependence below one") {
    const MixedOrderParams mp{0.5, 0.5, 3};
    CHECK(log_envelope_comparator(mp, unit_scaling(0.5, 2.0), opt) ==
          doctest::Approx(log_envelope_comparator(mp, unit_scaling(0.01, 2.0), opt)));
  }
  SUBCASE("d = 5: Omega^-1/2 near zero") {
    const MixedOrderParams mp{0.5, 0.5, 5};
    const double l1 = log_envelope_comparator(mp, unit_scaling(1e-4, 1.0), opt);
    const double l2 = log_envelope_comparator(mp, unit_scaling(1e-2, 1.0), opt);
    CHECK((l1 - l2) / std::log(1e-2) == doctest::Approx(-0.5));
  }
  SUBCASE("d = 4: log shape") {
    const MixedOrderParams mp{0.5, 0.5, 4};
    const double l = log_envelope_comparator(mp, unit_scaling(std::exp(-3.0), 1.0), opt);
    CHECK(l == doctest::Approx(std::log(4.0)));
  }
  SUBCASE("large Omega stretched exponent") {
    const MixedOrderParams mp{0.5, 0.5, 1};
    const EnvelopeExponents e = envelope_exponents(mp);
    const double om = 100.0;
    const double l = log_envelope_comparator(mp, unit_scaling(om, 1.0), opt);
    CHECK(l == doctest::Approx(e.n1 * std::log(om) - std::pow(om, 1.0 / 1.5)));
  }
  SUBCASE("inverse and direct A exponents differ") {
    const MixedOrderParams mp{0.5, 0.8, 1};
    EnvelopeOptions direct;
    direct.a_exponent = SmallOmegaExponent::direct;
    const ScalingCoordinates sc = unit_scaling(0.5, 10.0);
    CHECK(log_envelope_comparator(mp, sc, opt) == doctest::Approx((-1 - 1 / 0.8) * std::log(10.0)));
    CHECK(log_envelope_comparator(mp, sc, direct) == doctest::Approx((-1 - 0.8) * std::log(10.0)));
  }
}

TEST_CASE("normalized G1 over Omega x A has a finite ratio to the comparator") {
  const MixedOrderParams mp{0.5, 0.5, 1};
  const auto sweep = envelope_ratio_sweep(mp, {}, log_grid(1e-3, 1e3, 5), log_grid(1e-2, 1e2, 5), {}, 1);
  CHECK(sweep.summary.points == 25);
  CHECK(sweep.summary.failures == 0);
  CHECK(std::isfinite(sweep.summary.log_spread()));
  for (const auto& p : sweep.points) CHECK(std::isfinite(p.log_ratio()));
}

TEST_CASE("component indicators") {
  const MixedOrderParams mp{0.5, 0.8, 1};
  for (double om : {0.1, 10.0}) {
    const auto lo = component_integrals(mp, unit_scaling(om, 0.3), {});
    CHECK(lo.i3.log_value == -INFINITY);
    CHECK(std::isfinite(lo.i2.log_value));
    const auto hi = component_integrals(mp, unit_scaling(om, 3.0), {});
    CHECK(hi.i2.log_value == -INFINITY);
    CHECK(std::isfinite(hi.i3.log_value));
  }
}

TEST_CASE("ordering on the small-Omega, large-A quadrant") {
  const MixedOrderParams mp{0.5, 0.5, 1};
  const OrderingReport rep = ordering_constants(mp, {}, log_grid(1e-3, 1.0, 4), log_grid(2.0, 1e2, 4), 1);
  CHECK(rep.points[1] == 16);
  CHECK(rep.log_c[1] < std::log(10.0));
}

TEST_CASE("k-dim quadrature reduces to G1 at k = 2") {
  for (auto [b, g] : {std::pair{0.5, 0.5}, {0.5, 0.8}, {0.8, 0.3}}) {
    KDimParams kp;
    kp.orders = {b, g};
    kp.levels = {0.9};
    kp.dimension = 2;
    const MixedOrderParams mp{b, g, 2};
    const std::vector<double> x{0.0, 0.1}, y{0.3, -0.2};
    const double a = kdim_greens_quadrature(kp, {}, 1.4, x, y).value();
    const double ref = greens_quadrature(mp, {}, 1.4, 0.9, x, y).value();
    CHECK(a == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("k = 3 conjecture experiment is finite") {
  KDimParams kp;
  kp.orders = {0.5, 0.5, 0.5};
  kp.levels = {1.0, 1.0};
  const ConjectureSummary s = conjecture_experiment(kp, {}, log_grid(1e-2, 1e2, 3), log_grid(1e-2, 1e2, 3), 1);
  CHECK(s.points.size() == 9);
  CHECK(s.finite);
}

TEST_CASE("input validation") {
  const MixedOrderParams bad{1.0, 0.5, 1};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  const MixedOrderParams mp{0.5, 0.5, 4};
  const std::vector<double> o(4, 0.0);
  CHECK_THROWS_AS(greens_quadrature(mp, {}, 1.0, 1.0, o, o), std::invalid_argument);
  const std::vector<double> short_pt{0.0};
  CHECK_THROWS_AS(greens_quadrature(mp, {}, 1.0, 1.0, short_pt, o), std::invalid_argument);
  CHECK_THROWS_AS(unit_scaling(-1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 3), std::invalid_argument);
}
