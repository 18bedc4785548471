#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "fracgreen/densities.hpp"
#include "fracgreen/simulate.hpp"

using namespace fracgreen;

namespace {
std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("stable increments have Laplace transform exp(-dt lambda^alpha)") {
  for (double a : {0.3, 0.5, 0.8}) {
    Rng rng = path_rng(1, 0);
    const int n = 200000;
    const double dt = 0.7, lam = 1.3;
    double m = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = std::exp(-lam * sample_stable_increment(a, dt, rng));
      m += v;
      m2 += v * v;
    }
    m /= n;
    const double se = std::sqrt((m2 / n - m * m) / n);
    CAPTURE(a);
    CHECK(std::abs(m - std::exp(-dt * std::pow(lam, a))) < 4.0 * se);
  }
}

TEST_CASE("alpha = 1/2 increments follow the Levy law (KS)") {
  Rng rng = path_rng(2, 0);
  std::vector<double> xs(50000);
  for (double& x : xs) x = sample_stable_increment(0.5, 1.0, rng);
  // P[S <= x] = erfc(1 / (2 sqrt x))
  const double ks = ks_statistic(xs, [](double x) { return std::erfc(0.5 / std::sqrt(x)); });
  CHECK(ks < 1.63 / std::sqrt(50000.0));
}

TEST_CASE("streams are deterministic and distinct") {
  Rng a = path_rng(5, 3), b = path_rng(5, 3), c = path_rng(5, 4);
  const auto x = a(), y = b(), z = c();
  CHECK(x == y);
  CHECK(x != z);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform_open(a);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("a path is monotone and ends with exactly one zero") {
  OrthantParams op;
  op.orders = {0.8, 0.8};
  op.starts = {1000.0, 1000.0};
  op.seed = 4;
  const PathSample ps = sample_path(op, 0);
  REQUIRE_FALSE(ps.censored);
  REQUIRE(ps.levels.size() == 2);
  for (const auto& lv : ps.levels) {
    for (std::size_t n = 1; n < lv.size(); ++n) CHECK(lv[n] <= lv[n - 1]);
  }
  int zeros = 0;
  for (double v : ps.exit_location) zeros += v == 0.0;
  CHECK(zeros == 1);
  CHECK(ps.exit_location[static_cast<std::size_t>(ps.exit_index)] == 0.0);
  CHECK(ps.exit_lower < ps.exit_upper);
}

TEST_CASE("simulate_exit and sample_path agree on the same stream") {
  OrthantParams op;
  op.orders = {0.5, 0.7, 0.9};
  op.starts = {1.0, 2.0, 1.5};
  op.seed = 9;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const ExitEvent ev = simulate_exit(op, i);
    const PathSample ps = sample_path(op, i);
    CHECK(ev.index == ps.exit_index);
    CHECK(ev.upper == doctest::Approx(ps.exit_upper));
    CHECK(ev.time >= ev.lower);
    CHECK(ev.time <= ev.upper);
  }
}

TEST_CASE("step budget censors") {
  OrthantParams op;
  op.orders = {0.5};
  op.starts = {1e6};
  op.step = 1e-6;
  op.max_steps = 10;
  const ExitEvent ev = simulate_exit(op, 0);
  CHECK(ev.censored);
  CHECK(ev.index == -1);
}

TEST_CASE("CSV round trip") {
  OrthantParams op;
  op.orders = {0.6, 0.9};
  op.starts = {1.0, 1.0};
  op.seed = 1;
  const PathSample ps = sample_path(op, 2);
  const std::string path = temp_path("fracgreen_path_rt.csv");
  export_path_csv(ps, path);
  const PathSample back = read_path_csv(path);
  CHECK(back.times == ps.times);
  CHECK(back.levels == ps.levels);
  CHECK(back.exit_index == ps.exit_index);
  CHECK(back.exit_lower == ps.exit_lower);
  CHECK(back.exit_upper == ps.exit_upper);
  CHECK(back.exit_location == ps.exit_location);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == path_csv_header(2));
  std::remove(path.c_str());
}

TEST_CASE("CSV round trip of a single-row path") {
  PathSample ps;
  ps.times = {0.0};
  ps.levels = {{0.0}, {2.5}};
  ps.exit_index = 0;
  ps.exit_location = {0.0, 2.5};
  const std::string path = temp_path("fracgreen_path_one.csv");
  export_path_csv(ps, path);
  const PathSample back = read_path_csv(path);
  CHECK(back.times == ps.times);
  CHECK(back.levels == ps.levels);
  CHECK(back.exit_index == 0);
  std::remove(path.c_str());
}

TEST_CASE("CSV errors") {
  CHECK_THROWS(read_path_csv(temp_path("fracgreen_does_not_exist.csv")));
  PathSample ps;
  ps.times = {0.0};
  ps.levels = {{1.0}};
  CHECK_THROWS(export_path_csv(ps, "/nonexistent-dir/x.csv"));
}

TEST_CASE("ruin probability for one alpha = 1/2 coordinate") {
  OrthantParams op;
  op.orders = {0.5};
  op.starts = {1.0};
  op.seed = 3;
  const RuinEstimate r = estimate_ruin_probability(op, 2.0, 5000, 1);
  // P[tau <= 2] = erf(1)
  CHECK(std::abs(r.estimate - std::erf(1.0)) < 4.0 * r.std_error + 0.01);
  const RuinEstimate again = estimate_ruin_probability(op, 2.0, 5000, 2);
  CHECK(again.estimate == r.estimate);
}

TEST_CASE("exit density estimate is close to the quadrature law") {
  const ExitDensityEstimate e = estimate_exit_density(0.5, 1.0, 5000, 1e-2, 1, 30, 1);
  CHECK(e.censored == 0);
  CHECK(e.samples.size() == 5000);
  CHECK(e.ks_distance < 0.04);
  const auto cdf = tabulated_exit_cdf(0.5, 1.0, 1e-3, 50.0);
  CHECK(cdf(1.0) == doctest::Approx(exit_time_cdf({0.5, 1.0}, 1.0)).epsilon(1e-5));
}

TEST_CASE("KS helpers") {
  std::vector<double> a{0.1, 0.2, 0.3}, b{0.1, 0.2, 0.3};
  CHECK(ks_two_sample(a, b) == 0.0);
  std::vector<double> c{5.0, 6.0};
  CHECK(ks_two_sample(a, c) == 1.0);
  CHECK(ks_two_sample_critical(100, 100, 0.05) == doctest::Approx(1.358 * std::sqrt(2.0 / 100)).epsilon(1e-3));
}

TEST_CASE("compensated sum and chunking") {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 10; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 10.0);
  std::vector<long long> seen(10, 0);
  for_each_chunk(10, 3, 2, [&](long long f, long long l, std::size_t) {
    for (long long i = f; i < l; ++i) ++seen[static_cast<std::size_t>(i)];
  });
  CHECK(std::accumulate(seen.begin(), seen.end(), 0LL) == 10);
}

TEST_CASE("orthant validation") {
  OrthantParams op;
  op.orders = {0.5, 1.5};
  op.starts = {1.0, 1.0};
  CHECK_THROWS_AS(op.validate(), std::invalid_argument);
  op.orders = {0.5};
  CHECK_THROWS_AS(op.validate(), std::invalid_argument);
}
