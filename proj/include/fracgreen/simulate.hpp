#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace fracgreen {

using Rng = std::mt19937_64;

/// Independent stream for path `index` under master `seed` (SplitMix64 mix of
/// both). Streams do not depend on scheduling, so runs are reproducible.
Rng path_rng(std::uint64_t seed, std::uint64_t index);

/// Uniform on the open interval (0, 1), built from the top 53 bits.
double uniform_open(Rng& rng);

/// Positive stable variate with E exp(-lambda S) = exp(-dt lambda^alpha)
/// (Kanter's representation: one uniform angle, one exponential).
double sample_stable_increment(double alpha, double dt, Rng& rng);

/// Vector of independent decreasing stable coordinates started at `starts`.
struct OrthantParams {
  std::vector<double> orders;
  std::vector<double> starts;
  /// Operational-time step; 0 selects 1e-3 * min_i start_i^order_i.
  double step = 0.0;
  std::uint64_t seed = 0;
  /// Path budget in steps; exceeding it yields a censored sample.
  long long max_steps = 100'000'000;

  int k() const { return static_cast<int>(orders.size()); }
  double effective_step() const;
  void validate() const;
};

/// One simulated path on the grid s_n = n * step.
struct PathSample {
  std::vector<double> times;
  /// levels[i][n] is coordinate i at times[n]; nonincreasing, clipped at 0.
  std::vector<std::vector<double>> levels;
  double exit_lower = 0.0;
  double exit_upper = 0.0;
  /// 0-based coordinate that reached zero first; -1 if censored.
  int exit_index = -1;
  /// Levels of all coordinates in the last row (the exiting one is 0).
  std::vector<double> exit_location;
  bool censored = false;
};

/// First exit of the orthant without storing the path.
struct ExitEvent {
  double lower = 0.0;
  double upper = 0.0;
  /// Crossing time from linear interpolation inside the last step.
  double time = 0.0;
  int index = -1;
  std::vector<double> location;
  bool censored = false;
};

/// When several coordinates cross zero in the same step, the one whose
/// linearly interpolated crossing comes first exits; the others are reported
/// at their interpolated level at that instant (hence positive).
ExitEvent simulate_exit(const OrthantParams& op, std::uint64_t path_index,
                        double horizon = std::numeric_limits<double>::infinity());
PathSample sample_path(const OrthantParams& op, std::uint64_t path_index = 0);

/// Kolmogorov-Smirnov distance of a sample (sorted in place) to a CDF.
double ks_statistic(std::vector<double>& sample, const std::function<double(double)>& cdf);
/// Two-sample KS distance; both samples are sorted in place.
double ks_two_sample(std::vector<double>& a, std::vector<double>& b);
/// Critical value of the two-sample test at level `level` (0.01 or 0.05).
double ks_two_sample_critical(std::size_t n, std::size_t m, double level = 0.01);

struct ExitDensityEstimate {
  double alpha = 0.5;
  double t = 1.0;
  double step = 0.0;
  std::uint64_t seed = 0;
  long long n_paths = 0;
  long long censored = 0;
  /// Bracket midpoints, sorted.
  std::vector<double> samples;
  std::vector<double> bin_edges;
  std::vector<double> bin_density;
  double ks_distance = 0.0;
  double mean_bracket = 0.0;
};

/// Histogram of the absorption time of one coordinate and its KS distance to
/// exit_time_cdf (tabulated on a fine log grid and interpolated).
ExitDensityEstimate estimate_exit_density(double alpha, double t, long long n_paths,
                                          double step, std::uint64_t seed, int bins = 60,
                                          int threads = 0);

/// Exact CDF interpolant used by estimate_exit_density, valid on [lo, hi].
std::function<double(double)> tabulated_exit_cdf(double alpha, double t, double lo,
                                                  double hi, int points = 4000);

struct RuinEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  long long n_paths = 0;
  std::uint64_t seed = 0;
  long long censored_count = 0;
};

/// Fraction of paths with min_i tau_i <= T, judged by the interpolated
/// crossing time. Paths are spread over `threads` workers in fixed chunks.
RuinEstimate estimate_ruin_probability(const OrthantParams& op, double horizon,
                                       long long n_paths, int threads = 0);

/// CSV schema: header "s,x1,...,xk", one row per grid time.
std::string path_csv_header(int k);
void export_path_csv(const PathSample& ps, const std::string& path);
/// Inverse of export_path_csv; bracket, exit index and location are
/// recovered from the last two rows.
PathSample read_path_csv(const std::string& path);

/// Runs body(first, last) over [0, n) in chunks of `chunk`, chunk c going to
/// results slot c; results are therefore independent of the thread count.
void for_each_chunk(long long n, long long chunk, int threads,
                    const std::function<void(long long, long long, std::size_t)>& body);

/// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double v);
  double value() const { return sum + c; }
};

}  // namespace fracgreen
