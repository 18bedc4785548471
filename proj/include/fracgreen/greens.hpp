#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fracgreen/densities.hpp"
#include "fracgreen/quadrature.hpp"

namespace fracgreen {

/// Orders of the two boundary coordinates: beta on t1, gamma on t2.
struct MixedOrderParams {
  double beta = 0.5;
  double gamma = 0.5;
  int dimension = 1;

  double alpha_min() const { return beta < gamma ? beta : gamma; }
  double alpha_max() const { return beta < gamma ? gamma : beta; }
  void validate() const;
};

/// Omega = |x-y|^2 t^-beta, A = r^gamma t^-beta, prefactor t^(-beta/gamma - d beta/2).
struct ScalingCoordinates {
  double omega = 0.0;
  double cap_a = 1.0;
  double t = 1.0;
  double log_prefactor = 0.0;

  double prefactor() const;
  void validate() const;
};

ScalingCoordinates scaling_coordinates(const MixedOrderParams& mp, double t, double r,
                                       std::span<const double> x,
                                       std::span<const double> y);
/// Coordinates at t = 1, so the prefactor is one.
ScalingCoordinates unit_scaling(double omega, double cap_a);

/// Inverse of scaling_coordinates at t = 1: r = A^(1/gamma), x = 0,
/// y = (sqrt(Omega), 0, ..., 0).
struct PhysicalPoint {
  double t = 1.0;
  double r = 1.0;
  std::vector<double> x, y;
};
PhysicalPoint physical_point(const MixedOrderParams& mp, double omega, double cap_a);

struct EnvelopeExponents {
  double n1 = 0.0;
  double n2 = 0.0;
};
EnvelopeExponents envelope_exponents(const MixedOrderParams& mp);

/// The default quadrature breakpoints {A ^ 1, A v 1, 1} in the z variable.
std::vector<double> default_split_points(double cap_a);

/// G_1 by quadrature over z = s t^-beta of
///   G^{Y,gamma}(t^beta z, r, x, y) t^beta mu_0^beta(t^beta z).
/// Empty qc.split_points are replaced by default_split_points(A).
QuadResult greens_quadrature(const MixedOrderParams& mp, const QuadratureConfig& qc,
                             double t, double r, std::span<const double> x,
                             std::span<const double> y);

/// G_1 divided by its prefactor, as a function of (Omega, A).
QuadResult greens_normalized(const MixedOrderParams& mp, const QuadratureConfig& qc,
                             double omega, double cap_a);

enum class SmallOmegaExponent {
  inverse,  ///< A^(-1-1/gamma)
  direct,   ///< A^(-1-gamma)
};

struct EnvelopeOptions {
  SmallOmegaExponent a_exponent = SmallOmegaExponent::inverse;
};

/// Comparator of the two-regime estimate (unit constants), in log form:
///   Omega <= 1: prefactor A^p {1 | |log(Omega max(1/A, 1))| + 1 | Omega^(2-d/2)}
///               for d <= 3 | d = 4 | d >= 5,
///   Omega >= 1: prefactor Omega^N1 A^N2 exp(-(Omega max(1/A, 1))^(1/(2-alpha_min))).
double log_envelope_comparator(const MixedOrderParams& mp, const ScalingCoordinates& sc,
                               const EnvelopeOptions& opt = {});

/// Comparator with band constants. Without a calibration entry for
/// (beta, gamma, d) the constants are 1.
EnvelopeBand envelope(const MixedOrderParams& mp, const ScalingCoordinates& sc,
                      const EnvelopeOptions& opt = {});

struct SweepPoint {
  double omega = 0.0;
  double cap_a = 0.0;
  double value_log = 0.0;
  double comparator_log = 0.0;
  double log_error = 0.0;
  bool converged = true;
  bool failed = false;  // quadrature threw or produced a non-finite value
  std::string message;

  double log_ratio() const { return value_log - comparator_log; }
};

struct SweepSummary {
  double min_log_ratio = 0.0;
  double max_log_ratio = 0.0;
  int points = 0;
  int failures = 0;
  int unconverged = 0;

  double log_spread() const { return max_log_ratio - min_log_ratio; }
};

struct EnvelopeSweep {
  MixedOrderParams mp;
  std::vector<SweepPoint> points;
  SweepSummary summary;
};

/// Log-spaced grid of `count` points on [lo, hi] (inclusive). With
/// `midpoints` the points sit halfway between those of the inclusive grid.
std::vector<double> log_grid(double lo, double hi, int count, bool midpoints = false);

/// Runs greens_normalized and the comparator over omega x cap_a. Points are
/// evaluated in parallel on `threads` workers (0 = hardware concurrency).
EnvelopeSweep envelope_ratio_sweep(const MixedOrderParams& mp, const QuadratureConfig& qc,
                                   const std::vector<double>& omegas,
                                   const std::vector<double>& cap_as,
                                   const EnvelopeOptions& opt = {}, int threads = 0);

/// CSV with columns omega,cap_a,d,beta,gamma,value_log,comparator_log,ratio.
void write_sweep_csv(std::ostream& os, const EnvelopeSweep& sweep);
/// JSON object with the summary fields and the failing points.
std::string sweep_summary_json(const EnvelopeSweep& sweep);

/// Fits the stretched-exponential exponent kappa of the large-Omega decay:
/// with L(Omega) = log(value) - N1 log Omega, kappa is the slope of
/// log(-dL) against log Omega between consecutive points.
struct DecayFit {
  double exponent = 0.0;     // fitted kappa
  double predicted = 0.0;    // 1 / (2 - alpha_min)
  double predicted_max = 0.0;  // 1 / (2 - alpha_max)
};
DecayFit fit_large_omega_decay(const MixedOrderParams& mp, const QuadratureConfig& qc,
                               double cap_a, double omega_lo, double omega_hi,
                               int points = 6);

/// The four integrals of the splitting of G_1 (with the prefactor), each as a
/// log value; log = -inf for an integral switched off by its indicator.
struct ComponentIntegrals {
  QuadResult i1, i2, i3, i4;
};
ComponentIntegrals component_integrals(const MixedOrderParams& mp,
                                       const ScalingCoordinates& sc,
                                       const QuadratureConfig& qc);

/// Smallest single constants (log) for which the ordering chains of the four
/// integrals hold on a grid, per quadrant
///   0: Omega <= 1, A <= 1   I4 <= c I2 <= c I1
///   1: Omega <= 1, A >= 1   I4 <= c I3 <= c I1
///   2: Omega >= 1, A <= 1   I1 <= c I2 <= c I4
///   3: Omega >= 1, A >= 1   I1 <= c I3 <= c I4
/// At A = 1 (|log A| < 1e-9) the middle integral vanishes and the chain
/// reduces to its two ends. `worst_*` locate the maximising grid point.
struct OrderingReport {
  std::array<double, 4> log_c{};
  std::array<double, 4> worst_omega{};
  std::array<double, 4> worst_cap_a{};
  std::array<int, 4> points{};
  /// max |log((I1 + I2 + I3 + I4) / G_1)| over the grid.
  double max_log_sum_ratio = 0.0;
};
OrderingReport ordering_constants(const MixedOrderParams& mp, const QuadratureConfig& qc,
                                  const std::vector<double>& omegas,
                                  const std::vector<double>& cap_as, int threads = 0);

/// k coordinates; boundary_index selects the one whose exit is represented
/// (1-based). `levels` holds r_j for j != boundary_index in order.
struct KDimParams {
  std::vector<double> orders;
  int boundary_index = 1;
  std::vector<double> levels;
  int dimension = 1;

  int k() const { return static_cast<int>(orders.size()); }
  void validate() const;
  /// A_1 = t_i^(-beta_i) prod_{j != i} r_j^(beta_j).
  double log_a1(double t_boundary) const;
  /// log Pi_1 = sum_{j != i} (-(beta_i/beta_j) log t_i + (-1 - 1/beta_j) log A_1).
  double log_pi1(double t_boundary) const;
  /// log Pi_2 = sum_{j != i} (-(beta_i/beta_j) log t_i
  ///                          - (2 - beta_j)/(2 beta_j (1 - beta_j)) log A_1).
  double log_pi2(double t_boundary) const;
};

/// (t_i / beta_i) int_0^inf G^Y(s, x, y) s^(-1 - sum 1/beta) prod_{j != i}
///   w_{beta_j}(r_j s^(-1/beta_j)) w_{beta_i}(t_i s^(-1/beta_i)) ds, in the s variable.
QuadResult kdim_greens_quadrature(const KDimParams& kp, const QuadratureConfig& qc,
                                  double t_boundary, std::span<const double> x,
                                  std::span<const double> y);

/// Small- and large-Omega comparators of the k-coordinate conjecture (unit
/// constants, N1 = N2 = 0 in the large-Omega branch).
double log_conjecture_comparator(const KDimParams& kp, double t_boundary, double omega);

struct ConjecturePoint {
  double omega = 0.0;
  double a1 = 0.0;
  double value_log = 0.0;
  double comparator_log = 0.0;
  bool converged = true;
  bool failed = false;
};

struct ConjectureSummary {
  std::vector<ConjecturePoint> points;
  double min_log_ratio = 0.0;
  double max_log_ratio = 0.0;
  bool finite = true;
  /// Least-squares fit of log(value / comparator) = c0 + e_omega log Omega
  /// + e_a log A_1 over the large-Omega points.
  double fitted_omega_exponent = 0.0;
  double fitted_a_exponent = 0.0;
  int large_omega_points = 0;
};

/// Evaluates the k-coordinate Green function on an (Omega, A_1) grid at
/// t_i = 1, with levels r_j chosen so that each r_j^beta_j = A_1^(1/(k-1)).
/// Only `kp.orders`, `kp.boundary_index` and `kp.dimension` are used.
ConjectureSummary conjecture_experiment(const KDimParams& kp, const QuadratureConfig& qc,
                                        const std::vector<double>& omegas,
                                        const std::vector<double>& a1s, int threads = 0);

/// Runs f(i) for i in [0, n) on a small thread pool.
void parallel_for(int n, int threads, const std::function<void(int)>& f);

}  // namespace fracgreen
