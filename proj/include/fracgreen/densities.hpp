#pragma once

#include <cmath>
#include <span>

#include "fracgreen/special_functions.hpp"

namespace fracgreen {

/// Decreasing alpha-stable process started at level `start` and absorbed on
/// its first attempt to cross zero.
struct AbsorbedProcessParams {
  double alpha = 0.5;
  double start = 1.0;

  void validate() const;
};

enum class HeatRealization { exact_laplacian, band_only };

struct HeatKernelParams {
  int dimension = 1;
  /// Constant c of the comparator s^(-d/2) exp(-c |x-y|^2 / s). For the exact
  /// Laplacian kernel c = 1/4 makes the band tight.
  double aronson_constant = 0.25;
  HeatRealization realization = HeatRealization::exact_laplacian;

  void validate() const;
};

/// A two-sided bound k_low * lower <= value <= k_high * upper at one point.
/// Comparators and constants are kept in log form: calibrated constants of
/// stretched-exponential envelopes can exceed double range.
struct EnvelopeBand {
  double log_lower = 0.0;
  double log_upper = 0.0;
  double log_k_low = 0.0;
  double log_k_high = 0.0;
  /// Which branch of a piecewise comparator produced the band (0 if unique).
  int branch = 0;

  double k_low() const { return std::exp(log_k_low); }
  double k_high() const { return std::exp(log_k_high); }
  void validate() const;
  /// log of the geometric centre of [k_low lower, k_high upper].
  double log_center() const;
  /// True if log_value lies in the band, widened by `log_slack` on each side.
  bool contains(double log_value, double log_slack = 0.0) const;
};

/// Value with an explicit flag for results that underflow double range.
struct DensityValue {
  double value = 0.0;
  double log_value = 0.0;
  bool underflow = false;
};

/// mu(s) = (t / alpha) s^(-1-1/alpha) w_alpha(t s^(-1/alpha)), the density of
/// the absorption time tau_0.
double log_exit_time_density(const AbsorbedProcessParams& p, double s);
DensityValue exit_time_density(const AbsorbedProcessParams& p, double s);

/// P[tau_0 <= s] = P[S_s >= t], by quadrature of w_alpha.
double exit_time_cdf(const AbsorbedProcessParams& p, double s);

/// Limits of the normalised exit density m(s) = t^alpha mu(t^alpha s), which
/// does not depend on t.
struct ExitAsymptotes {
  double alpha = 0.5;
  /// m(s) -> small_s_limit = 1 / Gamma(1 - alpha) as s -> 0.
  double small_s_limit = 0.0;
  /// m(s) ~ large_amplitude s^large_power exp(-large_decay s^large_exp_power).
  double large_amplitude = 0.0;
  double large_power = 0.0;
  double large_decay = 0.0;
  double large_exp_power = 0.0;

  double log_large_s(double s) const;
};

ExitAsymptotes exit_density_asymptotes(const AbsorbedProcessParams& p);

enum class KernelConvention { displacement, position };

/// Density of the amount the process has decreased (displacement) or of its
/// remaining level (position) after operational time s.
double log_transition_density(const AbsorbedProcessParams& p, double s, double r,
                              KernelConvention convention = KernelConvention::displacement);
double transition_density(const AbsorbedProcessParams& p, double s, double r,
                          KernelConvention convention = KernelConvention::displacement);

/// (4 pi s)^(-d/2) exp(-|x-y|^2 / (4 s)).
double squared_distance(std::span<const double> x, std::span<const double> y);
double log_heat_kernel(const HeatKernelParams& hp, double s, std::span<const double> x,
                       std::span<const double> y);
double heat_kernel(const HeatKernelParams& hp, double s, std::span<const double> x,
                   std::span<const double> y);
/// Aronson comparator s^(-d/2) exp(-c |x-y|^2/s) with c_high in the lower and
/// c_low in the upper comparator; k_low = k_high = (4 pi)^(-d/2).
EnvelopeBand aronson_band(const HeatKernelParams& hp, double s, std::span<const double> x,
                          std::span<const double> y, double c_low, double c_high);

/// Heat kernel times the displacement transition density of an independent
/// gamma-stable coordinate.
double log_joint_kernel(const HeatKernelParams& hp, double gamma, double s, double r,
                        std::span<const double> x, std::span<const double> y);
double joint_kernel(const HeatKernelParams& hp, double gamma, double s, double r,
                    std::span<const double> x, std::span<const double> y);

/// Comparator of the joint kernel with unit constants:
///   branch 1 (s <= r^gamma): r^(-1-gamma) s^(1-d/2) exp(-c |x-y|^2/s)
///   branch 2 (s >  r^gamma): r^(-(2-gamma)/(2(1-gamma))) s^(1/(2(1-gamma)) - d/2)
///                            exp(-c |x-y|^2/s - c_gamma s^(1/(1-gamma)) r^(-gamma/(1-gamma)))
/// with c the Aronson constant and c_gamma the saddle decay constant.
double log_joint_comparator(const HeatKernelParams& hp, double gamma, double s, double r,
                            double dist2, int branch);

struct BandConstants {
  double k_low = 1.0;
  double k_high = 1.0;
};

/// Sup and inf of joint_kernel / comparator. For the exact Laplacian with
/// c = 1/4 the ratio depends on u = r s^(-1/gamma) only, so the scan runs
/// over u in [u_min, u_max] (log grid). Memoised per (gamma, d) for the
/// default range.
BandConstants calibrate_joint_envelope(const HeatKernelParams& hp, double gamma,
                                       double u_min = 1e-3, double u_max = 1e6,
                                       int points = 2000);
BandConstants joint_envelope_constants(const HeatKernelParams& hp, double gamma);

EnvelopeBand joint_kernel_envelope(const HeatKernelParams& hp, double gamma, double s,
                                   double r, std::span<const double> x,
                                   std::span<const double> y);

}  // namespace fracgreen
