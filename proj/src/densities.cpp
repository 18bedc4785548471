#include "fracgreen/densities.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace fracgreen {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_index(double alpha, const char* what) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in (0, 1), got " +
                                std::to_string(alpha));
  }
}

void check_points(const HeatKernelParams& hp, std::span<const double> x,
                  std::span<const double> y) {
  const auto d = static_cast<std::size_t>(hp.dimension);
  if (x.size() != d || y.size() != d) {
    throw std::invalid_argument("heat kernel: points must have dimension " +
                                std::to_string(hp.dimension));
  }
}

}  // namespace

void AbsorbedProcessParams::validate() const {
  check_index(alpha, "alpha");
  if (!(start > 0.0) || !std::isfinite(start)) {
    throw std::invalid_argument("AbsorbedProcessParams: start must be positive");
  }
}

void HeatKernelParams::validate() const {
  if (dimension < 1) throw std::invalid_argument("HeatKernelParams: dimension must be >= 1");
  if (!(aronson_constant > 0.0)) {
    throw std::invalid_argument("HeatKernelParams: aronson_constant must be positive");
  }
}

void EnvelopeBand::validate() const {
  if (!(log_k_high >= log_k_low)) {
    throw std::invalid_argument("EnvelopeBand: need k_low <= k_high");
  }
  if (log_lower > log_upper) {
    throw std::invalid_argument("EnvelopeBand: lower comparator exceeds upper");
  }
}

double EnvelopeBand::log_center() const {
  return 0.5 * (log_k_low + log_lower + log_k_high + log_upper);
}

bool EnvelopeBand::contains(double log_value, double log_slack) const {
  return log_value >= log_k_low + log_lower - log_slack &&
         log_value <= log_k_high + log_upper + log_slack;
}

// ---------------------------------------------------------------------------

double log_exit_time_density(const AbsorbedProcessParams& p, double s) {
  p.validate();
  if (!(s > 0.0)) throw std::invalid_argument("exit_time_density: s must be positive");
  const double a = p.alpha;
  const double log_s = std::log(s);
  const double arg = std::exp(std::log(p.start) - log_s / a);
  return std::log(p.start / a) - (1.0 + 1.0 / a) * log_s +
         stable_density_table(a)->log_density(arg);
}

DensityValue exit_time_density(const AbsorbedProcessParams& p, double s) {
  DensityValue out;
  out.log_value = log_exit_time_density(p, s);
  out.value = std::exp(out.log_value);
  out.underflow = out.value == 0.0;
  return out;
}

double exit_time_cdf(const AbsorbedProcessParams& p, double s) {
  p.validate();
  if (!(s > 0.0)) return 0.0;
  // tau_0 <= s  iff  the subordinator at time s has passed t, i.e.
  // S_1 >= t s^(-1/alpha).
  const double a = std::exp(std::log(p.start) - std::log(s) / p.alpha);
  const auto w = stable_density_table(p.alpha);
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.split_points = {a, 1.0};
  auto lf = [&](double v) { return w->log_density(a + v); };
  const QuadResult tail = integrate_log_halfline(lf, cfg);
  return std::min(1.0, tail.value());
}

double ExitAsymptotes::log_large_s(double s) const {
  if (!(s > 0.0)) throw std::invalid_argument("log_large_s: s must be positive");
  return std::log(large_amplitude) + large_power * std::log(s) -
         large_decay * std::pow(s, large_exp_power);
}

ExitAsymptotes exit_density_asymptotes(const AbsorbedProcessParams& p) {
  p.validate();
  const double a = p.alpha;
  const double q = 1.0 - a;
  const SaddleConstants sc = saddle_constants(a);
  ExitAsymptotes out;
  out.alpha = a;
  out.small_s_limit = tail_constant(a) / a;
  out.large_amplitude = sc.amplitude / a;
  out.large_power = -1.0 + 1.0 / (2.0 * q);
  out.large_decay = sc.decay;
  out.large_exp_power = 1.0 / q;
  return out;
}

double log_transition_density(const AbsorbedProcessParams& p, double s, double r,
                              KernelConvention convention) {
  p.validate();
  if (!(s > 0.0)) throw std::invalid_argument("transition_density: s must be positive");
  double arg = r;
  if (convention == KernelConvention::position) {
    if (!(r > 0.0 && r < p.start)) {
      throw std::invalid_argument("transition_density: position must lie in (0, start)");
    }
    arg = p.start - r;
  } else if (!(r > 0.0)) {
    throw std::invalid_argument("transition_density: displacement must be positive");
  }
  const double log_scale = std::log(s) / p.alpha;
  return -log_scale +
         stable_density_table(p.alpha)->log_density(std::exp(std::log(arg) - log_scale));
}

double transition_density(const AbsorbedProcessParams& p, double s, double r,
                          KernelConvention convention) {
  return std::exp(log_transition_density(p, s, r, convention));
}

// ---------------------------------------------------------------------------

double squared_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("squared_distance: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

double log_heat_kernel(const HeatKernelParams& hp, double s, std::span<const double> x,
                       std::span<const double> y) {
  hp.validate();
  if (hp.realization != HeatRealization::exact_laplacian) {
    throw std::invalid_argument("heat_kernel: band_only realization has no value; use aronson_band");
  }
  if (!(s > 0.0)) throw std::invalid_argument("heat_kernel: s must be positive");
  check_points(hp, x, y);
  return -0.5 * hp.dimension * std::log(4.0 * kPi * s) - squared_distance(x, y) / (4.0 * s);
}

double heat_kernel(const HeatKernelParams& hp, double s, std::span<const double> x,
                   std::span<const double> y) {
  return std::exp(log_heat_kernel(hp, s, x, y));
}

EnvelopeBand aronson_band(const HeatKernelParams& hp, double s, std::span<const double> x,
                          std::span<const double> y, double c_low, double c_high) {
  hp.validate();
  if (!(s > 0.0)) throw std::invalid_argument("aronson_band: s must be positive");
  if (!(c_low > 0.0) || !(c_high >= c_low)) {
    throw std::invalid_argument("aronson_band: need 0 < c_low <= c_high");
  }
  check_points(hp, x, y);
  const double r2 = squared_distance(x, y);
  const double base = -0.5 * hp.dimension * std::log(s);
  EnvelopeBand b;
  b.log_lower = base - c_high * r2 / s;
  b.log_upper = base - c_low * r2 / s;
  b.log_k_low = b.log_k_high = -0.5 * hp.dimension * std::log(4.0 * kPi);
  return b;
}

double log_joint_kernel(const HeatKernelParams& hp, double gamma, double s, double r,
                        std::span<const double> x, std::span<const double> y) {
  return log_heat_kernel(hp, s, x, y) +
         log_transition_density({gamma, 1.0}, s, r, KernelConvention::displacement);
}

double joint_kernel(const HeatKernelParams& hp, double gamma, double s, double r,
                    std::span<const double> x, std::span<const double> y) {
  return std::exp(log_joint_kernel(hp, gamma, s, r, x, y));
}

double log_joint_comparator(const HeatKernelParams& hp, double gamma, double s, double r,
                            double dist2, int branch) {
  hp.validate();
  check_index(gamma, "gamma");
  if (!(s > 0.0) || !(r > 0.0)) {
    throw std::invalid_argument("joint comparator: s and r must be positive");
  }
  const double q = 1.0 - gamma;
  const double d = hp.dimension;
  const double log_s = std::log(s), log_r = std::log(r);
  const double spatial = -hp.aronson_constant * dist2 / s;
  if (branch == 1) return -(1.0 + gamma) * log_r + (1.0 - 0.5 * d) * log_s + spatial;
  if (branch == 2) {
    const double c = saddle_constants(gamma).decay;
    return -(2.0 - gamma) / (2.0 * q) * log_r + (0.5 / q - 0.5 * d) * log_s + spatial -
           c * std::exp((log_s - gamma * log_r) / q);
  }
  throw std::invalid_argument("joint comparator: branch must be 1 or 2");
}

BandConstants calibrate_joint_envelope(const HeatKernelParams& hp, double gamma,
                                       double u_min, double u_max, int points) {
  hp.validate();
  check_index(gamma, "gamma");
  if (!(u_min > 0.0 && u_max > u_min) || points < 2) {
    throw std::invalid_argument("calibrate_joint_envelope: bad scan range");
  }
  // With x = y and s = 1 the kernel is (4 pi)^(-d/2) w(r) and the regimes
  // split at r = 1; u = r is then the only remaining variable.
  const std::vector<double> origin(static_cast<std::size_t>(hp.dimension), 0.0);
  double lo = kInf, hi = -kInf;
  for (int i = 0; i < points; ++i) {
    const double u = std::exp(std::log(u_min) + (std::log(u_max) - std::log(u_min)) * i /
                                                    (points - 1));
    const int branch = u >= 1.0 ? 1 : 2;
    const double ratio = log_joint_kernel(hp, gamma, 1.0, u, origin, origin) -
                         log_joint_comparator(hp, gamma, 1.0, u, 0.0, branch);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  return {std::exp(lo), std::exp(hi)};
}

BandConstants joint_envelope_constants(const HeatKernelParams& hp, double gamma) {
  static std::mutex mu;
  static std::map<std::pair<double, int>, BandConstants> cache;
  const auto key = std::make_pair(gamma, hp.dimension);
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const BandConstants k = calibrate_joint_envelope(hp, gamma);
  std::lock_guard lock(mu);
  cache.emplace(key, k);
  return k;
}

EnvelopeBand joint_kernel_envelope(const HeatKernelParams& hp, double gamma, double s,
                                   double r, std::span<const double> x,
                                   std::span<const double> y) {
  check_points(hp, x, y);
  const int branch = s <= std::pow(r, gamma) ? 1 : 2;
  const double log_cmp = log_joint_comparator(hp, gamma, s, r, squared_distance(x, y), branch);
  const BandConstants k = joint_envelope_constants(hp, gamma);
  EnvelopeBand b;
  b.log_lower = b.log_upper = log_cmp;
  b.log_k_low = std::log(k.k_low);
  b.log_k_high = std::log(k.k_high);
  b.branch = branch;
  return b;
}

}  // namespace fracgreen
