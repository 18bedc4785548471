#include "fracgreen/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fracgreen/calibration.hpp"

namespace fracgreen {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("stability index must lie in (0, 1), got " +
                                std::to_string(alpha));
  }
}

// log of Kanter's function
//   a(phi) = (sin(alpha phi) / sin phi)^(1/(1-alpha)) sin((1-alpha) phi) / sin(alpha phi)
double log_kanter(double alpha, double phi) {
  const double s_a = std::sin(alpha * phi);
  const double s_1 = std::sin(phi);
  const double s_c = std::sin((1.0 - alpha) * phi);
  return (std::log(s_a) - std::log(s_1)) / (1.0 - alpha) + std::log(s_c) -
         std::log(s_a);
}

}  // namespace

void StableParams::validate() const {
  check_alpha(alpha);
  if (!(switch_radius > 0.0) || !(tail_radius > switch_radius)) {
    throw std::invalid_argument("StableParams: need 0 < switch_radius < tail_radius");
  }
}

void SaddleConstants::validate() const {
  if (!(amplitude > 0.0) || !(decay > 0.0) || !(power_poly < 0.0) ||
      !(power_exp < 0.0)) {
    throw std::invalid_argument("SaddleConstants: invariant violated");
  }
}

SaddleConstants saddle_constants(double alpha) {
  check_alpha(alpha);
  const double q = 1.0 - alpha;
  SaddleConstants c;
  c.amplitude = std::pow(alpha, (2.0 - alpha) / (2.0 * q)) /
                std::sqrt(2.0 * kPi * alpha * q);
  c.decay = q * std::pow(alpha, alpha / q);
  c.power_poly = -(2.0 - alpha) / (2.0 * q);
  c.power_exp = -alpha / q;
  return c;
}

double tail_constant(double alpha) {
  check_alpha(alpha);
  return alpha / std::tgamma(1.0 - alpha);
}

double log_stable_density_small_asymptote(const SaddleConstants& c, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("small asymptote: r must be positive");
  return std::log(c.amplitude) + c.power_poly * std::log(r) -
         c.decay * std::exp(c.power_exp * std::log(r));
}

double stable_density_small_asymptote(const SaddleConstants& c, double r) {
  return std::exp(log_stable_density_small_asymptote(c, r));
}

double log_stable_density_integral(double alpha, double r) {
  check_alpha(alpha);
  if (!(r > 0.0)) throw std::invalid_argument("stable density: r must be positive");
  const double q = 1.0 - alpha;
  const double log_r = std::log(r);
  const double k = std::exp(-alpha / q * log_r);
  auto log_integrand = [&](double phi) {
    const double la = log_kanter(alpha, phi);
    return la - k * std::exp(la);
  };
  // log a(phi) carries rounding amplified by 1/q, and k a(phi) multiplies it
  // by k a(0); no tolerance below that noise floor is attainable.
  const double a0 = q * std::pow(alpha, alpha / q);
  QuadratureConfig cfg;
  cfg.rel_tol =
      std::max(1e-12, 32.0 * std::numeric_limits<double>::epsilon() * k * a0 / (q * q));
  cfg.abs_tol = 1e-300;
  cfg.max_subdivisions = 2000;
  const QuadResult res = integrate_log(log_integrand, 0.0, kPi, cfg);
  if (!res.converged || !std::isfinite(res.log_value)) {
    throw std::runtime_error(
        "stable density integral did not converge at r = " + std::to_string(r) +
        "; switch_radius/tail_radius are misconfigured for alpha = " +
        std::to_string(alpha));
  }
  return std::log(alpha / (q * kPi)) - log_r / q + res.log_value;
}

double log_stable_density_series(double alpha, double r) {
  check_alpha(alpha);
  if (!(r > 0.0)) throw std::invalid_argument("stable density: r must be positive");
  const double log_r = std::log(r);
  double sum = 0.0;
  for (int k = 1; k <= 400; ++k) {
    const double log_mag = std::lgamma(k * alpha + 1.0) - std::lgamma(k + 1.0) -
                           k * alpha * log_r;
    const double term = std::exp(log_mag) * std::sin(k * kPi * alpha);
    sum += (k % 2 == 1) ? term : -term;
    if (k >= 3 && std::exp(log_mag) < 1e-17 * std::abs(sum)) {
      if (!(sum > 0.0)) break;
      return std::log(sum / kPi) - log_r;
    }
  }
  throw std::runtime_error("stable density series did not converge at r = " +
                           std::to_string(r));
}

double log_stable_density(const StableParams& params, double r) {
  params.validate();
  if (!(r > 0.0)) throw std::invalid_argument("stable density: r must be positive");
  if (r < params.switch_radius) {
    return log_stable_density_small_asymptote(saddle_constants(params.alpha), r);
  }
  if (r > params.tail_radius) return log_stable_density_series(params.alpha, r);
  return log_stable_density_integral(params.alpha, r);
}

double stable_density(const StableParams& params, double r) {
  return std::exp(log_stable_density(params, r));
}

constexpr double kLogNegligible = -800.0;

StableParams calibrate_switch_radii(double alpha, double jump_tol) {
  check_alpha(alpha);
  const SaddleConstants sc = saddle_constants(alpha);
  StableParams p;
  p.alpha = alpha;
  // Relative error of the saddle asymptote decreases monotonically toward 0;
  // walk down in quarter decades until it is within jump_tol.
  p.switch_radius = 0.0;
  for (int j = 0; j <= 4 * 290; ++j) {
    const double r = std::pow(10.0, -0.25 * j);
    const double asym = log_stable_density_small_asymptote(sc, r);
    // Once w is far below the double range only the log matters, and there
    // the integral is limited by its rounding floor rather than the asymptote.
    if (asym < kLogNegligible) {
      p.switch_radius = r;
      break;
    }
    const double diff = log_stable_density_integral(alpha, r) - asym;
    if (std::abs(diff) < jump_tol) {
      p.switch_radius = r;
      break;
    }
  }
  if (p.switch_radius == 0.0) {
    throw std::runtime_error("calibrate_switch_radii: saddle asymptote never settles");
  }
  // Series terms shrink like (r^-alpha)^k / Gamma-ratio; r^-alpha = 1/20 gives
  // double precision within a dozen terms.
  p.tail_radius = std::pow(20.0, 1.0 / alpha);
  p.validate();
  return p;
}

StableParams default_stable_params(double alpha) {
  check_alpha(alpha);
  static std::mutex mu;
  static std::map<double, StableParams> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(alpha);
  if (it != cache.end()) return it->second;
  StableParams p;
  p.alpha = alpha;
  if (auto stored = default_calibration().stable(alpha)) {
    p.switch_radius = stored->switch_radius;
    p.tail_radius = stored->tail_radius;
    p.validate();
  } else {
    p = calibrate_switch_radii(alpha);
  }
  cache.emplace(alpha, p);
  return p;
}

// ---------------------------------------------------------------------------

StableDensity::StableDensity(const StableParams& params, int nodes_per_unit)
    : params_(params), saddle_(saddle_constants(params.alpha)) {
  params_.validate();
  u_lo_ = std::log(params_.switch_radius);
  u_hi_ = std::log(params_.tail_radius);
  const int n = std::max(8, static_cast<int>(std::ceil((u_hi_ - u_lo_) * nodes_per_unit)));
  h_ = (u_hi_ - u_lo_) / n;
  // Two ghost nodes on each side for the centred slope stencil.
  std::vector<double> ext(n + 5);
  for (int i = -2; i <= n + 2; ++i) {
    const double u = u_lo_ + i * h_;
    const double r = std::exp(u);
    double lw;
    if (i < 0) {
      lw = log_stable_density_small_asymptote(saddle_, r);
    } else if (i > n) {
      lw = log_stable_density_series(params_.alpha, r);
    } else {
      lw = log_stable_density_integral(params_.alpha, r);
    }
    ext[i + 2] = lw - log_reference(u);
  }
  resid_.assign(ext.begin() + 2, ext.begin() + 3 + n);
  slope_.resize(resid_.size());
  for (int i = 0; i <= n; ++i) {
    const int j = i + 2;
    slope_[i] = (-ext[j + 2] + 8.0 * ext[j + 1] - 8.0 * ext[j - 1] + ext[j - 2]) /
                (12.0 * h_);
  }
}

double StableDensity::log_reference(double u) const {
  // Beyond r ~ 1 the saddle form is off, but only by a term linear in u.
  return std::log(saddle_.amplitude) + saddle_.power_poly * u -
         saddle_.decay * std::exp(saddle_.power_exp * u);
}

double StableDensity::log_density(double r) const {
  if (!(r > 0.0)) {
    if (r == 0.0) return -kInf;
    throw std::invalid_argument("StableDensity: r must be nonnegative");
  }
  if (r < params_.switch_radius) {
    return log_stable_density_small_asymptote(saddle_, r);
  }
  if (r > params_.tail_radius) return log_stable_density_series(params_.alpha, r);
  const double u = std::log(r);
  const double x = (u - u_lo_) / h_;
  const std::size_t last = resid_.size() - 1;
  std::size_t i = static_cast<std::size_t>(std::max(0.0, std::floor(x)));
  if (i >= last) i = last - 1;
  const double t = x - static_cast<double>(i);
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double resid = h00 * resid_[i] + h10 * h_ * slope_[i] +
                       h01 * resid_[i + 1] + h11 * h_ * slope_[i + 1];
  return resid + log_reference(u);
}

std::shared_ptr<const StableDensity> stable_density_table(double alpha) {
  check_alpha(alpha);
  static std::mutex mu;
  static std::map<double, std::shared_ptr<const StableDensity>> cache;
  {
    std::lock_guard lock(mu);
    auto it = cache.find(alpha);
    if (it != cache.end()) return it->second;
  }
  auto table = std::make_shared<const StableDensity>(default_stable_params(alpha));
  std::lock_guard lock(mu);
  return cache.emplace(alpha, std::move(table)).first->second;
}

// ---------------------------------------------------------------------------
// Incomplete gamma

namespace {

// Legendre continued fraction for log Gamma(s, x) (modified Lentz).
double log_gamma_cf(double s, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) return -x + s * std::log(x) + std::log(h);
  }
  throw std::runtime_error("incomplete gamma continued fraction did not converge");
}

}  // namespace

double log_upper_incomplete_gamma(double s, double A) {
  if (!(A > 0.0)) throw std::invalid_argument("incomplete gamma: A must be positive");
  if (!std::isfinite(s)) throw std::invalid_argument("incomplete gamma: s must be finite");
  if (A > std::max(1.0, s + 1.0)) return log_gamma_cf(s, A);
  if (s > 0.0) {
    return std::lgamma(s) + std::log(boost::math::gamma_q(s, A));
  }
  // s <= 0, A <= 1: climb to s0 in [0, 1) then recur downward with
  //   Gamma(j, A) = (A^j e^-A - Gamma(j+1, A)) / |j|.
  const int m = static_cast<int>(std::ceil(-s));
  const double s0 = s + m;
  double lg = (s0 == 0.0) ? std::log(boost::math::expint(1, A))
                          : std::log(boost::math::tgamma(s0, A));
  for (int i = 1; i <= m; ++i) {
    const double j = s0 - i;
    const double l1 = j * std::log(A) - A;
    lg = l1 + std::log1p(-std::exp(lg - l1)) - std::log(-j);
  }
  return lg;
}

double upper_incomplete_gamma(double s, double A) {
  const double lg = log_upper_incomplete_gamma(s, A);
  if (lg > std::log(std::numeric_limits<double>::max())) {
    throw std::overflow_error("upper_incomplete_gamma overflows; use the log form");
  }
  return std::exp(lg);
}

// ---------------------------------------------------------------------------
// Laplace method

double log_laplace_boundary_asymptote(double g_b, double h_b, double h_prime_b,
                                      double A) {
  if (!(h_prime_b > 0.0) || !(A > 0.0) || !(g_b > 0.0)) {
    throw std::invalid_argument("laplace boundary: need g(b) > 0, h'(b) > 0, A > 0");
  }
  return std::log(g_b) - std::log(A * h_prime_b) - A * h_b;
}

double laplace_boundary_asymptote(double g_b, double h_b, double h_prime_b, double A) {
  if (!(h_prime_b > 0.0) || !(A > 0.0)) {
    throw std::invalid_argument("laplace boundary: need h'(b) > 0, A > 0");
  }
  return g_b / (A * h_prime_b) * std::exp(-A * h_b);
}

double log_laplace_interior_asymptote(double g_min, double h_min, double h_second,
                                      double A) {
  if (!(h_second > 0.0) || !(A > 0.0) || !(g_min > 0.0)) {
    throw std::invalid_argument("laplace interior: need g > 0, h'' > 0, A > 0");
  }
  return std::log(g_min) + 0.5 * std::log(2.0 * kPi / (A * h_second)) - A * h_min;
}

double laplace_interior_asymptote(double g_min, double h_min, double h_second,
                                  double A) {
  if (!(h_second > 0.0) || !(A > 0.0)) {
    throw std::invalid_argument("laplace interior: need h'' > 0, A > 0");
  }
  return g_min * std::sqrt(2.0 * kPi / (A * h_second)) * std::exp(-A * h_min);
}

void LaplaceProblem::validate() const {
  if (!(barrier_power > 1.0)) throw std::invalid_argument("LaplaceProblem: need a > 1");
  if (second_barrier_power != 0.0 && !(second_barrier_power > 1.0)) {
    throw std::invalid_argument("LaplaceProblem: need b > 1");
  }
  if (!(barrier_coeff > 0.0)) throw std::invalid_argument("LaplaceProblem: need c > 0");
  if (!(large_parameter > 0.0)) throw std::invalid_argument("LaplaceProblem: need Omega > 0");
  if (!(scale > 0.0)) throw std::invalid_argument("LaplaceProblem: need A > 0");
}

LaplaceConstants one_barrier_constants(double a, double N, double c) {
  if (!(a > 1.0)) throw std::invalid_argument("one_barrier_constants: need a > 1");
  if (!(c > 0.0)) throw std::invalid_argument("one_barrier_constants: need c > 0");
  LaplaceConstants k;
  k.c1 = std::pow(a * c, (2.0 * (N + 1.0) - 1.0) / (2.0 * (a + 1.0))) *
         std::sqrt(2.0 * kPi / (a + 1.0));
  k.c2 = std::pow(c, 1.0 / (a + 1.0)) *
         (std::pow(a, 1.0 / (a + 1.0)) + std::pow(a, -a / (a + 1.0)));
  return k;
}

LaplaceConstants one_barrier_constants_alt(double a, double N, double c) {
  if (!(a > 1.0)) throw std::invalid_argument("one_barrier_constants: need a > 1");
  if (!(c > 0.0)) throw std::invalid_argument("one_barrier_constants: need c > 0");
  LaplaceConstants k;
  k.c1 = std::pow(a, (2.0 * (N + 1.0) - 1.0) / (2.0 * (a + 1.0))) *
         std::pow(c, (2.0 * (N + 1.0) + 1.0) / (2.0 * (a + 1.0))) *
         std::sqrt(2.0 * kPi / (a + 1.0));
  k.c2 = std::pow(c, -1.0 / (a + 1.0)) *
         (std::pow(a, 1.0 / (a + 1.0)) + std::pow(a, -a / (a + 1.0)));
  return k;
}

double log_one_barrier_asymptote(double a, double N, double c, double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("one_barrier: Omega must be positive");
  const LaplaceConstants k = one_barrier_constants(a, N, c);
  return std::log(k.c1) -
         (2.0 * (N + 1.0) + a) / (2.0 * (a + 1.0)) * std::log(omega) -
         k.c2 * std::pow(omega, a / (a + 1.0));
}

double log_two_barrier_asymptote(const LaplaceProblem& p) {
  p.validate();
  const double c = p.second_barrier_power > 0.0
                       ? std::min(p.barrier_power, p.second_barrier_power)
                       : p.barrier_power;
  const double n = p.integrand_power;
  const LaplaceConstants k = one_barrier_constants(c, -n - 2.0, 1.0);
  const double om = p.large_parameter, A = p.scale;
  return std::log(k.c1) +
         (2.0 * (n + 1.0) - c) / (2.0 * (c + 1.0)) * std::log(om) +
         (2.0 * c * (n + 1.0) + c) / (2.0 * (c + 1.0)) * std::log(A) -
         k.c2 * std::pow(om / A, c / (c + 1.0));
}

double two_barrier_asymptote(const LaplaceProblem& p) {
  return std::exp(log_two_barrier_asymptote(p));
}

QuadResult laplace_problem_quadrature(const LaplaceProblem& p, const QuadratureConfig& qc) {
  p.validate();
  const double a = p.barrier_power, om = p.large_parameter;
  QuadratureConfig cfg = qc;
  if (p.form == LaplaceProblem::Form::one_barrier) {
    const double N = p.integrand_power, c = p.barrier_coeff;
    const double w_star = std::pow(a * c / om, 1.0 / (a + 1.0));
    cfg.split_points.clear();
    if (w_star < 1.0) cfg.split_points.push_back(w_star);
    auto lf = [&](double w) { return N * std::log(w) - om * w - c * std::pow(w, -a); };
    return integrate_log(lf, 0.0, 1.0, cfg);
  }
  // z = 1 + v keeps a mass squeezed against z = 1 resolvable.
  const double b = p.second_barrier_power, n = p.integrand_power, A = p.scale;
  auto lf = [&](double v) {
    const double z = 1.0 + v;
    const double e = n * std::log(z) - om / z - std::pow(z / A, a);
    return b > 0.0 ? e - std::pow(z, b) : e;
  };
  cfg.split_points.clear();
  const double c = b > 0.0 ? std::min(a, b) : a;
  const double z_star = std::pow(om * std::pow(A, c), 1.0 / (c + 1.0));
  if (z_star > 1.0) cfg.split_points.push_back(z_star - 1.0);
  if (A > 1.0) cfg.split_points.push_back(A - 1.0);
  cfg.tail_substitution = true;
  return integrate_log_halfline(lf, cfg);
}

}  // namespace fracgreen
