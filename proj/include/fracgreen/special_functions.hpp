#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "fracgreen/quadrature.hpp"

namespace fracgreen {

/// Stability index and evaluation regimes of the one-sided stable density
/// w_alpha with Laplace transform exp(-lambda^alpha).
///
/// Below `switch_radius` the density is replaced by its saddle-point
/// asymptote; above `tail_radius` by its convergent power series in
/// r^(-alpha), whose leading term is the r^(-1-alpha) tail.
struct StableParams {
  double alpha = 0.5;
  double switch_radius = 1e-8;
  double tail_radius = 1e3;

  void validate() const;
};

/// Constants of the small-argument asymptote
///   f(r) = amplitude * r^power_poly * exp(-decay * r^power_exp).
struct SaddleConstants {
  double amplitude = 0.0;
  double decay = 0.0;
  double power_poly = 0.0;
  double power_exp = 0.0;

  void validate() const;
};

/// Saddle-point constants derived from the Laplace exponent lambda^alpha:
/// amplitude = alpha^((2-alpha)/(2(1-alpha))) / sqrt(2 pi alpha (1-alpha)),
/// decay = (1-alpha) alpha^(alpha/(1-alpha)).
SaddleConstants saddle_constants(double alpha);

/// Constant of the large-r tail w(r) ~ C r^(-1-alpha): alpha / Gamma(1-alpha).
double tail_constant(double alpha);

/// Handoff radii from the calibration store, or from calibrate_switch_radii
/// when alpha has no stored entry. Results are memoised per alpha.
StableParams default_stable_params(double alpha);

/// Scans a log grid for the largest radius where the saddle asymptote agrees
/// with the integral representation to `jump_tol`, and the smallest radius
/// where the tail series converges to machine precision within a few terms.
StableParams calibrate_switch_radii(double alpha, double jump_tol = 1e-7);

/// log w_alpha(r) through the regime dispatch (no tabulation).
double log_stable_density(const StableParams& params, double r);
double stable_density(const StableParams& params, double r);

/// log w_alpha(r) from the bounded-angle integral representation alone.
double log_stable_density_integral(double alpha, double r);
/// log w_alpha(r) from the power series sum_k (-1)^(k+1) Gamma(k alpha + 1)
/// sin(k pi alpha) r^(-k alpha - 1) / (pi k!). Throws if it fails to converge.
double log_stable_density_series(double alpha, double r);

double stable_density_small_asymptote(const SaddleConstants& c, double r);
double log_stable_density_small_asymptote(const SaddleConstants& c, double r);

/// Tabulated evaluator used in inner loops. Stores the smooth residual
/// log w - log(saddle asymptote) on a uniform grid in log r and interpolates it with
/// cubic Hermite splines; outside the table it defers to the asymptotes.
class StableDensity {
 public:
  explicit StableDensity(const StableParams& params, int nodes_per_unit = 24);

  double log_density(double r) const;
  double operator()(double r) const { return std::exp(log_density(r)); }

  const StableParams& params() const { return params_; }
  const SaddleConstants& saddle() const { return saddle_; }
  double alpha() const { return params_.alpha; }

 private:
  double log_reference(double log_r) const;

  StableParams params_;
  SaddleConstants saddle_;
  double u_lo_, u_hi_, h_;
  std::vector<double> resid_, slope_;
};

/// Shared tabulated evaluator for `alpha` (built once, thread-safe).
std::shared_ptr<const StableDensity> stable_density_table(double alpha);

/// Upper incomplete gamma function Gamma(s, A) = int_A^inf y^(s-1) e^(-y) dy
/// for real s and A > 0. Throws std::overflow_error if the value is outside
/// double range; use the log form there.
double upper_incomplete_gamma(double s, double A);
double log_upper_incomplete_gamma(double s, double A);

/// Boundary-minimum Laplace asymptote g(b) (A h'(b))^-1 exp(-A h(b)).
double laplace_boundary_asymptote(double g_b, double h_b, double h_prime_b, double A);
double log_laplace_boundary_asymptote(double g_b, double h_b, double h_prime_b,
                                      double A);

/// Interior-minimum Laplace asymptote g sqrt(2 pi / (A h'')) exp(-A h).
double laplace_interior_asymptote(double g_min, double h_min, double h_second,
                                  double A);
double log_laplace_interior_asymptote(double g_min, double h_min, double h_second,
                                      double A);

/// Parameters of the two exponential integrals
///   int_0^1 w^N exp(-Omega w - c w^-a) dw                        (one barrier)
///   int_1^inf z^n exp(-Omega/z - A^-a z^a - z^b) dz              (two barriers)
struct LaplaceProblem {
  enum class Form { one_barrier, two_barrier };
  Form form = Form::one_barrier;
  double integrand_power = 0.0;  // N or n
  double barrier_power = 2.0;    // a
  double second_barrier_power = 0.0;  // b; 0 means "absent"
  double barrier_coeff = 1.0;    // c
  double large_parameter = 1.0;  // Omega
  double scale = 1.0;            // A

  void validate() const;
};

struct LaplaceConstants {
  double c1 = 0.0;
  double c2 = 0.0;
};

/// C1(a, N, c) and C2(c, a) of the one-barrier asymptote, from the interior
/// Laplace method at the minimiser w* = (a c / Omega)^(1/(a+1)):
///   C1 = (a c)^((2(N+1)-1)/(2(a+1))) sqrt(2 pi / (a+1)),
///   C2 = c^(1/(a+1)) (a^(1/(a+1)) + a^(-a/(a+1))).
LaplaceConstants one_barrier_constants(double a, double N, double c);

/// Variant with the other placement of the c-exponents,
///   C1 = a^((2(N+1)-1)/(2(a+1))) c^((2(N+1)+1)/(2(a+1))) sqrt(2 pi/(a+1)),
///   C2 = c^(-1/(a+1)) (a^(1/(a+1)) + a^(-a/(a+1))).
/// They coincide with one_barrier_constants at c = 1 only.
LaplaceConstants one_barrier_constants_alt(double a, double N, double c);

/// log of C1 Omega^(-(2(N+1)+a)/(2(a+1))) exp(-C2 Omega^(a/(a+1))).
double log_one_barrier_asymptote(double a, double N, double c, double omega);

/// log of the two-barrier asymptote with c := min(a, b):
///   C1 Omega^((2(n+1)-c)/(2(c+1))) A^((2c(n+1)+c)/(2(c+1)))
///     exp(-C2 (Omega/A)^(c/(c+1))),
/// where C1, C2 are the one-barrier constants for (a, N, c) = (c, -n-2, 1)
/// (the substitution z = A / w maps the A-barrier onto the one-barrier form).
double log_two_barrier_asymptote(const LaplaceProblem& problem);
double two_barrier_asymptote(const LaplaceProblem& problem);

/// The integral itself, in the form selected by `problem.form`. In the
/// two-barrier form b = 0 drops the z^b term.
QuadResult laplace_problem_quadrature(const LaplaceProblem& problem,
                                      const QuadratureConfig& qc = {});

}  // namespace fracgreen
