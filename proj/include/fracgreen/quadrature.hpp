#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace fracgreen {

/// Settings shared by every adaptive integral in the library.
///
/// `abs_tol` is measured against the integrand after it has been rescaled so
/// that its peak equals one; together with log-domain integrands this keeps
/// the tolerance meaningful when the integral itself is far below DBL_MIN.
struct QuadratureConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-15;
  /// Interior breakpoints in the original variable. Empty means "none".
  std::vector<double> split_points;
  /// On half-line integrals, map (0, inf) through z = e^u. Otherwise the
  /// tail uses z = b + v / (1 - v) and the head is integrated linearly.
  bool tail_substitution = true;
  int max_subdivisions = 4000;

  void validate() const;
};

/// Result of an integral whose value may lie outside double range.
struct QuadResult {
  double log_value = -std::numeric_limits<double>::infinity();
  /// log of the absolute error estimate.
  double log_error = -std::numeric_limits<double>::infinity();
  int subdivisions = 0;
  bool converged = true;

  double value() const { return std::exp(log_value); }
  double error() const { return std::exp(log_error); }
  double rel_error() const {
    return std::isfinite(log_value) ? std::exp(log_error - log_value) : 0.0;
  }
  /// True when the integral is an exact zero or below the double range.
  bool underflow() const { return value() == 0.0; }
};

/// Result of an ordinary (signed) integral.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
  bool converged = true;
};

using Integrand = std::function<double(double)>;
/// Returns log f(x); -inf encodes an exact zero.
using LogIntegrand = std::function<double(double)>;

/// Global adaptive Gauss-Kronrod (10/21) on [a, b] for a plain integrand.
Estimate integrate(const Integrand& f, double a, double b,
                   const QuadratureConfig& cfg);

/// Same, for a nonnegative integrand supplied as log f. Breakpoints in
/// cfg.split_points that fall inside (a, b) are honoured.
QuadResult integrate_log(const LogIntegrand& log_f, double a, double b,
                         const QuadratureConfig& cfg);

/// Integral of a nonnegative integrand over (0, inf).
///
/// With `tail_substitution` the whole half-line is mapped through z = e^u and
/// the u-range is truncated where the integrand has fallen `kTruncationDrop`
/// e-folds below its peak. The integrand must decay monotonically beyond the
/// outermost breakpoints in both directions.
QuadResult integrate_log_halfline(const LogIntegrand& log_f,
                                  const QuadratureConfig& cfg);

inline constexpr double kTruncationDrop = 60.0;

/// log(e^a + e^b) without overflow.
double log_add(double a, double b);

}  // namespace fracgreen
