#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fracgreen {

/// Boundary function phi(r, y) built from a small expression grammar:
///
///   expr   := term ('+' term)*
///   term   := atom ('*' atom)*
///   atom   := const:c | exp-decay:lambda | poly:p | gauss-y:w
///
/// const:c      c
/// exp-decay:l  exp(-l r), l >= 0
/// poly:p       r^p, p >= 0
/// gauss-y:w    exp(-|y|^2 / w^2), w > 0
///
/// Every term factorises into f(r) g(y) with g Gaussian, which lets the solver
/// average over the Brownian coordinate in closed form.
class BoundaryFunction {
 public:
  struct Term {
    double coefficient = 1.0;
    double decay = 0.0;       // sum of exp-decay rates
    double power = 0.0;       // sum of poly exponents
    double inv_width2 = 0.0;  // sum of 1/w^2 over gauss-y atoms
  };

  BoundaryFunction() = default;
  static BoundaryFunction constant(double c);
  /// Throws std::invalid_argument with the offending position on bad input.
  static BoundaryFunction parse(std::string_view text);

  double operator()(double r, std::span<const double> y) const;
  /// Value of the r-part of one term (the y-part is exp(-inv_width2 |y|^2)).
  static double radial(const Term& t, double r);

  /// sup |phi| over r in [0, r_max], y in R^d (sum of the per-term sups).
  double sup_bound(double r_max) const;
  bool depends_on_y() const;
  bool is_zero() const;

  const std::vector<Term>& terms() const { return terms_; }
  /// Canonical text; parse(to_string()) reproduces the function.
  const std::string& to_string() const { return text_; }

 private:
  std::vector<Term> terms_;
  std::string text_;
};

struct BoundaryData {
  BoundaryFunction phi1 = BoundaryFunction::constant(1.0);
  BoundaryFunction phi2 = BoundaryFunction::constant(1.0);
};

}  // namespace fracgreen
