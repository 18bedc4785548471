#pragma once

#include <cstdint>
#include <vector>

#include "fracgreen/boundary.hpp"
#include "fracgreen/densities.hpp"
#include "fracgreen/greens.hpp"

namespace fracgreen {

/// Point (t1, t2, x) at which the boundary value problem is solved. phi1 lives
/// on the face t1 = 0 (reached when the beta coordinate exits first), phi2 on
/// t2 = 0.
struct BvpQuery {
  double t1 = 1.0;
  double t2 = 1.0;
  std::vector<double> x{0.0};
  MixedOrderParams mp;
  QuadratureConfig qc;
  /// Where phi1(r, .) is sampled along the surviving coordinate: at the
  /// distance it has travelled (displacement) or at its remaining level
  /// (position).
  KernelConvention convention = KernelConvention::displacement;

  void validate() const;
};

struct BvpResult {
  double value = 0.0;
  double error = 0.0;
  double face1 = 0.0;  // phi1 * G1 contribution
  double face2 = 0.0;  // phi2 * G2 contribution
  bool converged = true;
};

/// int_0^t2 int phi1 G1 dy dr + int_0^t1 int phi2 G2 dy dr. The y-integrals
/// are done in closed form (each boundary term is Gaussian in y) and the r-
/// and s-integrals by adaptive quadrature.
BvpResult solve_bvp(const BoundaryData& bd, const BvpQuery& q);

struct KernelMass {
  double mass1 = 0.0;  // P[tau^beta < tau^gamma]
  double mass2 = 0.0;
  double error = 0.0;
  bool converged = true;
};
KernelMass kernel_mass(const MixedOrderParams& mp, const QuadratureConfig& qc, double t1,
                       double t2, const std::vector<double>& x);

enum class McMethod {
  /// Exit times from the scaling identity tau = (t / S_1)^alpha and the other
  /// coordinate from S(u) = u^(1/alpha) S_1; the losing face is resampled by
  /// rejection, so no time grid is involved.
  exact,
  /// Grid stepping through simulate_exit.
  path,
};

struct McOptions {
  McMethod method = McMethod::exact;
  /// Grid step for McMethod::path; 0 selects 1e-2 * min(t1^beta, t2^gamma).
  double step = 0.0;
  int threads = 0;
};

struct McResult {
  double estimate = 0.0;
  double std_error = 0.0;
  long long n_paths = 0;
  std::uint64_t seed = 0;
  /// Share of paths that exited through the face t1 = 0.
  double face1_fraction = 0.0;
  long long censored = 0;
};

/// Monte Carlo mean of phi1(X^gamma(tau^beta), Y(tau^beta)) 1{tau^beta < tau^gamma}
/// + phi2(X^beta(tau^gamma), Y(tau^gamma)) 1{tau^gamma < tau^beta}, with Y a
/// Brownian motion of variance 2 per unit time. X is the remaining level.
McResult mc_solution(const BoundaryData& bd, const BvpQuery& q, long long n_paths,
                     std::uint64_t seed, const McOptions& opt = {});

}  // namespace fracgreen
