#include "fracgreen/greens.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "fracgreen/calibration.hpp"

namespace fracgreen {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_order(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in (0, 1), got " +
                                std::to_string(v));
  }
}

// log of int_lo^hi exp(lf(z)) dz; hi may be +inf, lo may be 0.
QuadResult log_integral(const std::function<double(double)>& lf, double lo, double hi,
                        const QuadratureConfig& qc, std::vector<double> splits) {
  if (!(hi > lo)) return QuadResult{};
  // Integrate in v = z - lo so that a mass concentrated in a sliver above lo
  // (steep stretched exponentials) stays resolvable in floating point.
  QuadratureConfig cfg = qc;
  std::vector<double> inside;
  for (double s : splits) {
    if (s > lo && s < hi && std::isfinite(s)) inside.push_back(s - lo);
  }
  if (std::isfinite(hi)) inside.push_back(hi - lo);
  cfg.split_points = inside;
  cfg.tail_substitution = true;
  const double width = hi - lo;
  auto shifted_lf = [&](double v) {
    if (v < 0.0 || v > width) return -kInf;
    return lf(lo + v);
  };
  return integrate_log_halfline(shifted_lf, cfg);
}

QuadResult shifted(QuadResult r, double log_factor) {
  r.log_value += log_factor;
  r.log_error += log_factor;
  return r;
}

void solve3(double m[3][4], double out[3]) {
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    }
    for (int k = 0; k < 4; ++k) std::swap(m[c][k], m[piv][k]);
    if (m[c][c] == 0.0) throw std::runtime_error("least squares: singular design");
    for (int r = 0; r < 3; ++r) {
      if (r == c) continue;
      const double f = m[r][c] / m[c][c];
      for (int k = c; k < 4; ++k) m[r][k] -= f * m[c][k];
    }
  }
  for (int c = 0; c < 3; ++c) out[c] = m[c][3] / m[c][c];
}

}  // namespace

void MixedOrderParams::validate() const {
  check_order(beta, "beta");
  check_order(gamma, "gamma");
  if (dimension < 1) throw std::invalid_argument("MixedOrderParams: dimension must be >= 1");
}

double ScalingCoordinates::prefactor() const { return std::exp(log_prefactor); }

void ScalingCoordinates::validate() const {
  if (!(omega >= 0.0) || !(cap_a > 0.0) || !(t > 0.0) || !std::isfinite(log_prefactor)) {
    throw std::invalid_argument("ScalingCoordinates: need omega >= 0, A > 0, t > 0");
  }
}

ScalingCoordinates scaling_coordinates(const MixedOrderParams& mp, double t, double r,
                                       std::span<const double> x,
                                       std::span<const double> y) {
  mp.validate();
  if (!(t > 0.0) || !(r > 0.0)) {
    throw std::invalid_argument("scaling_coordinates: t and r must be positive");
  }
  ScalingCoordinates sc;
  const double log_t = std::log(t);
  sc.t = t;
  sc.omega = squared_distance(x, y) * std::exp(-mp.beta * log_t);
  sc.cap_a = std::exp(mp.gamma * std::log(r) - mp.beta * log_t);
  sc.log_prefactor = (-mp.beta / mp.gamma - 0.5 * mp.dimension * mp.beta) * log_t;
  return sc;
}

ScalingCoordinates unit_scaling(double omega, double cap_a) {
  ScalingCoordinates sc;
  sc.omega = omega;
  sc.cap_a = cap_a;
  sc.validate();
  return sc;
}

PhysicalPoint physical_point(const MixedOrderParams& mp, double omega, double cap_a) {
  mp.validate();
  unit_scaling(omega, cap_a);
  PhysicalPoint p;
  p.r = std::pow(cap_a, 1.0 / mp.gamma);
  p.x.assign(static_cast<std::size_t>(mp.dimension), 0.0);
  p.y = p.x;
  p.y[0] = std::sqrt(omega);
  return p;
}

EnvelopeExponents envelope_exponents(const MixedOrderParams& mp) {
  mp.validate();
  const double a = mp.alpha_min(), at = mp.alpha_max(), g = mp.gamma;
  const double d = mp.dimension;
  EnvelopeExponents e;
  e.n1 = -0.5 * d * ((1.0 - a) / (2.0 - a)) + (1.0 - a) / (2.0 * (2.0 - a) * (1.0 - at));
  e.n2 = -0.5 * d / (2.0 - a) + 1.0 / (2.0 * (2.0 - a) * (1.0 - at)) + 1.0 / (2.0 * (1.0 - a)) -
         (2.0 - g) / (2.0 * g * (1.0 - g));
  return e;
}

std::vector<double> default_split_points(double cap_a) {
  return {std::min(cap_a, 1.0), std::max(cap_a, 1.0), 1.0};
}

QuadResult greens_quadrature(const MixedOrderParams& mp, const QuadratureConfig& qc,
                             double t, double r, std::span<const double> x,
                             std::span<const double> y) {
  mp.validate();
  qc.validate();
  if (!(t > 0.0) || !(r > 0.0)) {
    throw std::invalid_argument("greens_quadrature: t and r must be positive");
  }
  const auto d = static_cast<std::size_t>(mp.dimension);
  if (x.size() != d || y.size() != d) {
    throw std::invalid_argument("greens_quadrature: points must have dimension " +
                                std::to_string(mp.dimension));
  }
  const double dist2 = squared_distance(x, y);
  if (dist2 == 0.0 && mp.dimension >= 4) {
    throw std::invalid_argument("greens_quadrature: x = y is singular for d >= 4");
  }
  const auto wb = stable_density_table(mp.beta);
  const auto wg = stable_density_table(mp.gamma);
  const double log_t = std::log(t), log_r = std::log(r);
  const double b = mp.beta, g = mp.gamma, hd = 0.5 * mp.dimension;
  // t^beta mu_0^beta(t^beta z) = (1/beta) z^(-1-1/beta) w_beta(z^(-1/beta)) is
  // evaluated through mu_0 at the physical time s = t^beta z.
  auto lf = [&](double z) {
    const double log_s = b * log_t + std::log(z);
    const double s = std::exp(log_s);
    const double heat = -hd * (std::log(4.0 * kPi) + log_s) - dist2 / (4.0 * s);
    const double trans = -log_s / g + wg->log_density(std::exp(log_r - log_s / g));
    const double exit = std::log(t / b) - (1.0 + 1.0 / b) * log_s +
                        wb->log_density(std::exp(log_t - log_s / b)) + b * log_t;
    return heat + trans + exit;
  };
  const double cap_a = std::exp(g * log_r - b * log_t);
  const double omega = dist2 * std::exp(-b * log_t);
  QuadratureConfig cfg = qc;
  if (cfg.split_points.empty()) cfg.split_points = default_split_points(cap_a);
  if (omega > 0.0) cfg.split_points.push_back(omega);
  return integrate_log_halfline(lf, cfg);
}

QuadResult greens_normalized(const MixedOrderParams& mp, const QuadratureConfig& qc,
                             double omega, double cap_a) {
  const PhysicalPoint p = physical_point(mp, omega, cap_a);
  return greens_quadrature(mp, qc, 1.0, p.r, p.x, p.y);
}

double log_envelope_comparator(const MixedOrderParams& mp, const ScalingCoordinates& sc,
                               const EnvelopeOptions& opt) {
  mp.validate();
  sc.validate();
  const double g = mp.gamma;
  const double log_a = std::log(sc.cap_a);
  const double stretched = sc.omega * std::max(1.0 / sc.cap_a, 1.0);
  if (sc.omega <= 1.0) {
    const double p = opt.a_exponent == SmallOmegaExponent::inverse ? -1.0 - 1.0 / g
                                                                    : -1.0 - g;
    double shape = 0.0;
    if (mp.dimension == 4) {
      shape = std::log(std::abs(std::log(stretched)) + 1.0);
    } else if (mp.dimension >= 5) {
      shape = (2.0 - 0.5 * mp.dimension) * std::log(sc.omega);
    }
    return sc.log_prefactor + p * log_a + shape;
  }
  const EnvelopeExponents e = envelope_exponents(mp);
  return sc.log_prefactor + e.n1 * std::log(sc.omega) + e.n2 * log_a -
         std::pow(stretched, 1.0 / (2.0 - mp.alpha_min()));
}

EnvelopeBand envelope(const MixedOrderParams& mp, const ScalingCoordinates& sc,
                      const EnvelopeOptions& opt) {
  EnvelopeBand b;
  b.log_lower = b.log_upper = log_envelope_comparator(mp, sc, opt);
  b.branch = sc.omega <= 1.0 ? 1 : 2;
  const auto cal = default_calibration().envelope(mp.beta, mp.gamma, mp.dimension);
  const char* want = opt.a_exponent == SmallOmegaExponent::inverse ? "inverse" : "direct";
  if (cal && cal->a_exponent == want) {
    b.log_k_low = cal->log_k_low;
    b.log_k_high = cal->log_k_high;
  }
  return b;
}

std::vector<double> log_grid(double lo, double hi, int count, bool midpoints) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) {
    throw std::invalid_argument("log_grid: need 0 < lo <= hi and count >= 1");
  }
  std::vector<double> out;
  if (count == 1) return {lo};
  const double a = std::log(lo), b = std::log(hi);
  const int n = midpoints ? count - 1 : count;
  for (int i = 0; i < n; ++i) {
    const double f = midpoints ? (i + 0.5) / (count - 1) : static_cast<double>(i) / (count - 1);
    out.push_back(std::exp(a + (b - a) * f));
  }
  return out;
}

void parallel_for(int n, int threads, const std::function<void(int)>& f) {
  if (n <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex err_mu;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(err_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

EnvelopeSweep envelope_ratio_sweep(const MixedOrderParams& mp, const QuadratureConfig& qc,
                                   const std::vector<double>& omegas,
                                   const std::vector<double>& cap_as,
                                   const EnvelopeOptions& opt, int threads) {
  mp.validate();
  if (omegas.empty() || cap_as.empty()) {
    throw std::invalid_argument("envelope_ratio_sweep: grid must be nonempty");
  }
  // Build the tables up front so workers only read them.
  stable_density_table(mp.beta);
  stable_density_table(mp.gamma);
  EnvelopeSweep out;
  out.mp = mp;
  out.points.resize(omegas.size() * cap_as.size());
  parallel_for(static_cast<int>(out.points.size()), threads, [&](int idx) {
    SweepPoint& pt = out.points[static_cast<std::size_t>(idx)];
    pt.omega = omegas[static_cast<std::size_t>(idx) / cap_as.size()];
    pt.cap_a = cap_as[static_cast<std::size_t>(idx) % cap_as.size()];
    try {
      pt.comparator_log = log_envelope_comparator(mp, unit_scaling(pt.omega, pt.cap_a), opt);
      const QuadResult q = greens_normalized(mp, qc, pt.omega, pt.cap_a);
      pt.value_log = q.log_value;
      pt.log_error = q.log_error;
      pt.converged = q.converged;
      if (!std::isfinite(q.log_value)) {
        pt.failed = true;
        pt.message = "non-finite value";
      }
    } catch (const std::exception& e) {
      pt.failed = true;
      pt.message = e.what();
    }
  });
  SweepSummary& s = out.summary;
  s.min_log_ratio = kInf;
  s.max_log_ratio = -kInf;
  for (const auto& pt : out.points) {
    ++s.points;
    if (pt.failed) {
      ++s.failures;
      continue;
    }
    if (!pt.converged) ++s.unconverged;
    s.min_log_ratio = std::min(s.min_log_ratio, pt.log_ratio());
    s.max_log_ratio = std::max(s.max_log_ratio, pt.log_ratio());
  }
  return out;
}

void write_sweep_csv(std::ostream& os, const EnvelopeSweep& sweep) {
  os << "omega,cap_a,d,beta,gamma,value_log,comparator_log,ratio\n";
  const auto prec = os.precision(17);
  for (const auto& pt : sweep.points) {
    os << pt.omega << ',' << pt.cap_a << ',' << sweep.mp.dimension << ',' << sweep.mp.beta
       << ',' << sweep.mp.gamma << ',';
    if (pt.failed) {
      os << "nan,nan,nan\n";
      continue;
    }
    os << pt.value_log << ',' << pt.comparator_log << ',' << std::exp(pt.log_ratio()) << '\n';
  }
  os.precision(prec);
}

std::string sweep_summary_json(const EnvelopeSweep& sweep) {
  nlohmann::json j;
  j["beta"] = sweep.mp.beta;
  j["gamma"] = sweep.mp.gamma;
  j["d"] = sweep.mp.dimension;
  j["points"] = sweep.summary.points;
  j["min_log_ratio"] = sweep.summary.min_log_ratio;
  j["max_log_ratio"] = sweep.summary.max_log_ratio;
  j["min_ratio"] = std::exp(sweep.summary.min_log_ratio);
  j["max_ratio"] = std::exp(sweep.summary.max_log_ratio);
  j["log_spread"] = sweep.summary.log_spread();
  j["unconverged"] = sweep.summary.unconverged;
  j["failures"] = nlohmann::json::array();
  for (const auto& pt : sweep.points) {
    if (pt.failed) {
      j["failures"].push_back({{"omega", pt.omega}, {"cap_a", pt.cap_a}, {"error", pt.message}});
    }
  }
  return j.dump(2);
}

DecayFit fit_large_omega_decay(const MixedOrderParams& mp, const QuadratureConfig& qc,
                               double cap_a, double omega_lo, double omega_hi, int points) {
  mp.validate();
  if (points < 3) throw std::invalid_argument("fit_large_omega_decay: need >= 3 points");
  const auto omegas = log_grid(omega_lo, omega_hi, points);
  const EnvelopeExponents e = envelope_exponents(mp);
  std::vector<double> lo, lv;
  for (double om : omegas) {
    const QuadResult q = greens_normalized(mp, qc, om, cap_a);
    lo.push_back(std::log(om));
    lv.push_back(q.log_value - e.n1 * std::log(om));
  }
  // Local decay rate -dL/dlog(Omega) ~ kappa C Omega^kappa.
  std::vector<double> x, y;
  for (std::size_t i = 0; i + 1 < lo.size(); ++i) {
    const double rate = -(lv[i + 1] - lv[i]) / (lo[i + 1] - lo[i]);
    if (rate > 0.0) {
      x.push_back(0.5 * (lo[i] + lo[i + 1]));
      y.push_back(std::log(rate));
    }
  }
  if (x.size() < 2) throw std::runtime_error("fit_large_omega_decay: no decay detected");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  DecayFit f;
  f.exponent = sxy / sxx;
  f.predicted = 1.0 / (2.0 - mp.alpha_min());
  f.predicted_max = 1.0 / (2.0 - mp.alpha_max());
  return f;
}

ComponentIntegrals component_integrals(const MixedOrderParams& mp,
                                       const ScalingCoordinates& sc,
                                       const QuadratureConfig& qc) {
  mp.validate();
  sc.validate();
  const double b = mp.beta, g = mp.gamma, hd = 0.5 * mp.dimension;
  const double om = sc.omega, A = sc.cap_a, log_a = std::log(A);
  const double gp = 1.0 / (1.0 - g), bp = 1.0 / (1.0 - b);
  const double c_beta = saddle_constants(b).decay;
  const double small_pow = -1.0 - 1.0 / g;
  const double large_pow = -(2.0 - g) / (2.0 * g * (1.0 - g));
  std::vector<double> splits = default_split_points(A);
  if (om > 0.0) splits.push_back(om);

  ComponentIntegrals out;
  {
    auto lf = [&](double z) { return (1.0 - hd) * std::log(z) - om / z; };
    out.i1 = shifted(log_integral(lf, 0.0, std::min(A, 1.0), qc, splits),
                     sc.log_prefactor + small_pow * log_a);
  }
  if (A < 1.0) {
    auto lf = [&](double z) {
      return (0.5 * gp - hd) * std::log(z) - om / z - std::pow(z / A, gp);
    };
    out.i2 = shifted(log_integral(lf, A, 1.0, qc, splits), sc.log_prefactor + large_pow * log_a);
  }
  if (A > 1.0) {
    auto lf = [&](double z) {
      return (0.5 * bp - hd) * std::log(z) - om / z - c_beta * std::pow(z, bp);
    };
    out.i3 = shifted(log_integral(lf, 1.0, A, qc, splits), sc.log_prefactor + small_pow * log_a);
  }
  {
    const double n = -hd - 1.0 + 0.5 * bp + 0.5 * gp;
    auto lf = [&](double z) {
      return n * std::log(z) - om / z - std::pow(z / A, gp) - std::pow(z, bp);
    };
    out.i4 = shifted(log_integral(lf, std::max(A, 1.0), kInf, qc, splits),
                     sc.log_prefactor + large_pow * log_a);
  }
  return out;
}

OrderingReport ordering_constants(const MixedOrderParams& mp, const QuadratureConfig& qc,
                                  const std::vector<double>& omegas,
                                  const std::vector<double>& cap_as, int threads) {
  mp.validate();
  if (omegas.empty() || cap_as.empty()) {
    throw std::invalid_argument("ordering_constants: empty grid");
  }
  const int n = static_cast<int>(omegas.size() * cap_as.size());
  struct Cell {
    int quadrant = 0;
    double log_c = -kInf;
    double log_sum_ratio = 0.0;
  };
  std::vector<Cell> cells(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](int idx) {
    const double om = omegas[static_cast<std::size_t>(idx) / cap_as.size()];
    const double A = cap_as[static_cast<std::size_t>(idx) % cap_as.size()];
    const ScalingCoordinates sc = unit_scaling(om, A);
    const ComponentIntegrals ci = component_integrals(mp, sc, qc);
    const double l1 = ci.i1.log_value, l4 = ci.i4.log_value;
    const bool unit_a = std::abs(std::log(A)) < 1e-9;
    const double lm = A < 1.0 ? ci.i2.log_value : ci.i3.log_value;
    Cell c;
    c.quadrant = (om <= 1.0 ? 0 : 2) + (A <= 1.0 || unit_a ? 0 : 1);
    const bool small = om <= 1.0;
    const double lo_end = small ? l4 : l1, hi_end = small ? l1 : l4;
    if (unit_a) {
      c.log_c = lo_end - hi_end;
    } else {
      c.log_c = std::max(lo_end - lm, lm - hi_end);
    }
    const double sum = log_add(log_add(l1, ci.i2.log_value), log_add(ci.i3.log_value, l4));
    c.log_sum_ratio = sum - greens_normalized(mp, qc, om, A).log_value;
    cells[static_cast<std::size_t>(idx)] = c;
  });
  OrderingReport out;
  out.log_c.fill(-kInf);
  for (int idx = 0; idx < n; ++idx) {
    const Cell& c = cells[static_cast<std::size_t>(idx)];
    const auto q = static_cast<std::size_t>(c.quadrant);
    ++out.points[q];
    out.max_log_sum_ratio = std::max(out.max_log_sum_ratio, std::abs(c.log_sum_ratio));
    if (c.log_c > out.log_c[q]) {
      out.log_c[q] = c.log_c;
      out.worst_omega[q] = omegas[static_cast<std::size_t>(idx) / cap_as.size()];
      out.worst_cap_a[q] = cap_as[static_cast<std::size_t>(idx) % cap_as.size()];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void KDimParams::validate() const {
  if (orders.size() < 2) throw std::invalid_argument("KDimParams: need k >= 2 orders");
  for (double b : orders) check_order(b, "order");
  if (boundary_index < 1 || boundary_index > k()) {
    throw std::invalid_argument("KDimParams: boundary_index out of range");
  }
  if (levels.size() != orders.size() - 1) {
    throw std::invalid_argument("KDimParams: need k - 1 levels");
  }
  for (double r : levels) {
    if (!(r > 0.0)) throw std::invalid_argument("KDimParams: levels must be positive");
  }
  if (dimension < 1) throw std::invalid_argument("KDimParams: dimension must be >= 1");
}

namespace {

// Orders of the non-boundary coordinates, aligned with kp.levels.
std::vector<double> other_orders(const KDimParams& kp) {
  std::vector<double> out;
  for (int j = 0; j < kp.k(); ++j) {
    if (j + 1 != kp.boundary_index) out.push_back(kp.orders[static_cast<std::size_t>(j)]);
  }
  return out;
}

}  // namespace

double KDimParams::log_a1(double t_boundary) const {
  validate();
  const auto others = other_orders(*this);
  double acc = -orders[static_cast<std::size_t>(boundary_index - 1)] * std::log(t_boundary);
  for (std::size_t j = 0; j < others.size(); ++j) acc += others[j] * std::log(levels[j]);
  return acc;
}

double KDimParams::log_pi1(double t_boundary) const {
  const double bi = orders[static_cast<std::size_t>(boundary_index - 1)];
  const double la = log_a1(t_boundary);
  double acc = 0.0;
  for (double bj : other_orders(*this)) {
    acc += -(bi / bj) * std::log(t_boundary) + (-1.0 - 1.0 / bj) * la;
  }
  return acc;
}

double KDimParams::log_pi2(double t_boundary) const {
  const double bi = orders[static_cast<std::size_t>(boundary_index - 1)];
  const double la = log_a1(t_boundary);
  double acc = 0.0;
  for (double bj : other_orders(*this)) {
    acc += -(bi / bj) * std::log(t_boundary) - (2.0 - bj) / (2.0 * bj * (1.0 - bj)) * la;
  }
  return acc;
}

QuadResult kdim_greens_quadrature(const KDimParams& kp, const QuadratureConfig& qc,
                                  double t_boundary, std::span<const double> x,
                                  std::span<const double> y) {
  kp.validate();
  qc.validate();
  if (!(t_boundary > 0.0)) throw std::invalid_argument("kdim: t must be positive");
  const auto d = static_cast<std::size_t>(kp.dimension);
  if (x.size() != d || y.size() != d) {
    throw std::invalid_argument("kdim: points must have dimension " +
                                std::to_string(kp.dimension));
  }
  const double dist2 = squared_distance(x, y);
  if (dist2 == 0.0 && kp.dimension >= 2 * kp.k()) {
    throw std::invalid_argument("kdim: x = y is singular for d >= 2k");
  }
  const double bi = kp.orders[static_cast<std::size_t>(kp.boundary_index - 1)];
  const auto others = other_orders(kp);
  std::vector<std::shared_ptr<const StableDensity>> tables;
  std::vector<double> log_levels;
  double inv_sum = 1.0 / bi;
  for (std::size_t j = 0; j < others.size(); ++j) {
    tables.push_back(stable_density_table(others[j]));
    log_levels.push_back(std::log(kp.levels[j]));
    inv_sum += 1.0 / others[j];
  }
  const auto wi = stable_density_table(bi);
  const double log_t = std::log(t_boundary);
  const double hd = 0.5 * kp.dimension;
  auto lf = [&](double s) {
    const double log_s = std::log(s);
    double acc = std::log(t_boundary / bi) - hd * std::log(4.0 * kPi * s) - dist2 / (4.0 * s) -
                 (1.0 + inv_sum) * log_s + wi->log_density(std::exp(log_t - log_s / bi));
    for (std::size_t j = 0; j < tables.size(); ++j) {
      acc += tables[j]->log_density(std::exp(log_levels[j] - log_s / others[j]));
    }
    return acc;
  };
  QuadratureConfig cfg = qc;
  if (cfg.split_points.empty()) {
    cfg.split_points.push_back(std::exp(bi * log_t));
    for (std::size_t j = 0; j < others.size(); ++j) {
      cfg.split_points.push_back(std::exp(others[j] * log_levels[j]));
    }
  }
  if (dist2 > 0.0) cfg.split_points.push_back(dist2);
  return integrate_log_halfline(lf, cfg);
}

double log_conjecture_comparator(const KDimParams& kp, double t_boundary, double omega) {
  kp.validate();
  if (!(omega >= 0.0)) throw std::invalid_argument("conjecture: omega must be >= 0");
  const double bi = kp.orders[static_cast<std::size_t>(kp.boundary_index - 1)];
  const double base = -0.5 * kp.dimension * bi * std::log(t_boundary);
  const double a1 = std::exp(kp.log_a1(t_boundary));
  const double stretched = omega / std::min(a1, 1.0);
  const int k = kp.k(), d = kp.dimension;
  if (omega <= 1.0) {
    double shape = 0.0;
    if (d == 2 * k) {
      shape = std::log(std::abs(std::log(stretched)) + 1.0);
    } else if (d >= 2 * k + 1) {
      shape = (2.0 - 0.5 * d) * std::log(omega);
    }
    return base + kp.log_pi1(t_boundary) + shape;
  }
  const double amin = *std::min_element(kp.orders.begin(), kp.orders.end());
  return base + kp.log_pi2(t_boundary) - std::pow(stretched, 1.0 / (2.0 - amin));
}

ConjectureSummary conjecture_experiment(const KDimParams& kp, const QuadratureConfig& qc,
                                        const std::vector<double>& omegas,
                                        const std::vector<double>& a1s, int threads) {
  if (omegas.empty() || a1s.empty()) {
    throw std::invalid_argument("conjecture_experiment: grid must be nonempty");
  }
  const int k = kp.k();
  for (double b : kp.orders) stable_density_table(b);
  ConjectureSummary out;
  out.points.resize(omegas.size() * a1s.size());
  parallel_for(static_cast<int>(out.points.size()), threads, [&](int idx) {
    ConjecturePoint& pt = out.points[static_cast<std::size_t>(idx)];
    pt.omega = omegas[static_cast<std::size_t>(idx) / a1s.size()];
    pt.a1 = a1s[static_cast<std::size_t>(idx) % a1s.size()];
    KDimParams local = kp;
    local.levels.clear();
    for (int j = 0; j < k; ++j) {
      if (j + 1 == kp.boundary_index) continue;
      local.levels.push_back(
          std::pow(pt.a1, 1.0 / ((k - 1) * kp.orders[static_cast<std::size_t>(j)])));
    }
    std::vector<double> x(static_cast<std::size_t>(kp.dimension), 0.0), y = x;
    y[0] = std::sqrt(pt.omega);
    try {
      const QuadResult q = kdim_greens_quadrature(local, qc, 1.0, x, y);
      pt.value_log = q.log_value;
      pt.converged = q.converged;
      pt.comparator_log = log_conjecture_comparator(local, 1.0, pt.omega);
      pt.failed = !std::isfinite(pt.value_log) || !std::isfinite(pt.comparator_log);
    } catch (const std::exception&) {
      pt.failed = true;
    }
  });
  out.min_log_ratio = kInf;
  out.max_log_ratio = -kInf;
  double m[3][4] = {};
  for (const auto& pt : out.points) {
    if (pt.failed) {
      out.finite = false;
      continue;
    }
    const double lr = pt.value_log - pt.comparator_log;
    out.min_log_ratio = std::min(out.min_log_ratio, lr);
    out.max_log_ratio = std::max(out.max_log_ratio, lr);
    if (pt.omega > 1.0) {
      const double row[3] = {1.0, std::log(pt.omega), std::log(pt.a1)};
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) m[i][j] += row[i] * row[j];
        m[i][3] += row[i] * lr;
      }
      ++out.large_omega_points;
    }
  }
  out.finite = out.finite && std::isfinite(out.min_log_ratio) && std::isfinite(out.max_log_ratio);
  if (out.large_omega_points >= 3) {
    double coef[3];
    try {
      solve3(m, coef);
      out.fitted_omega_exponent = coef[1];
      out.fitted_a_exponent = coef[2];
    } catch (const std::runtime_error&) {
      // Degenerate grid (single A_1 column); leave the fit at zero.
    }
  }
  return out;
}

}  // namespace fracgreen
