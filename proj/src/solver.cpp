#include "fracgreen/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fracgreen/simulate.hpp"

namespace fracgreen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct FaceSpec {
  double alpha_exit;  // order of the coordinate whose exit selects this face
  double t_exit;
  double alpha_other;
  double t_other;
};

struct FaceValue {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

// log of int_0^{t_other} p_s(u) f(g(u)) du for one boundary term with unit
// coefficient, in v = u s^(-1/alpha_other), q = log v.
double log_radial_average(const BoundaryFunction::Term& term, const FaceSpec& f, double s,
                          KernelConvention conv, const QuadratureConfig& qc,
                          double& max_rel_error, bool& converged) {
  const double a = f.alpha_other;
  const double log_scale = std::log(s) / a;
  const double q_hi = std::log(f.t_other) - log_scale;
  const double c = saddle_constants(a).decay;
  const double q_lo = (1.0 - a) / a * std::log(c / 100.0);
  if (!(q_hi > q_lo)) return -kInf;
  const auto w = stable_density_table(a);
  auto lf = [&](double q) {
    const double u = std::exp(q + log_scale);
    const double rho = conv == KernelConvention::position ? f.t_other - u : u;
    double v = w->log_density(std::exp(q)) + q;
    if (term.decay != 0.0) v -= term.decay * rho;
    if (term.power != 0.0) v += rho > 0.0 ? term.power * std::log(rho) : -kInf;
    return v;
  };
  QuadratureConfig cfg = qc;
  cfg.split_points.clear();
  if (q_lo < 0.0 && 0.0 < q_hi) cfg.split_points.push_back(0.0);
  const QuadResult r = integrate_log(lf, q_lo, q_hi, cfg);
  max_rel_error = std::max(max_rel_error, r.rel_error());
  converged = converged && r.converged;
  return r.log_value;
}

FaceValue face_value(const BoundaryFunction& phi, const FaceSpec& f,
                     const std::vector<double>& x, KernelConvention conv,
                     const QuadratureConfig& qc) {
  FaceValue out;
  if (phi.is_zero()) return out;
  double x2 = 0.0;
  for (double c : x) x2 += c * c;
  const double hd = 0.5 * static_cast<double>(x.size());
  const AbsorbedProcessParams exit_p{f.alpha_exit, f.t_exit};
  for (const auto& term : phi.terms()) {
    if (term.coefficient == 0.0) continue;
    double inner_rel = 0.0;
    bool inner_ok = true;
    auto lf = [&](double s) {
      double v = log_exit_time_density(exit_p, s);
      if (term.inv_width2 > 0.0) {
        const double g = 1.0 + 4.0 * term.inv_width2 * s;
        v += -hd * std::log(g) - term.inv_width2 * x2 / g;
      }
      return v + log_radial_average(term, f, s, conv, qc, inner_rel, inner_ok);
    };
    QuadratureConfig cfg = qc;
    cfg.tail_substitution = true;
    cfg.split_points = {std::pow(f.t_exit, f.alpha_exit), std::pow(f.t_other, f.alpha_other)};
    const QuadResult r = integrate_log_halfline(lf, cfg);
    const double v = term.coefficient * r.value();
    out.value += v;
    out.error += std::abs(v) * (r.rel_error() + inner_rel);
    out.converged = out.converged && r.converged && inner_ok;
  }
  return out;
}

double normal(Rng& rng) {
  // Box-Muller, one of the pair.
  const double u1 = uniform_open(rng), u2 = uniform_open(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> brownian_at(const std::vector<double>& x, double s, Rng& rng) {
  std::vector<double> y(x);
  const double sd = std::sqrt(2.0 * s);
  for (double& c : y) c += sd * normal(rng);
  return y;
}

}  // namespace

void BvpQuery::validate() const {
  if (!(t1 > 0.0) || !(t2 > 0.0) || !std::isfinite(t1) || !std::isfinite(t2)) {
    throw std::invalid_argument("BvpQuery: t1 and t2 must be positive");
  }
  mp.validate();
  qc.validate();
  if (x.size() != static_cast<std::size_t>(mp.dimension)) {
    throw std::invalid_argument("BvpQuery: x must have dimension " + std::to_string(mp.dimension));
  }
}

BvpResult solve_bvp(const BoundaryData& bd, const BvpQuery& q) {
  q.validate();
  const FaceSpec f1{q.mp.beta, q.t1, q.mp.gamma, q.t2};
  const FaceSpec f2{q.mp.gamma, q.t2, q.mp.beta, q.t1};
  const FaceValue v1 = face_value(bd.phi1, f1, q.x, q.convention, q.qc);
  const FaceValue v2 = face_value(bd.phi2, f2, q.x, q.convention, q.qc);
  BvpResult out;
  out.face1 = v1.value;
  out.face2 = v2.value;
  out.value = v1.value + v2.value;
  out.error = v1.error + v2.error;
  out.converged = v1.converged && v2.converged;
  return out;
}

KernelMass kernel_mass(const MixedOrderParams& mp, const QuadratureConfig& qc, double t1,
                       double t2, const std::vector<double>& x) {
  BvpQuery q;
  q.t1 = t1;
  q.t2 = t2;
  q.x = x;
  q.mp = mp;
  q.qc = qc;
  const BvpResult r = solve_bvp(BoundaryData{}, q);
  return {r.face1, r.face2, r.error, r.converged};
}

McResult mc_solution(const BoundaryData& bd, const BvpQuery& q, long long n_paths,
                     std::uint64_t seed, const McOptions& opt) {
  q.validate();
  if (n_paths < 1) throw std::invalid_argument("mc_solution: n_paths must be >= 1");
  const double b = q.mp.beta, g = q.mp.gamma;

  OrthantParams op;
  op.orders = {b, g};
  op.starts = {q.t1, q.t2};
  op.seed = seed;
  op.step = opt.step > 0.0 ? opt.step : 1e-2 * std::min(std::pow(q.t1, b), std::pow(q.t2, g));
  op.validate();

  const long long chunk = 4096;
  const auto chunks = static_cast<std::size_t>((n_paths + chunk - 1) / chunk);
  std::vector<CompensatedSum> sum(chunks), sum2(chunks);
  std::vector<long long> face1(chunks, 0), censored(chunks, 0);

  for_each_chunk(n_paths, chunk, opt.threads, [&](long long first, long long last,
                                                   std::size_t c) {
    for (long long i = first; i < last; ++i) {
      Rng rng = path_rng(seed, static_cast<std::uint64_t>(i));
      double v = 0.0;
      if (opt.method == McMethod::exact) {
        const double tau_b = std::exp(b * (std::log(q.t1) - std::log(sample_stable_increment(b, 1.0, rng))));
        const double used = std::pow(tau_b, 1.0 / g) * sample_stable_increment(g, 1.0, rng);
        if (used < q.t2) {
          ++face1[c];
          v = bd.phi1(q.t2 - used, brownian_at(q.x, tau_b, rng));
        } else {
          // gamma exits first: draw from the law of the other face given that
          // it is the one reached.
          for (long long tries = 0;; ++tries) {
            if (tries > 100'000'000) throw std::runtime_error("mc_solution: rejection stalled");
            const double tau_g =
                std::exp(g * (std::log(q.t2) - std::log(sample_stable_increment(g, 1.0, rng))));
            const double used_b = std::pow(tau_g, 1.0 / b) * sample_stable_increment(b, 1.0, rng);
            if (used_b < q.t1) {
              v = bd.phi2(q.t1 - used_b, brownian_at(q.x, tau_g, rng));
              break;
            }
          }
        }
      } else {
        const ExitEvent ev = simulate_exit(op, static_cast<std::uint64_t>(i));
        if (ev.censored) {
          ++censored[c];
          continue;
        }
        // simulate_exit consumes the (seed, i) stream, so Y gets its own.
        Rng yrng = path_rng(seed ^ 0x5851F42D4C957F2DULL, static_cast<std::uint64_t>(i));
        const auto y = brownian_at(q.x, ev.time, yrng);
        if (ev.index == 0) {
          ++face1[c];
          v = bd.phi1(ev.location[1], y);
        } else {
          v = bd.phi2(ev.location[0], y);
        }
      }
      sum[c].add(v);
      sum2[c].add(v * v);
    }
  });

  CompensatedSum s, s2;
  long long f1 = 0;
  McResult out;
  for (std::size_t c = 0; c < chunks; ++c) {
    s.add(sum[c].value());
    s2.add(sum2[c].value());
    f1 += face1[c];
    out.censored += censored[c];
  }
  const double n = static_cast<double>(n_paths - out.censored);
  if (!(n > 0.0)) throw std::runtime_error("mc_solution: every path censored");
  out.n_paths = n_paths;
  out.seed = seed;
  out.estimate = s.value() / n;
  const double var = std::max(0.0, s2.value() / n - out.estimate * out.estimate);
  out.std_error = n > 1.0 ? std::sqrt(var / (n - 1.0)) : 0.0;
  out.face1_fraction = static_cast<double>(f1) / n;
  return out;
}

}  // namespace fracgreen
