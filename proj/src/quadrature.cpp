#include "fracgreen/quadrature.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace fracgreen {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
using Gauss = boost::math::quadrature::gauss<double, 10>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Segment {
  double a, b, integral, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

// QUADPACK qk21 with its error heuristic.
template <class F>
Segment gk21(F& f, double a, double b) {
  static const auto& xk = Kronrod::abscissa();  // ascending, xk[0] == 0
  static const auto& wk = Kronrod::weights();
  static const auto& wg = Gauss::weights();  // pairs with xk[1], xk[3], ...

  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<double, 21> fv{};
  fv[0] = f(center);
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const double dx = half * xk[i];
    fv[2 * i - 1] = f(center - dx);
    fv[2 * i] = f(center + dx);
  }

  double kron = wk[0] * fv[0];
  double gauss = 0.0;
  double resabs = std::abs(kron);
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const double pair = fv[2 * i - 1] + fv[2 * i];
    kron += wk[i] * pair;
    resabs += wk[i] * (std::abs(fv[2 * i - 1]) + std::abs(fv[2 * i]));
    if (i % 2 == 1) gauss += wg[(i - 1) / 2] * pair;
  }
  const double mean = 0.5 * kron;
  double resasc = wk[0] * std::abs(fv[0] - mean);
  for (std::size_t i = 1; i < xk.size(); ++i) {
    resasc += wk[i] * (std::abs(fv[2 * i - 1] - mean) +
                       std::abs(fv[2 * i] - mean));
  }
  kron *= half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((kron - gauss * half));
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * resabs, err);
  }
  return {a, b, kron, err};
}

struct RawResult {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
  bool converged = true;
};

template <class F>
RawResult adaptive(F& f, const std::vector<double>& edges,
                   const QuadratureConfig& cfg) {
  std::vector<Segment> heap;
  heap.reserve(edges.size() + 2 * static_cast<std::size_t>(cfg.max_subdivisions));
  double total = 0.0;
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i + 1] > edges[i])) continue;
    heap.push_back(gk21(f, edges[i], edges[i + 1]));
    total += heap.back().integral;
    total_err += heap.back().error;
  }
  std::make_heap(heap.begin(), heap.end());

  RawResult out;
  int splits = 0;
  auto target = [&] { return std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total)); };
  while (!heap.empty() && total_err > target()) {
    if (splits >= cfg.max_subdivisions) {
      out.converged = false;
      break;
    }
    std::pop_heap(heap.begin(), heap.end());
    Segment worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval exhausted at machine resolution; keep its contribution.
      out.converged = false;
      worst.error = 0.0;
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end());
      total_err = 0.0;
      for (const auto& s : heap) total_err += s.error;
      continue;
    }
    const Segment left = gk21(f, worst.a, mid);
    const Segment right = gk21(f, mid, worst.b);
    total += left.integral + right.integral - worst.integral;
    total_err += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end());
    ++splits;
    if (splits % 64 == 0) {
      total = 0.0;
      total_err = 0.0;
      for (const auto& s : heap) {
        total += s.integral;
        total_err += s.error;
      }
    }
  }
  total = 0.0;
  total_err = 0.0;
  for (const auto& s : heap) {
    total += s.integral;
    total_err += s.error;
  }
  out.value = total;
  out.error = total_err;
  out.subdivisions = splits;
  return out;
}

std::vector<double> edges_with_splits(double a, double b,
                                      const std::vector<double>& splits) {
  std::vector<double> edges{a};
  std::vector<double> inner;
  for (double s : splits) {
    if (s > a && s < b) inner.push_back(s);
  }
  std::sort(inner.begin(), inner.end());
  inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
  edges.insert(edges.end(), inner.begin(), inner.end());
  edges.push_back(b);
  return edges;
}

// Integrates exp(log_f) over the given edges with a running log shift. The
// shift starts at the largest value seen on a pre-scan and is raised if the
// adaptive pass discovers a higher peak.
QuadResult integrate_log_edges(const LogIntegrand& log_f,
                               const std::vector<double>& edges_in,
                               const QuadratureConfig& cfg) {
  double shift = -kInf;
  double peak_x = std::numeric_limits<double>::quiet_NaN();
  auto probe = [&](double x) {
    const double v = log_f(x);
    if (v > shift) {
      shift = v;
      peak_x = x;
    }
  };
  for (std::size_t i = 0; i + 1 < edges_in.size(); ++i) {
    const double a = edges_in[i], b = edges_in[i + 1];
    constexpr int kScan = 48;
    for (int k = 0; k < kScan; ++k) probe(a + (b - a) * (k + 0.5) / kScan);
    // Sharp peaks hugging an endpoint slip between uniform probes.
    for (int j = 2; j <= 15; ++j) {
      const double d = (b - a) * std::pow(10.0, -j);
      probe(a + d);
      probe(b - d);
    }
  }
  std::vector<double> edges = edges_in;
  if (std::isfinite(peak_x)) {
    edges.push_back(peak_x);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }
  QuadResult res;
  for (int attempt = 0; attempt < 4; ++attempt) {
    double seen = -kInf;
    const double s = std::isfinite(shift) ? shift : 0.0;
    auto scaled = [&](double x) {
      const double lf = log_f(x);
      if (lf > seen) seen = lf;
      return std::exp(lf - s);
    };
    const RawResult raw = adaptive(scaled, edges, cfg);
    const bool overflowed = !std::isfinite(raw.value);
    const bool lost = raw.value == 0.0 && seen > s - 600.0 && seen != s;
    if (std::isfinite(seen) && (seen > s + 300.0 || overflowed || lost)) {
      shift = seen;
      continue;
    }
    if (!std::isfinite(seen)) {
      res.log_value = -kInf;
      res.log_error = -kInf;
      res.subdivisions = raw.subdivisions;
      res.converged = raw.converged;
      return res;
    }
    res.log_value = raw.value > 0.0 ? std::log(raw.value) + s : -kInf;
    res.log_error = raw.error > 0.0 ? std::log(raw.error) + s : -kInf;
    res.subdivisions = raw.subdivisions;
    res.converged = raw.converged;
    return res;
  }
  throw std::runtime_error("integrate_log: log shift failed to stabilise");
}

}  // namespace

void QuadratureConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw std::invalid_argument("QuadratureConfig: tolerances must be positive");
  }
  if (max_subdivisions < 1) {
    throw std::invalid_argument("QuadratureConfig: max_subdivisions must be >= 1");
  }
}

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

Estimate integrate(const Integrand& f, double a, double b,
                   const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(b > a)) throw std::invalid_argument("integrate: need a < b");
  auto fn = [&](double x) { return f(x); };
  const RawResult raw = adaptive(fn, edges_with_splits(a, b, cfg.split_points), cfg);
  return {raw.value, raw.error, raw.subdivisions, raw.converged};
}

QuadResult integrate_log(const LogIntegrand& log_f, double a, double b,
                         const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(b > a)) throw std::invalid_argument("integrate_log: need a < b");
  return integrate_log_edges(log_f, edges_with_splits(a, b, cfg.split_points), cfg);
}

namespace {

// Walks outward from `start` until g has dropped kTruncationDrop below the
// running peak and is still falling. Returns the truncation point.
double find_cutoff(const std::function<double(double)>& g, double start,
                   double direction, double& peak, bool& ok) {
  constexpr double kLimit = 700.0;
  double u = start;
  double h = 0.25;
  double prev = g(u);
  peak = std::max(peak, prev);
  while (std::abs(u) < kLimit) {
    u += direction * h;
    const double cur = g(u);
    peak = std::max(peak, cur);
    if (cur < peak - kTruncationDrop && cur <= prev) return u;
    prev = cur;
    h = std::min(h * 1.25, 8.0);
  }
  ok = false;
  return direction * kLimit;
}

}  // namespace

QuadResult integrate_log_halfline(const LogIntegrand& log_f,
                                  const QuadratureConfig& cfg) {
  cfg.validate();
  std::vector<double> splits;
  for (double s : cfg.split_points) {
    if (s > 0.0 && std::isfinite(s)) splits.push_back(s);
  }
  std::sort(splits.begin(), splits.end());
  splits.erase(std::unique(splits.begin(), splits.end()), splits.end());

  if (cfg.tail_substitution) {
    auto g = [&](double u) { return log_f(std::exp(u)) + u; };
    std::vector<double> us;
    for (double s : splits) us.push_back(std::log(s));
    if (us.empty()) us.push_back(0.0);

    double peak = -kInf;
    double peak_u = us.front();
    // Coarse scan across the breakpoint span to locate the peak.
    const double span_lo = us.front() - 4.0, span_hi = us.back() + 4.0;
    for (int k = 0; k <= 64; ++k) {
      const double u = span_lo + (span_hi - span_lo) * k / 64.0;
      const double v = g(u);
      if (v > peak) {
        peak = v;
        peak_u = u;
      }
    }
    bool ok = true;
    const double lo = find_cutoff(g, std::min(us.front(), peak_u), -1.0, peak, ok);
    const double hi = find_cutoff(g, std::max(us.back(), peak_u), 1.0, peak, ok);
    std::vector<double> inner = us;
    inner.push_back(peak_u);
    QuadratureConfig sub = cfg;
    sub.split_points = inner;
    QuadResult r = integrate_log_edges(g, edges_with_splits(lo, hi, inner), sub);
    r.converged = r.converged && ok;
    return r;
  }

  // Head on (0, b0] linearly, middle segments linearly, tail via v/(1-v).
  const double bl = splits.empty() ? 1.0 : splits.back();
  QuadratureConfig sub = cfg;
  sub.split_points = splits;
  QuadResult head = integrate_log_edges(log_f, edges_with_splits(0.0, bl, splits), sub);
  auto tail = [&](double v) {
    const double z = bl + v / (1.0 - v);
    return log_f(z) - 2.0 * std::log1p(-v);
  };
  QuadResult t = integrate_log_edges(tail, {0.0, 1.0}, cfg);
  QuadResult r;
  r.log_value = log_add(head.log_value, t.log_value);
  r.log_error = log_add(head.log_error, t.log_error);
  r.subdivisions = head.subdivisions + t.subdivisions;
  r.converged = head.converged && t.converged;
  return r;
}

}  // namespace fracgreen
