#include "fracgreen/simulate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "fracgreen/densities.hpp"
#include "fracgreen/greens.hpp"

namespace fracgreen {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void check_alpha(double a) {
  if (!(a > 0.0 && a < 1.0)) {
    throw std::invalid_argument("stability index must lie in (0, 1), got " + std::to_string(a));
  }
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error(where + ": cannot parse number '" + s + "'");
  }
  return v;
}

// Shared stepping loop. `record` receives each new row (time, levels).
template <class Record>
ExitEvent run_path(const OrthantParams& op, std::uint64_t path_index, double horizon,
                   Record&& record) {
  const int k = op.k();
  const double h = op.effective_step();
  Rng rng = path_rng(op.seed, path_index);
  std::vector<double> level(op.starts);
  std::vector<double> inc(static_cast<std::size_t>(k));
  record(0.0, level);
  ExitEvent ev;
  for (long long n = 1; n <= op.max_steps; ++n) {
    const double lower = static_cast<double>(n - 1) * h;
    if (lower >= horizon) break;
    const double upper = static_cast<double>(n) * h;
    int winner = -1;
    double best = 2.0;
    for (int i = 0; i < k; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      inc[ui] = sample_stable_increment(op.orders[ui], h, rng);
      if (level[ui] - inc[ui] <= 0.0) {
        const double frac = level[ui] / inc[ui];
        if (frac < best) {
          best = frac;
          winner = i;
        }
      }
    }
    if (winner < 0) {
      for (int i = 0; i < k; ++i) level[static_cast<std::size_t>(i)] -= inc[static_cast<std::size_t>(i)];
      record(upper, level);
      continue;
    }
    for (int i = 0; i < k; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (i == winner) {
        level[ui] = 0.0;
      } else if (level[ui] - inc[ui] <= 0.0) {
        level[ui] -= best * inc[ui];
      } else {
        level[ui] -= inc[ui];
      }
    }
    record(upper, level);
    ev.lower = lower;
    ev.upper = upper;
    ev.time = lower + best * h;
    ev.index = winner;
    ev.location = level;
    return ev;
  }
  ev.censored = true;
  ev.location = level;
  return ev;
}

}  // namespace

Rng path_rng(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed;
  const std::uint64_t a = splitmix64(state);
  state = a ^ (index * 0xD1B54A32D192ED03ULL);
  const std::uint64_t b = splitmix64(state);
  return Rng(b);
}

double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double sample_stable_increment(double alpha, double dt, Rng& rng) {
  check_alpha(alpha);
  if (!(dt > 0.0)) throw std::invalid_argument("sample_stable_increment: dt must be positive");
  const double u = kPi * uniform_open(rng);
  const double e = -std::log(uniform_open(rng));
  const double log_s = std::log(dt) / alpha + std::log(std::sin(alpha * u)) -
                       std::log(std::sin(u)) / alpha +
                       (1.0 - alpha) / alpha * (std::log(std::sin((1.0 - alpha) * u)) - std::log(e));
  return std::exp(log_s);
}

double OrthantParams::effective_step() const {
  if (step > 0.0) return step;
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < orders.size(); ++i) m = std::min(m, std::pow(starts[i], orders[i]));
  return 1e-3 * m;
}

void OrthantParams::validate() const {
  if (orders.empty()) throw std::invalid_argument("OrthantParams: need at least one coordinate");
  if (orders.size() != starts.size()) {
    throw std::invalid_argument("OrthantParams: orders and starts differ in length");
  }
  for (double a : orders) check_alpha(a);
  for (double t : starts) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw std::invalid_argument("OrthantParams: starts must be positive");
    }
  }
  if (step < 0.0 || !std::isfinite(step)) {
    throw std::invalid_argument("OrthantParams: step must be positive (or 0 for default)");
  }
  if (max_steps < 1) throw std::invalid_argument("OrthantParams: max_steps must be >= 1");
}

ExitEvent simulate_exit(const OrthantParams& op, std::uint64_t path_index, double horizon) {
  op.validate();
  return run_path(op, path_index, horizon, [](double, const std::vector<double>&) {});
}

PathSample sample_path(const OrthantParams& op, std::uint64_t path_index) {
  op.validate();
  PathSample ps;
  ps.levels.resize(op.starts.size());
  const ExitEvent ev = run_path(op, path_index, std::numeric_limits<double>::infinity(),
                                [&](double s, const std::vector<double>& lv) {
                                  ps.times.push_back(s);
                                  for (std::size_t i = 0; i < lv.size(); ++i) {
                                    ps.levels[i].push_back(lv[i]);
                                  }
                                });
  const std::size_t n = ps.times.size();
  ps.exit_upper = ps.times.back();
  ps.exit_lower = n >= 2 ? ps.times[n - 2] : ps.times.back();
  ps.exit_index = ev.index;
  ps.exit_location = ev.location;
  ps.censored = ev.censored;
  return ps;
}

// ---------------------------------------------------------------------------

double ks_statistic(std::vector<double>& sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::vector<double>& a, std::vector<double>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_two_sample_critical(std::size_t n, std::size_t m, double level) {
  // c(level) = sqrt(-log(level / 2) / 2)
  const double c = std::sqrt(-0.5 * std::log(0.5 * level));
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return c * std::sqrt((dn + dm) / (dn * dm));
}

void CompensatedSum::add(double v) {
  const double t = sum + v;
  if (std::abs(sum) >= std::abs(v)) {
    c += (sum - t) + v;
  } else {
    c += (v - t) + sum;
  }
  sum = t;
}

void for_each_chunk(long long n, long long chunk, int threads,
                    const std::function<void(long long, long long, std::size_t)>& body) {
  if (n <= 0) return;
  const long long chunks = (n + chunk - 1) / chunk;
  parallel_for(static_cast<int>(chunks), threads, [&](int c) {
    const long long first = static_cast<long long>(c) * chunk;
    body(first, std::min(n, first + chunk), static_cast<std::size_t>(c));
  });
}

// ---------------------------------------------------------------------------

std::function<double(double)> tabulated_exit_cdf(double alpha, double t, double lo, double hi,
                                                  int points) {
  if (!(lo > 0.0 && hi > lo) || points < 2) {
    throw std::invalid_argument("tabulated_exit_cdf: need 0 < lo < hi and points >= 2");
  }
  const AbsorbedProcessParams p{alpha, t};
  const double a = std::log(lo), b = std::log(hi);
  std::vector<double> f(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    f[static_cast<std::size_t>(i)] = exit_time_cdf(p, std::exp(a + (b - a) * i / (points - 1)));
  }
  return [p, a, b, f = std::move(f)](double s) {
    if (!(s > 0.0)) return 0.0;
    const double u = (std::log(s) - a) / (b - a) * static_cast<double>(f.size() - 1);
    if (u < 0.0 || u > static_cast<double>(f.size() - 1)) return exit_time_cdf(p, s);
    const auto i = std::min(static_cast<std::size_t>(u), f.size() - 2);
    const double w = u - static_cast<double>(i);
    return (1.0 - w) * f[i] + w * f[i + 1];
  };
}

ExitDensityEstimate estimate_exit_density(double alpha, double t, long long n_paths, double step,
                                          std::uint64_t seed, int bins, int threads) {
  if (n_paths < 1000) throw std::invalid_argument("estimate_exit_density: need n_paths >= 1000");
  if (bins < 1) throw std::invalid_argument("estimate_exit_density: need bins >= 1");
  OrthantParams op;
  op.orders = {alpha};
  op.starts = {t};
  op.step = step;
  op.seed = seed;
  op.validate();

  ExitDensityEstimate out;
  out.alpha = alpha;
  out.t = t;
  out.step = op.effective_step();
  out.seed = seed;
  out.n_paths = n_paths;
  std::vector<double> mids(static_cast<std::size_t>(n_paths), -1.0);
  std::vector<double> width(static_cast<std::size_t>(n_paths), 0.0);
  for_each_chunk(n_paths, 4096, threads, [&](long long first, long long last, std::size_t) {
    for (long long i = first; i < last; ++i) {
      const ExitEvent ev = simulate_exit(op, static_cast<std::uint64_t>(i));
      if (ev.censored) continue;
      mids[static_cast<std::size_t>(i)] = 0.5 * (ev.lower + ev.upper);
      width[static_cast<std::size_t>(i)] = ev.upper - ev.lower;
    }
  });
  CompensatedSum wsum;
  for (std::size_t i = 0; i < mids.size(); ++i) {
    if (mids[i] < 0.0) {
      ++out.censored;
    } else {
      out.samples.push_back(mids[i]);
      wsum.add(width[i]);
    }
  }
  if (out.samples.empty()) throw std::runtime_error("estimate_exit_density: every path censored");
  std::sort(out.samples.begin(), out.samples.end());
  out.mean_bracket = wsum.value() / static_cast<double>(out.samples.size());

  const double lo = out.samples.front(), hi = out.samples.back();
  auto cdf = tabulated_exit_cdf(alpha, t, lo, hi);
  out.ks_distance = ks_statistic(out.samples, cdf);

  const double la = std::log(lo), lb = std::log(hi) + 1e-12;
  out.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) {
    out.bin_edges[static_cast<std::size_t>(i)] = std::exp(la + (lb - la) * i / bins);
  }
  std::vector<long long> counts(static_cast<std::size_t>(bins), 0);
  for (double s : out.samples) {
    auto it = std::upper_bound(out.bin_edges.begin(), out.bin_edges.end(), s);
    const auto b = std::clamp<std::ptrdiff_t>(it - out.bin_edges.begin() - 1, 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  out.bin_density.resize(static_cast<std::size_t>(bins));
  for (std::size_t b = 0; b < counts.size(); ++b) {
    out.bin_density[b] = static_cast<double>(counts[b]) /
                         (static_cast<double>(n_paths) * (out.bin_edges[b + 1] - out.bin_edges[b]));
  }
  return out;
}

RuinEstimate estimate_ruin_probability(const OrthantParams& op, double horizon,
                                       long long n_paths, int threads) {
  op.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("ruin: horizon must be positive");
  if (n_paths < 1) throw std::invalid_argument("ruin: n_paths must be >= 1");
  const long long chunk = 4096;
  const auto chunks = static_cast<std::size_t>((n_paths + chunk - 1) / chunk);
  std::vector<long long> ruined(chunks, 0), censored(chunks, 0);
  for_each_chunk(n_paths, chunk, threads, [&](long long first, long long last, std::size_t c) {
    for (long long i = first; i < last; ++i) {
      const ExitEvent ev = simulate_exit(op, static_cast<std::uint64_t>(i), horizon);
      if (ev.censored) {
        if (static_cast<double>(op.max_steps) * op.effective_step() < horizon) ++censored[c];
      } else if (ev.time <= horizon) {
        ++ruined[c];
      }
    }
  });
  RuinEstimate out;
  out.n_paths = n_paths;
  out.seed = op.seed;
  long long hits = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    hits += ruined[c];
    out.censored_count += censored[c];
  }
  const double n = static_cast<double>(n_paths);
  out.estimate = static_cast<double>(hits) / n;
  out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / n);
  return out;
}

// ---------------------------------------------------------------------------

std::string path_csv_header(int k) {
  std::string h = "s";
  for (int i = 1; i <= k; ++i) h += ",x" + std::to_string(i);
  return h;
}

void export_path_csv(const PathSample& ps, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::system_error(errno, std::generic_category(), "cannot open " + path);
  }
  out << path_csv_header(static_cast<int>(ps.levels.size())) << '\n';
  for (std::size_t n = 0; n < ps.times.size(); ++n) {
    out << format_double(ps.times[n]);
    for (const auto& lv : ps.levels) out << ',' << format_double(lv[n]);
    out << '\n';
  }
  out.flush();
  if (!out) throw std::system_error(errno, std::generic_category(), "write failed for " + path);
}

PathSample read_path_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::system_error(errno, std::generic_category(), "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
  const auto k = static_cast<int>(std::count(line.begin(), line.end(), ','));
  if (k < 1 || line != path_csv_header(k)) {
    throw std::runtime_error(path + ": header must be s,x1,...,xk, got '" + line + "'");
  }
  PathSample ps;
  ps.levels.resize(static_cast<std::size_t>(k));
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      vals.push_back(parse_double(cell, path + ":" + std::to_string(row)));
    }
    if (vals.size() != static_cast<std::size_t>(k) + 1) {
      throw std::runtime_error(path + ":" + std::to_string(row) + ": expected " +
                               std::to_string(k + 1) + " fields");
    }
    ps.times.push_back(vals[0]);
    for (int i = 0; i < k; ++i) ps.levels[static_cast<std::size_t>(i)].push_back(vals[static_cast<std::size_t>(i) + 1]);
  }
  if (ps.times.empty()) throw std::runtime_error(path + ": no rows");
  const std::size_t n = ps.times.size();
  ps.exit_upper = ps.times.back();
  ps.exit_lower = n >= 2 ? ps.times[n - 2] : ps.times.back();
  for (const auto& lv : ps.levels) ps.exit_location.push_back(lv.back());
  for (int i = 0; i < k; ++i) {
    if (ps.exit_location[static_cast<std::size_t>(i)] <= 0.0) {
      ps.exit_index = i;
      break;
    }
  }
  ps.censored = ps.exit_index < 0;
  return ps;
}

}  // namespace fracgreen
