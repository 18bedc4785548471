#include "fracgreen/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <system_error>

#include <CLI11.hpp>

#include "fracgreen/calibration.hpp"
#include "fracgreen/densities.hpp"
#include "fracgreen/greens.hpp"
#include "fracgreen/simulate.hpp"
#include "fracgreen/solver.hpp"
#include "fracgreen/special_functions.hpp"

namespace fracgreen::cli {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double to_number(std::string_view s, const std::string& what) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) {
    throw ValidationError(what + ": '" + std::string(s) + "' is not a number");
  }
  return v;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parameter schema

ParamSpec num(std::string name, json def, std::string help) {
  ParamSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::number;
  p.default_value = std::move(def);
  p.help = std::move(help);
  return p;
}
ParamSpec index_param(std::string name, double def, std::string help) {
  ParamSpec p = num(std::move(name), def, std::move(help));
  p.greater_than = 0.0;
  p.less_than = 1.0;
  return p;
}
ParamSpec positive(std::string name, json def, std::string help) {
  ParamSpec p = num(std::move(name), std::move(def), std::move(help));
  p.greater_than = 0.0;
  return p;
}
ParamSpec integer(std::string name, long long def, std::string help, double min = 0.0) {
  ParamSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::integer;
  p.default_value = def;
  p.help = std::move(help);
  p.at_least = min;
  return p;
}
ParamSpec text(std::string name, std::string def, std::vector<std::string> choices,
               std::string help) {
  ParamSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::text;
  p.default_value = std::move(def);
  p.choices = std::move(choices);
  p.help = std::move(help);
  return p;
}
ParamSpec numbers(std::string name, std::string def, std::string help) {
  ParamSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::numbers;
  p.default_value = std::move(def);
  p.help = std::move(help);
  return p;
}
ParamSpec grid(std::string name, std::string def, std::string help) {
  ParamSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::grid;
  p.default_value = std::move(def);
  p.help = std::move(help);
  return p;
}
ParamSpec dim() {
  ParamSpec p = integer("d", 1, "spatial dimension", 1.0);
  p.at_most = 8.0;
  return p;
}

std::map<Command, std::vector<ParamSpec>> build_schema() {
  std::map<Command, std::vector<ParamSpec>> s;
  const auto beta = index_param("beta", 0.5, "order of the t1 coordinate");
  const auto gamma = index_param("gamma", 0.5, "order of the t2 coordinate");
  const auto a_exp = text("a-exponent", "inverse", {"inverse", "direct"},
                          "small-Omega A exponent: inverse (-1-1/gamma) or direct (-1-gamma)");

  s[Command::stable_density] = {
      index_param("alpha", 0.5, "stability index"),
      grid("r-grid", "log:1e-2:1e2:41", "evaluation points"),
      positive("switch-radius", nullptr, "saddle handoff radius (default: calibration store)"),
      positive("tail-radius", nullptr, "series handoff radius (default: calibration store)"),
  };
  s[Command::exit_density] = {
      index_param("alpha", 0.5, "stability index"),
      positive("t", 1.0, "starting level"),
      text("quantity", "exit", {"exit", "transition"}, "exit-time density or transition density"),
      grid("s-grid", "0:5:0.01", "exit times (quantity=exit)"),
      positive("s", 1.0, "operational time (quantity=transition)"),
      grid("r-grid", "0.05:0.95:0.05", "displacements or positions (quantity=transition)"),
      text("convention", "displacement", {"displacement", "position"}, "transition argument"),
  };
  s[Command::greens] = {
      beta, gamma, dim(),
      text("kernel", "g1", {"g1", "heat", "joint"}, "which kernel to evaluate"),
      positive("t", 1.0, "t1 level (g1)"),
      positive("r", 1.0, "boundary time r"),
      positive("s", 1.0, "operational time (heat, joint)"),
      numbers("x", "", "point x (default origin)"),
      numbers("y", "", "point y (default origin)"),
      a_exp,
  };
  s[Command::envelope_sweep] = {
      beta, gamma, dim(),
      grid("omega-grid", "log:1e-3:1e3:13", "Omega values"),
      grid("a-grid", "log:1e-2:1e2:9", "A values"),
      a_exp,
      grid("decay-omega", "log:10:100:6", "Omega range of the decay-exponent fit (empty: skip)"),
      positive("decay-a", 1.0, "A at which the decay exponent is fitted"),
  };
  s[Command::components] = {
      beta, gamma, dim(),
      grid("omega-grid", "0.5", "Omega values"),
      grid("a-grid", "0.5", "A values"),
  };
  s[Command::kdim] = {
      numbers("orders", "0.5,0.5,0.5", "orders beta_1..beta_k"),
      integer("boundary-index", 1, "coordinate whose exit is represented (1-based)", 1.0),
      numbers("levels", "1,1", "levels r_j of the other coordinates"),
      dim(),
      positive("t", 1.0, "level of the boundary coordinate"),
      numbers("x", "", "point x (default origin)"),
      numbers("y", "", "point y (default origin)"),
  };
  s[Command::conjecture] = {
      numbers("orders", "0.5,0.5,0.5", "orders beta_1..beta_k"),
      integer("boundary-index", 1, "coordinate whose exit is represented (1-based)", 1.0),
      dim(),
      grid("omega-grid", "log:1e-2:1e2:10", "Omega values"),
      grid("a-grid", "log:1e-2:1e2:10", "A_1 values"),
  };
  const std::vector<ParamSpec> bvp = {
      beta, gamma, dim(),
      positive("t1", 1.0, "t1"),
      positive("t2", 1.0, "t2"),
      numbers("x", "", "spatial point (default origin)"),
      text("phi1", "const:1", {}, "boundary data on t1 = 0"),
      text("phi2", "const:1", {}, "boundary data on t2 = 0"),
      text("convention", "displacement", {"displacement", "position"},
           "argument of phi along the surviving coordinate"),
  };
  s[Command::solve] = bvp;
  s[Command::solve].push_back(
      text("quantity", "value", {"value", "mass"}, "solution value or kernel masses"));
  s[Command::mc_solve] = bvp;
  s[Command::mc_solve].push_back(integer("n-paths", 100000, "number of paths", 1.0));
  s[Command::mc_solve].push_back(text("method", "exact", {"exact", "path"}, "sampling scheme"));
  {
    ParamSpec st = num("step", 0.0, "grid step for method=path (0: default)");
    st.at_least = 0.0;
    s[Command::mc_solve].push_back(st);
  }
  {
    ParamSpec st = num("step", 0.0, "operational-time step (0: 1e-3 min t^alpha)");
    st.at_least = 0.0;
    s[Command::simulate] = {
        text("mode", "path", {"path", "exit-density", "increments"}, "what to simulate"),
        numbers("orders", "0.8,0.8", "orders (mode=path)"),
        numbers("starts", "1000,1000", "starting levels (mode=path)"),
        st,
        integer("max-steps", 100000000, "path budget in steps", 1.0),
        integer("path-index", 0, "stream index of the path (mode=path)"),
        index_param("alpha", 0.5, "stability index (exit-density, increments)"),
        positive("t", 1.0, "starting level (exit-density)"),
        integer("n-paths", 100000, "paths (exit-density)", 1000.0),
        integer("bins", 60, "histogram bins (exit-density)", 1.0),
        positive("dt", 1.0, "increment time (increments)"),
        integer("count", 1000, "number of increments (increments)", 1.0),
    };
    s[Command::ruin] = {
        numbers("orders", "0.5", "orders"),
        numbers("starts", "1", "starting levels"),
        st,
        integer("max-steps", 100000000, "path budget in steps", 1.0),
        positive("horizon", 1.0, "horizon T"),
        integer("n-paths", 10000, "number of paths", 1.0),
    };
  }
  s[Command::laplace_check] = {
      text("kind", "one-barrier", {"boundary", "interior", "one-barrier", "two-barrier"}, "which formula"),
      num("g-value", 1.0, "g at the minimum (boundary, interior)"),
      num("h-value", 0.0, "h at the minimum (boundary, interior)"),
      positive("h-derivative", 1.0, "h'(b) (boundary) or h''(b) (interior)"),
      grid("lambda-grid", "log:1e1:1e4:4", "large parameter A (boundary, interior)"),
      [] {
        ParamSpec p = num("barrier-power", 2.0, "a");
        p.greater_than = 1.0;
        return p;
      }(),
      [] {
        ParamSpec p = num("second-barrier-power", 0.0, "b (two-barrier; 0 = absent)");
        p.at_least = 0.0;
        return p;
      }(),
      num("integrand-power", 0.0, "N (one-barrier) or n (two-barrier)"),
      positive("coeff", 1.0, "c (one-barrier)"),
      positive("cap-a", 1.0, "A (two-barrier)"),
      grid("omega-grid", "log:1e2:1e4:3", "Omega values (one-barrier, two-barrier)"),
  };
  s[Command::gamma_check] = {
      numbers("s", "1", "orders s"),
      grid("a-grid", "2", "arguments A"),
  };
  s[Command::calibrate] = {
      numbers("alphas", "0.1,0.3,0.5,0.8,0.95", "stability indices for switch radii"),
      text("pairs", "0.5:0.5,0.5:0.8,0.8:0.3", {}, "beta:gamma pairs"),
      numbers("dims", "1,3,4,5", "dimensions"),
      grid("omega-grid", "log:1e-3:1e3:25", "calibration Omega grid"),
      grid("a-grid", "log:1e-2:1e2:17", "calibration A grid"),
      a_exp,
  };
  return s;
}

const std::map<Command, std::vector<ParamSpec>>& schema() {
  static const auto s = build_schema();
  return s;
}

const ParamSpec* find_param(Command c, const std::string& name) {
  for (const auto& p : schema().at(c)) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

void check_bounds(const ParamSpec& p, double v) {
  const auto bad = [&](const std::string& rule) {
    throw ValidationError("parameter '" + p.name + "' = " + fmt(v) + " violates " + rule);
  };
  if (!std::isfinite(v)) bad("finiteness");
  if (p.greater_than && !(v > *p.greater_than)) bad("> " + fmt(*p.greater_than));
  if (p.at_least && !(v >= *p.at_least)) bad(">= " + fmt(*p.at_least));
  if (p.less_than && !(v < *p.less_than)) bad("< " + fmt(*p.less_than));
  if (p.at_most && !(v <= *p.at_most)) bad("<= " + fmt(*p.at_most));
}

json normalize(const ParamSpec& p, const json& v) {
  const std::string what = "parameter '" + p.name + "'";
  switch (p.kind) {
    case ParamKind::number: {
      if (v.is_null()) return v;  // optional, filled later
      const double d = v.is_string() ? to_number(v.get<std::string>(), what)
                       : v.is_number() ? v.get<double>()
                                       : throw ValidationError(what + " must be a number");
      check_bounds(p, d);
      return d;
    }
    case ParamKind::integer: {
      long long i = 0;
      if (v.is_string()) {
        const std::string s = v.get<std::string>();
        const double d = to_number(s, what);
        if (d != std::floor(d)) throw ValidationError(what + " must be an integer");
        i = static_cast<long long>(d);
      } else if (v.is_number_integer()) {
        i = v.get<long long>();
      } else if (v.is_number() && v.get<double>() == std::floor(v.get<double>())) {
        i = static_cast<long long>(v.get<double>());
      } else {
        throw ValidationError(what + " must be an integer");
      }
      check_bounds(p, static_cast<double>(i));
      return i;
    }
    case ParamKind::text: {
      if (!v.is_string()) throw ValidationError(what + " must be a string");
      const std::string s = v.get<std::string>();
      if (!p.choices.empty() && std::find(p.choices.begin(), p.choices.end(), s) == p.choices.end()) {
        std::string allowed;
        for (const auto& c : p.choices) allowed += (allowed.empty() ? "" : ", ") + c;
        throw ValidationError(what + " must be one of {" + allowed + "}, got '" + s + "'");
      }
      return s;
    }
    case ParamKind::numbers: {
      json arr = json::array();
      if (v.is_array()) {
        for (const auto& e : v) {
          if (!e.is_number()) throw ValidationError(what + " must contain numbers");
          arr.push_back(e.get<double>());
        }
      } else if (v.is_number()) {
        arr.push_back(v.get<double>());
      } else if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (!s.empty()) {
          for (const auto& part : split(s, ',')) arr.push_back(to_number(part, what));
        }
      } else {
        throw ValidationError(what + " must be a list of numbers");
      }
      for (const auto& e : arr) check_bounds(p, e.get<double>());
      return arr;
    }
    case ParamKind::grid: {
      std::string s;
      if (v.is_string()) {
        s = v.get<std::string>();
      } else if (v.is_number()) {
        s = fmt(v.get<double>());
      } else if (v.is_array()) {
        for (const auto& e : v) {
          if (!e.is_number()) throw ValidationError(what + " must contain numbers");
          s += (s.empty() ? "" : ",") + fmt(e.get<double>());
        }
      } else {
        throw ValidationError(what + " must be a grid string");
      }
      if (!s.empty()) {
        try {
          parse_grid(s);
        } catch (const std::invalid_argument& e) {
          throw ValidationError(what + ": " + e.what());
        }
      }
      return s;
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Typed access to validated parameters

struct Params {
  const RunConfig& cfg;
  double number(const char* k) const { return cfg.params.at(k).get<double>(); }
  long long integer(const char* k) const { return cfg.params.at(k).get<long long>(); }
  std::string text(const char* k) const { return cfg.params.at(k).get<std::string>(); }
  std::vector<double> numbers(const char* k) const {
    return cfg.params.at(k).get<std::vector<double>>();
  }
  std::vector<double> grid(const char* k) const {
    const std::string s = cfg.params.at(k).get<std::string>();
    return s.empty() ? std::vector<double>{} : parse_grid(s);
  }
  bool has(const char* k) const { return cfg.params.contains(k) && !cfg.params.at(k).is_null(); }
};

QuadratureConfig quad(const RunConfig& cfg) {
  QuadratureConfig qc;
  if (cfg.tolerance) qc.rel_tol = *cfg.tolerance;
  return qc;
}

std::vector<double> point_or_origin(std::vector<double> p, int d, const char* name) {
  if (p.empty()) return std::vector<double>(static_cast<std::size_t>(d), 0.0);
  if (p.size() != static_cast<std::size_t>(d)) {
    throw ValidationError(std::string("parameter '") + name + "' must have " +
                          std::to_string(d) + " components");
  }
  return p;
}

// ---------------------------------------------------------------------------
// Tabular output

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  json summary = json::object();
  bool converged = true;
};

std::string csv_cell(const json& v) {
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return fmt(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "";
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  return s;
}

std::string render(const Table& t, Format f, Command c) {
  std::ostringstream os;
  if (f == Format::csv) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
      os << '\n';
    }
    return os.str();
  }
  json j;
  j["command"] = std::string(command_name(c));
  j["summary"] = t.summary;
  j["rows"] = json::array();
  for (const auto& row : t.rows) {
    json r = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      const json& v = row[i];
      r[t.columns[i]] = v.is_number_float() && !std::isfinite(v.get<double>())
                            ? json(fmt(v.get<double>()))
                            : v;
    }
    j["rows"].push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

json finite_or_text(double v) { return std::isfinite(v) ? json(v) : json(fmt(v)); }

// ---------------------------------------------------------------------------
// Commands

Table cmd_stable_density(const RunConfig& cfg) {
  Params p{cfg};
  const double alpha = p.number("alpha");
  StableParams sp = default_stable_params(alpha);
  if (p.has("switch-radius")) sp.switch_radius = p.number("switch-radius");
  if (p.has("tail-radius")) sp.tail_radius = p.number("tail-radius");
  sp.validate();
  const SaddleConstants sc = saddle_constants(alpha);
  Table t;
  t.columns = {"r", "density", "log_density", "log_small_asymptote", "log_tail"};
  for (double r : p.grid("r-grid")) {
    if (!(r > 0.0)) throw ValidationError("r-grid: points must be positive");
    const double lw = log_stable_density(sp, r);
    t.rows.push_back({r, std::exp(lw), lw, log_stable_density_small_asymptote(sc, r),
                      std::log(tail_constant(alpha)) - (1.0 + alpha) * std::log(r)});
  }
  t.summary = {{"alpha", alpha},
               {"switch_radius", sp.switch_radius},
               {"tail_radius", sp.tail_radius},
               {"saddle_amplitude", sc.amplitude},
               {"saddle_decay", sc.decay},
               {"tail_constant", tail_constant(alpha)}};
  return t;
}

Table cmd_exit_density(const RunConfig& cfg) {
  Params p{cfg};
  const AbsorbedProcessParams ap{p.number("alpha"), p.number("t")};
  Table t;
  if (p.text("quantity") == "transition") {
    const auto conv = p.text("convention") == "position" ? KernelConvention::position
                                                         : KernelConvention::displacement;
    t.columns = {"r", "density", "log_density"};
    for (double r : p.grid("r-grid")) {
      const double lv = log_transition_density(ap, p.number("s"), r, conv);
      t.rows.push_back({r, std::exp(lv), lv});
    }
    return t;
  }
  const ExitAsymptotes as = exit_density_asymptotes(ap);
  t.columns = {"s", "density", "log_density", "cdf"};
  for (double s : p.grid("s-grid")) {
    if (s < 0.0) throw ValidationError("s-grid: points must be >= 0");
    if (s == 0.0) {
      // mu(0+) = t^-alpha / Gamma(1 - alpha)
      const double v = as.small_s_limit * std::pow(ap.start, -ap.alpha);
      t.rows.push_back({0.0, v, std::log(v), 0.0});
      continue;
    }
    const DensityValue d = exit_time_density(ap, s);
    t.rows.push_back({s, d.value, d.log_value, exit_time_cdf(ap, s)});
  }
  t.summary = {{"alpha", ap.alpha},
               {"t", ap.start},
               {"small_s_limit", as.small_s_limit},
               {"large_amplitude", as.large_amplitude},
               {"large_power", as.large_power},
               {"large_decay", as.large_decay},
               {"large_exp_power", as.large_exp_power}};
  return t;
}

Table cmd_greens(const RunConfig& cfg) {
  Params p{cfg};
  const MixedOrderParams mp{p.number("beta"), p.number("gamma"),
                            static_cast<int>(p.integer("d"))};
  const auto x = point_or_origin(p.numbers("x"), mp.dimension, "x");
  const auto y = point_or_origin(p.numbers("y"), mp.dimension, "y");
  HeatKernelParams hp;
  hp.dimension = mp.dimension;
  Table t;
  const std::string kernel = p.text("kernel");
  if (kernel == "heat") {
    const double s = p.number("s");
    const double lv = log_heat_kernel(hp, s, x, y);
    const EnvelopeBand b = aronson_band(hp, s, x, y, 0.25, 0.25);
    t.columns = {"value", "log_value", "log_band_lower", "log_band_upper"};
    t.rows.push_back({std::exp(lv), lv, b.log_k_low + b.log_lower, b.log_k_high + b.log_upper});
    return t;
  }
  if (kernel == "joint") {
    const double s = p.number("s"), r = p.number("r");
    const double lv = log_joint_kernel(hp, mp.gamma, s, r, x, y);
    const EnvelopeBand b = joint_kernel_envelope(hp, mp.gamma, s, r, x, y);
    t.columns = {"value", "log_value", "branch", "log_band_lower", "log_band_upper"};
    t.rows.push_back({std::exp(lv), lv, b.branch, b.log_k_low + b.log_lower,
                      b.log_k_high + b.log_upper});
    return t;
  }
  const double tt = p.number("t"), r = p.number("r");
  const QuadResult g = greens_quadrature(mp, quad(cfg), tt, r, x, y);
  const ScalingCoordinates sc = scaling_coordinates(mp, tt, r, x, y);
  EnvelopeOptions opt;
  opt.a_exponent = p.text("a-exponent") == "direct" ? SmallOmegaExponent::direct
                                                     : SmallOmegaExponent::inverse;
  const EnvelopeBand b = envelope(mp, sc, opt);
  t.columns = {"value", "log_value", "error", "converged", "omega", "cap_a",
               "log_band_lower", "log_band_upper"};
  t.rows.push_back({g.value(), finite_or_text(g.log_value), g.error(), g.converged, sc.omega,
                    sc.cap_a, b.log_k_low + b.log_lower, b.log_k_high + b.log_upper});
  t.converged = g.converged;
  return t;
}

Table cmd_envelope_sweep(const RunConfig& cfg) {
  Params p{cfg};
  const MixedOrderParams mp{p.number("beta"), p.number("gamma"),
                            static_cast<int>(p.integer("d"))};
  EnvelopeOptions opt;
  opt.a_exponent = p.text("a-exponent") == "direct" ? SmallOmegaExponent::direct
                                                     : SmallOmegaExponent::inverse;
  const auto sweep =
      envelope_ratio_sweep(mp, quad(cfg), p.grid("omega-grid"), p.grid("a-grid"), opt, cfg.threads);
  Table t;
  t.columns = {"omega", "cap_a", "d", "beta", "gamma", "value_log", "comparator_log", "ratio"};
  for (const auto& pt : sweep.points) {
    t.rows.push_back({pt.omega, pt.cap_a, mp.dimension, mp.beta, mp.gamma,
                      finite_or_text(pt.value_log), finite_or_text(pt.comparator_log),
                      finite_or_text(std::exp(pt.log_ratio()))});
  }
  t.summary = json::parse(sweep_summary_json(sweep));
  const auto decay = p.grid("decay-omega");
  if (decay.size() >= 3) {
    const DecayFit fit = fit_large_omega_decay(mp, quad(cfg), p.number("decay-a"), decay.front(),
                                               decay.back(), static_cast<int>(decay.size()));
    t.summary["decay_exponent"] = fit.exponent;
    t.summary["decay_predicted_min_order"] = fit.predicted;
    t.summary["decay_predicted_max_order"] = fit.predicted_max;
  }
  return t;
}

Table cmd_components(const RunConfig& cfg) {
  Params p{cfg};
  const MixedOrderParams mp{p.number("beta"), p.number("gamma"),
                            static_cast<int>(p.integer("d"))};
  const auto oms = p.grid("omega-grid"), as = p.grid("a-grid");
  Table t;
  t.columns = {"omega", "cap_a", "log_i1", "log_i2", "log_i3", "log_i4", "log_sum", "log_g1"};
  for (double om : oms) {
    for (double a : as) {
      const ScalingCoordinates sc = unit_scaling(om, a);
      const ComponentIntegrals ci = component_integrals(mp, sc, quad(cfg));
      const double sum = log_add(log_add(ci.i1.log_value, ci.i2.log_value),
                                 log_add(ci.i3.log_value, ci.i4.log_value));
      const double g = greens_normalized(mp, quad(cfg), om, a).log_value;
      t.rows.push_back({om, a, finite_or_text(ci.i1.log_value), finite_or_text(ci.i2.log_value),
                        finite_or_text(ci.i3.log_value), finite_or_text(ci.i4.log_value),
                        finite_or_text(sum), finite_or_text(g)});
    }
  }
  const OrderingReport rep = ordering_constants(mp, quad(cfg), oms, as, cfg.threads);
  json q = json::array();
  for (std::size_t i = 0; i < 4; ++i) {
    q.push_back({{"points", rep.points[i]},
                 {"log_c", finite_or_text(rep.log_c[i])},
                 {"worst_omega", rep.worst_omega[i]},
                 {"worst_cap_a", rep.worst_cap_a[i]}});
  }
  t.summary = {{"quadrants", q}, {"max_log_sum_ratio", rep.max_log_sum_ratio}};
  return t;
}

KDimParams kdim_params(const Params& p, bool with_levels) {
  KDimParams kp;
  kp.orders = p.numbers("orders");
  kp.boundary_index = static_cast<int>(p.integer("boundary-index"));
  kp.dimension = static_cast<int>(p.integer("d"));
  if (with_levels) {
    kp.levels = p.numbers("levels");
  } else {
    kp.levels.assign(kp.orders.empty() ? 0 : kp.orders.size() - 1, 1.0);
  }
  try {
    kp.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  return kp;
}

Table cmd_kdim(const RunConfig& cfg) {
  Params p{cfg};
  const KDimParams kp = kdim_params(p, true);
  const auto x = point_or_origin(p.numbers("x"), kp.dimension, "x");
  const auto y = point_or_origin(p.numbers("y"), kp.dimension, "y");
  const double tt = p.number("t");
  const QuadResult r = kdim_greens_quadrature(kp, quad(cfg), tt, x, y);
  Table t;
  t.columns = {"value", "log_value", "error", "converged", "log_a1"};
  t.rows.push_back({r.value(), finite_or_text(r.log_value), r.error(), r.converged,
                    kp.log_a1(tt)});
  t.converged = r.converged;
  return t;
}

Table cmd_conjecture(const RunConfig& cfg) {
  Params p{cfg};
  const KDimParams kp = kdim_params(p, false);
  const ConjectureSummary s =
      conjecture_experiment(kp, quad(cfg), p.grid("omega-grid"), p.grid("a-grid"), cfg.threads);
  Table t;
  t.columns = {"omega", "a1", "value_log", "comparator_log", "ratio", "converged"};
  for (const auto& pt : s.points) {
    t.rows.push_back({pt.omega, pt.a1, finite_or_text(pt.value_log),
                      finite_or_text(pt.comparator_log),
                      finite_or_text(std::exp(pt.value_log - pt.comparator_log)),
                      pt.converged && !pt.failed});
  }
  t.summary = {{"k", kp.k()},
               {"finite", s.finite},
               {"min_log_ratio", finite_or_text(s.min_log_ratio)},
               {"max_log_ratio", finite_or_text(s.max_log_ratio)},
               {"fitted_omega_exponent", s.fitted_omega_exponent},
               {"fitted_a_exponent", s.fitted_a_exponent},
               {"large_omega_points", s.large_omega_points}};
  return t;
}

BvpQuery bvp_query(const Params& p, const RunConfig& cfg) {
  BvpQuery q;
  q.mp = {p.number("beta"), p.number("gamma"), static_cast<int>(p.integer("d"))};
  q.t1 = p.number("t1");
  q.t2 = p.number("t2");
  q.x = point_or_origin(p.numbers("x"), q.mp.dimension, "x");
  q.qc = quad(cfg);
  q.convention = p.text("convention") == "position" ? KernelConvention::position
                                                    : KernelConvention::displacement;
  return q;
}

BoundaryData boundary_data(const Params& p) {
  try {
    return {BoundaryFunction::parse(p.text("phi1")), BoundaryFunction::parse(p.text("phi2"))};
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
}

Table cmd_solve(const RunConfig& cfg) {
  Params p{cfg};
  const BvpQuery q = bvp_query(p, cfg);
  Table t;
  if (p.text("quantity") == "mass") {
    const KernelMass m = kernel_mass(q.mp, q.qc, q.t1, q.t2, q.x);
    t.columns = {"mass1", "mass2", "sum", "error", "converged"};
    t.rows.push_back({m.mass1, m.mass2, m.mass1 + m.mass2, m.error, m.converged});
    t.converged = m.converged;
    return t;
  }
  const BoundaryData bd = boundary_data(p);
  const BvpResult r = solve_bvp(bd, q);
  t.columns = {"value", "error", "face1", "face2", "converged", "sup_bound"};
  const double sup = std::max(bd.phi1.sup_bound(q.t2), bd.phi2.sup_bound(q.t1));
  t.rows.push_back({r.value, r.error, r.face1, r.face2, r.converged, sup});
  t.converged = r.converged;
  return t;
}

Table cmd_mc_solve(const RunConfig& cfg) {
  Params p{cfg};
  const BvpQuery q = bvp_query(p, cfg);
  const BoundaryData bd = boundary_data(p);
  McOptions opt;
  opt.method = p.text("method") == "path" ? McMethod::path : McMethod::exact;
  opt.step = p.number("step");
  opt.threads = cfg.threads;
  const std::uint64_t seed = cfg.seed.value_or(0);
  const McResult r = mc_solution(bd, q, p.integer("n-paths"), seed, opt);
  Table t;
  t.columns = {"estimate", "std_error", "n_paths", "seed", "face1_fraction", "censored_count"};
  t.rows.push_back({r.estimate, r.std_error, r.n_paths, r.seed, r.face1_fraction, r.censored});
  return t;
}

OrthantParams orthant(const Params& p, const RunConfig& cfg) {
  OrthantParams op;
  op.orders = p.numbers("orders");
  op.starts = p.numbers("starts");
  op.step = p.number("step");
  op.max_steps = p.integer("max-steps");
  op.seed = cfg.seed.value_or(0);
  try {
    op.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  return op;
}

Table cmd_simulate(const RunConfig& cfg) {
  Params p{cfg};
  const std::string mode = p.text("mode");
  const std::uint64_t seed = cfg.seed.value_or(0);
  Table t;
  if (mode == "increments") {
    Rng rng = path_rng(seed, 0);
    t.columns = {"value"};
    for (long long i = 0; i < p.integer("count"); ++i) {
      t.rows.push_back({sample_stable_increment(p.number("alpha"), p.number("dt"), rng)});
    }
    return t;
  }
  if (mode == "exit-density") {
    const double step = p.number("step") > 0.0 ? p.number("step") : 0.0;
    const ExitDensityEstimate e =
        estimate_exit_density(p.number("alpha"), p.number("t"), p.integer("n-paths"), step, seed,
                              static_cast<int>(p.integer("bins")), cfg.threads);
    const AbsorbedProcessParams ap{e.alpha, e.t};
    t.columns = {"bin_lo", "bin_hi", "density", "quadrature_density"};
    for (std::size_t b = 0; b + 1 < e.bin_edges.size(); ++b) {
      const double mid = std::sqrt(e.bin_edges[b] * e.bin_edges[b + 1]);
      t.rows.push_back({e.bin_edges[b], e.bin_edges[b + 1], e.bin_density[b],
                        exit_time_density(ap, mid).value});
    }
    t.summary = {{"alpha", e.alpha},   {"t", e.t},
                 {"step", e.step},     {"seed", e.seed},
                 {"n_paths", e.n_paths}, {"censored_count", e.censored},
                 {"ks_distance", e.ks_distance}, {"mean_bracket", e.mean_bracket}};
    return t;
  }
  const OrthantParams op = orthant(p, cfg);
  const PathSample ps = sample_path(op, static_cast<std::uint64_t>(p.integer("path-index")));
  t.columns.push_back("s");
  for (int i = 1; i <= op.k(); ++i) t.columns.push_back("x" + std::to_string(i));
  for (std::size_t n = 0; n < ps.times.size(); ++n) {
    std::vector<json> row{ps.times[n]};
    for (const auto& lv : ps.levels) row.emplace_back(lv[n]);
    t.rows.push_back(std::move(row));
  }
  t.summary = {{"exit_lower", ps.exit_lower}, {"exit_upper", ps.exit_upper},
               {"exit_index", ps.exit_index + 1}, {"exit_location", ps.exit_location},
               {"censored", ps.censored}, {"seed", seed}};
  return t;
}

Table cmd_ruin(const RunConfig& cfg) {
  Params p{cfg};
  const OrthantParams op = orthant(p, cfg);
  const RuinEstimate r =
      estimate_ruin_probability(op, p.number("horizon"), p.integer("n-paths"), cfg.threads);
  Table t;
  t.columns = {"estimate", "std_error", "n_paths", "seed", "censored_count"};
  t.rows.push_back({r.estimate, r.std_error, r.n_paths, r.seed, r.censored_count});
  return t;
}

Table cmd_laplace_check(const RunConfig& cfg) {
  Params p{cfg};
  const std::string kind = p.text("kind");
  Table t;
  if (kind == "boundary" || kind == "interior") {
    t.columns = {"lambda", "value", "log_value"};
    for (double A : p.grid("lambda-grid")) {
      if (!(A > 0.0)) throw ValidationError("lambda-grid: points must be positive");
      const double lv =
          kind == "boundary"
              ? log_laplace_boundary_asymptote(p.number("g-value"), p.number("h-value"), p.number("h-derivative"), A)
              : log_laplace_interior_asymptote(p.number("g-value"), p.number("h-value"), p.number("h-derivative"), A);
      t.rows.push_back({A, std::exp(lv), lv});
    }
    return t;
  }
  LaplaceProblem lp;
  lp.barrier_power = p.number("barrier-power");
  lp.integrand_power = p.number("integrand-power");
  lp.barrier_coeff = p.number("coeff");
  if (kind == "two-barrier") {
    lp.form = LaplaceProblem::Form::two_barrier;
    lp.second_barrier_power = p.number("second-barrier-power");
    lp.scale = p.number("cap-a");
  }
  try {
    lp.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  t.columns = {"omega", "log_quadrature", "log_asymptote", "ratio", "converged"};
  for (double om : p.grid("omega-grid")) {
    if (!(om > 0.0)) throw ValidationError("omega-grid: points must be positive");
    lp.large_parameter = om;
    const QuadResult q = laplace_problem_quadrature(lp, quad(cfg));
    const double la = kind == "two-barrier"
                          ? log_two_barrier_asymptote(lp)
                          : log_one_barrier_asymptote(lp.barrier_power, lp.integrand_power,
                                                  lp.barrier_coeff, om);
    t.rows.push_back({om, finite_or_text(q.log_value), la, finite_or_text(std::exp(q.log_value - la)),
                      q.converged});
    t.converged = t.converged && q.converged;
  }
  if (kind == "one-barrier") {
    const LaplaceConstants k = one_barrier_constants(lp.barrier_power, lp.integrand_power, lp.barrier_coeff);
    const LaplaceConstants kp =
        one_barrier_constants_alt(lp.barrier_power, lp.integrand_power, lp.barrier_coeff);
    t.summary = {{"c1", k.c1}, {"c2", k.c2}, {"c1_alt", kp.c1}, {"c2_alt", kp.c2}};
  }
  return t;
}

Table cmd_gamma_check(const RunConfig& cfg) {
  Params p{cfg};
  Table t;
  t.columns = {"s", "a", "value", "log_value", "large_a_ratio"};
  for (double s : p.numbers("s")) {
    for (double a : p.grid("a-grid")) {
      if (!(a > 0.0)) throw ValidationError("a-grid: points must be positive");
      const double lv = log_upper_incomplete_gamma(s, a);
      const double lasym = (s - 1.0) * std::log(a) - a;
      t.rows.push_back({s, a, finite_or_text(std::exp(lv)), lv, std::exp(lv - lasym)});
    }
  }
  return t;
}

std::string cmd_calibrate(const RunConfig& cfg, std::ostream& err) {
  Params p{cfg};
  CalibrationStore store;
  for (double a : p.numbers("alphas")) {
    const StableParams sp = calibrate_switch_radii(a);
    store.set_stable(a, {sp.switch_radius, sp.tail_radius});
    err << "stable alpha=" << a << " switch=" << sp.switch_radius << '\n';
  }
  const auto oms = p.grid("omega-grid"), as = p.grid("a-grid");
  EnvelopeOptions opt;
  opt.a_exponent = p.text("a-exponent") == "direct" ? SmallOmegaExponent::direct
                                                     : SmallOmegaExponent::inverse;
  for (const auto& pair : split(p.text("pairs"), ',')) {
    const auto bg = split(pair, ':');
    if (bg.size() != 2) throw ValidationError("pairs: expected beta:gamma, got '" + pair + "'");
    const double b = to_number(bg[0], "pairs"), g = to_number(bg[1], "pairs");
    for (double dd : p.numbers("dims")) {
      const MixedOrderParams mp{b, g, static_cast<int>(dd)};
      mp.validate();
      const EnvelopeSweep sw = envelope_ratio_sweep(mp, quad(cfg), oms, as, opt, cfg.threads);
      if (sw.summary.failures > 0) {
        throw NonConvergence("calibration sweep failed at " + std::to_string(sw.summary.failures) +
                             " points");
      }
      EnvelopeCalibration ec;
      ec.log_k_low = sw.summary.min_log_ratio;
      ec.log_k_high = sw.summary.max_log_ratio;
      ec.log_spread = sw.summary.log_spread();
      ec.a_exponent = p.text("a-exponent");
      store.set_envelope(b, g, mp.dimension, ec);
      const OrderingReport rep = ordering_constants(mp, quad(cfg), oms, as, cfg.threads);
      store.set_ordering(b, g, mp.dimension, {rep.log_c});
      err << "envelope beta=" << b << " gamma=" << g << " d=" << mp.dimension
          << " log_spread=" << ec.log_spread << '\n';
    }
  }
  return store.to_json();
}

void write_output(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.output.empty() || cfg.output == "-") {
    out << text;
    out.flush();
    return;
  }
  std::ofstream f(cfg.output, std::ios::binary);
  if (!f) throw IoError("cannot open output file " + cfg.output + ": " + std::strerror(errno));
  f << text;
  f.flush();
  if (!f) throw IoError("write failed for " + cfg.output);
}

std::size_t line_of_key(const std::string& text, const std::string& key) {
  const std::size_t pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n')) + 1;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view command_name(Command c) {
  switch (c) {
    case Command::stable_density: return "stable-density";
    case Command::exit_density: return "exit-density";
    case Command::greens: return "greens";
    case Command::envelope_sweep: return "envelope-sweep";
    case Command::components: return "components";
    case Command::kdim: return "kdim";
    case Command::conjecture: return "conjecture";
    case Command::solve: return "solve";
    case Command::mc_solve: return "mc-solve";
    case Command::simulate: return "simulate";
    case Command::ruin: return "ruin";
    case Command::laplace_check: return "laplace-check";
    case Command::gamma_check: return "gamma-check";
    case Command::calibrate: return "calibrate";
  }
  return "?";
}

const std::vector<Command>& all_commands() {
  static const std::vector<Command> v = {
      Command::stable_density, Command::exit_density, Command::greens,   Command::envelope_sweep,
      Command::components,     Command::kdim,         Command::conjecture, Command::solve,
      Command::mc_solve,       Command::simulate,     Command::ruin,     Command::laplace_check,
      Command::gamma_check,    Command::calibrate};
  return v;
}

std::optional<Command> parse_command(std::string_view name) {
  for (Command c : all_commands()) {
    if (command_name(c) == name) return c;
  }
  return std::nullopt;
}

const std::vector<ParamSpec>& command_params(Command c) { return schema().at(c); }

std::vector<double> parse_grid(std::string_view spec) {
  const std::string s(spec);
  if (s.empty()) throw std::invalid_argument("empty grid");
  std::vector<double> out;
  if (s.rfind("log:", 0) == 0) {
    const auto parts = split(s.substr(4), ':');
    if (parts.size() != 3) throw std::invalid_argument("log grid must be log:lo:hi:n");
    const double lo = to_number(parts[0], "grid"), hi = to_number(parts[1], "grid");
    const double n = to_number(parts[2], "grid");
    if (!(lo > 0.0 && hi >= lo) || n < 1 || n != std::floor(n)) {
      throw std::invalid_argument("log grid needs 0 < lo <= hi and integer n >= 1");
    }
    if (n == 1) return {lo};
    return log_grid(lo, hi, static_cast<int>(n));
  }
  if (s.find(':') != std::string::npos) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw std::invalid_argument("linear grid must be lo:hi:step");
    const double lo = to_number(parts[0], "grid"), hi = to_number(parts[1], "grid");
    const double h = to_number(parts[2], "grid");
    if (!(h > 0.0) || hi < lo) throw std::invalid_argument("linear grid needs lo <= hi, step > 0");
    const auto n = static_cast<long long>(std::floor((hi - lo) / h + 1e-9));
    if (n > 10'000'000) throw std::invalid_argument("grid too large");
    for (long long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * h);
    return out;
  }
  for (const auto& part : split(s, ',')) out.push_back(to_number(part, "grid"));
  return out;
}

void validate_config(RunConfig& cfg) {
  const auto& specs = schema().at(cfg.command);
  json params = json::object();
  for (auto it = cfg.params.begin(); it != cfg.params.end(); ++it) {
    if (!find_param(cfg.command, it.key())) {
      throw ValidationError("unknown parameter '" + it.key() + "' for command " +
                            std::string(command_name(cfg.command)));
    }
  }
  for (const auto& spec : specs) {
    const json v = cfg.params.contains(spec.name) ? cfg.params.at(spec.name) : spec.default_value;
    params[spec.name] = normalize(spec, v);
  }
  // Calibrated defaults.
  if (cfg.command == Command::stable_density) {
    const StableParams sp = default_stable_params(params["alpha"].get<double>());
    if (params["switch-radius"].is_null()) params["switch-radius"] = sp.switch_radius;
    if (params["tail-radius"].is_null()) params["tail-radius"] = sp.tail_radius;
    if (!(params["switch-radius"].get<double>() < params["tail-radius"].get<double>())) {
      throw ValidationError("switch-radius must be below tail-radius");
    }
  }
  if (cfg.tolerance && !(*cfg.tolerance > 0.0 && *cfg.tolerance < 1.0)) {
    throw ValidationError("tolerance must lie in (0, 1)");
  }
  if (cfg.threads < 0) throw ValidationError("threads must be >= 0");
  cfg.params = std::move(params);
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    const std::size_t line = static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n')) + 1;
    throw ValidationError(origin + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
  }
  const auto at = [&](const std::string& key) {
    const std::size_t line = line_of_key(text, key);
    return origin + (line ? ":" + std::to_string(line) : std::string()) + ": ";
  };
  if (!j.is_object()) throw ValidationError(origin + ":1: config must be a JSON object");
  if (!j.contains("command") || !j["command"].is_string()) {
    throw ValidationError(origin + ": missing string field \"command\"");
  }
  RunConfig cfg;
  const auto c = parse_command(j["command"].get<std::string>());
  if (!c) throw ValidationError(at("command") + "unknown command '" + j["command"].get<std::string>() + "'");
  cfg.command = *c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    try {
      if (k == "command") continue;
      if (k == "params") {
        if (!it->is_object()) throw ValidationError("\"params\" must be an object");
        for (auto p = it->begin(); p != it->end(); ++p) cfg.params[p.key()] = *p;
      } else if (k == "output") {
        cfg.output = it->get<std::string>();
      } else if (k == "format") {
        const std::string f = it->get<std::string>();
        if (f != "csv" && f != "json") throw ValidationError("format must be csv or json");
        cfg.format = f == "json" ? Format::json : Format::csv;
      } else if (k == "seed") {
        if (!it->is_number_integer()) throw ValidationError("seed must be an integer");
        cfg.seed = it->get<std::uint64_t>();
      } else if (k == "tolerance") {
        cfg.tolerance = it->get<double>();
      } else if (k == "threads") {
        cfg.threads = it->get<int>();
      } else {
        cfg.params[k] = *it;
      }
    } catch (const json::exception& e) {
      throw ValidationError(at(k) + "field \"" + k + "\": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(at(k) + e.what());
    }
  }
  try {
    validate_config(cfg);
  } catch (const ValidationError& e) {
    // Point at the first parameter named in the message.
    std::string msg = e.what();
    std::string where = origin + ": ";
    const auto q1 = msg.find('\'');
    const auto q2 = q1 == std::string::npos ? q1 : msg.find('\'', q1 + 1);
    if (q2 != std::string::npos) where = at(msg.substr(q1 + 1, q2 - q1 - 1));
    throw ValidationError(where + msg);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string config_to_json(const RunConfig& cfg) {
  json j;
  j["command"] = std::string(command_name(cfg.command));
  j["params"] = cfg.params;
  j["output"] = cfg.output;
  j["format"] = cfg.format == Format::json ? "json" : "csv";
  if (cfg.seed) j["seed"] = *cfg.seed;
  if (cfg.tolerance) j["tolerance"] = *cfg.tolerance;
  j["threads"] = cfg.threads;
  return j.dump(2) + "\n";
}

int run(const RunConfig& cfg_in, std::ostream& out, std::ostream& err) {
  RunConfig cfg = cfg_in;
  try {
    validate_config(cfg);
    std::string text;
    bool converged = true;
    if (cfg.command == Command::calibrate) {
      text = cmd_calibrate(cfg, err);
      if (cfg.output.empty()) cfg.output = default_calibration_path();
    } else {
      Table t;
      switch (cfg.command) {
        case Command::stable_density: t = cmd_stable_density(cfg); break;
        case Command::exit_density: t = cmd_exit_density(cfg); break;
        case Command::greens: t = cmd_greens(cfg); break;
        case Command::envelope_sweep: t = cmd_envelope_sweep(cfg); break;
        case Command::components: t = cmd_components(cfg); break;
        case Command::kdim: t = cmd_kdim(cfg); break;
        case Command::conjecture: t = cmd_conjecture(cfg); break;
        case Command::solve: t = cmd_solve(cfg); break;
        case Command::mc_solve: t = cmd_mc_solve(cfg); break;
        case Command::simulate: t = cmd_simulate(cfg); break;
        case Command::ruin: t = cmd_ruin(cfg); break;
        case Command::laplace_check: t = cmd_laplace_check(cfg); break;
        case Command::gamma_check: t = cmd_gamma_check(cfg); break;
        case Command::calibrate: break;
      }
      text = render(t, cfg.format, cfg.command);
      converged = t.converged;
    }
    write_output(cfg, text, out);
    if (!converged) {
      err << "fracgreen: quadrature did not reach the requested tolerance\n";
      return kExitNonConvergence;
    }
    return kExitOk;
  } catch (const IoError& e) {
    err << "fracgreen: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::system_error& e) {
    err << "fracgreen: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NonConvergence& e) {
    err << "fracgreen: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const std::invalid_argument& e) {
    err << "fracgreen: invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "fracgreen: numerical failure: " << e.what() << '\n';
    return kExitNonConvergence;
  }
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Green functions of mixed fractional boundary value problems"};
  app.require_subcommand(0, 1);
  std::string config_path, output, format, emit_config;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  std::optional<int> threads;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", output, "output file (default: standard output)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", seed, "random seed");
  app.add_option("--tolerance", tolerance, "relative quadrature tolerance");
  app.add_option("--threads", threads, "worker threads (0: all cores)");
  app.add_option("--emit-config", emit_config, "write the validated configuration and exit");

  std::map<Command, CLI::App*> subs;
  std::map<Command, std::map<std::string, std::string>> values;
  for (Command c : all_commands()) {
    CLI::App* sub = app.add_subcommand(std::string(command_name(c)));
    sub->fallthrough();
    for (const auto& spec : command_params(c)) {
      sub->add_option("--" + spec.name, values[c][spec.name], spec.help);
    }
    subs[c] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "fracgreen: " << e.what() << '\n';
    return kExitValidation;
  }

  RunConfig cfg;
  try {
    std::optional<Command> chosen;
    for (const auto& [c, sub] : subs) {
      if (sub->parsed()) chosen = c;
    }
    if (!config_path.empty()) {
      cfg = load_config(config_path);
      if (chosen && *chosen != cfg.command) {
        throw ValidationError("command on the line differs from the config file");
      }
    } else if (chosen) {
      cfg.command = *chosen;
    } else {
      std::cerr << app.help();
      return kExitValidation;
    }
    for (const auto& spec : command_params(cfg.command)) {
      if (subs[cfg.command]->count("--" + spec.name) > 0) {
        cfg.params[spec.name] = values[cfg.command][spec.name];
      }
    }
    if (!output.empty()) cfg.output = output;
    if (!format.empty()) cfg.format = format == "json" ? Format::json : Format::csv;
    if (seed) cfg.seed = seed;
    if (tolerance) cfg.tolerance = tolerance;
    if (threads) cfg.threads = *threads;
    validate_config(cfg);
    if (!emit_config.empty()) {
      std::ofstream f(emit_config);
      if (!f) throw IoError("cannot open " + emit_config);
      f << config_to_json(cfg);
      if (!f) throw IoError("write failed for " + emit_config);
      return kExitOk;
    }
  } catch (const IoError& e) {
    std::cerr << "fracgreen: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "fracgreen: invalid input: " << e.what() << '\n';
    return kExitValidation;
  }
  return run(cfg, std::cout, std::cerr);
}

}  // namespace fracgreen::cli
