#include "fracgreen/boundary.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace fracgreen {

namespace {

[[noreturn]] void fail(std::string_view text, std::size_t pos, const std::string& what) {
  throw std::invalid_argument("boundary expression '" + std::string(text) + "' at " +
                              std::to_string(pos) + ": " + what);
}

}  // namespace

BoundaryFunction BoundaryFunction::constant(double c) {
  BoundaryFunction f;
  Term t;
  t.coefficient = c;
  f.terms_.push_back(t);
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, c);
  f.text_ = "const:" + std::string(buf, res.ptr);
  return f;
}

BoundaryFunction BoundaryFunction::parse(std::string_view text) {
  std::string s;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  }
  if (s.empty()) fail(text, 0, "empty expression");

  BoundaryFunction f;
  f.text_ = s;
  Term cur;
  std::size_t i = 0;
  while (true) {
    const std::size_t colon = s.find(':', i);
    if (colon == std::string::npos) fail(text, i, "expected name:value");
    const std::string name = s.substr(i, colon - i);
    double v = 0.0;
    const char* first = s.data() + colon + 1;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || !std::isfinite(v)) fail(text, colon + 1, "bad number");
    if (name == "const") {
      cur.coefficient *= v;
    } else if (name == "exp-decay") {
      if (v < 0.0) fail(text, colon + 1, "exp-decay rate must be >= 0");
      cur.decay += v;
    } else if (name == "poly") {
      if (v < 0.0) fail(text, colon + 1, "poly exponent must be >= 0 (bounded data)");
      cur.power += v;
    } else if (name == "gauss-y") {
      if (!(v > 0.0)) fail(text, colon + 1, "gauss-y width must be > 0");
      cur.inv_width2 += 1.0 / (v * v);
    } else {
      fail(text, i, "unknown atom '" + name + "'");
    }
    i = static_cast<std::size_t>(ptr - s.data());
    if (i == s.size()) {
      f.terms_.push_back(cur);
      break;
    }
    if (s[i] == '*') {
      ++i;
    } else if (s[i] == '+') {
      f.terms_.push_back(cur);
      cur = Term{};
      ++i;
    } else {
      fail(text, i, std::string("unexpected '") + s[i] + "'");
    }
    if (i == s.size()) fail(text, i, "dangling operator");
  }
  return f;
}

double BoundaryFunction::radial(const Term& t, double r) {
  double v = t.coefficient;
  if (t.decay != 0.0) v *= std::exp(-t.decay * r);
  if (t.power != 0.0) v *= std::pow(r, t.power);
  return v;
}

double BoundaryFunction::operator()(double r, std::span<const double> y) const {
  double y2 = 0.0;
  for (double c : y) y2 += c * c;
  double acc = 0.0;
  for (const Term& t : terms_) acc += radial(t, r) * std::exp(-t.inv_width2 * y2);
  return acc;
}

double BoundaryFunction::sup_bound(double r_max) const {
  if (!(r_max >= 0.0)) throw std::invalid_argument("sup_bound: r_max must be >= 0");
  double acc = 0.0;
  for (const Term& t : terms_) {
    // r^p e^{-l r} peaks at r = p / l.
    double r = r_max;
    if (t.decay > 0.0) r = std::min(r_max, t.power / t.decay);
    acc += std::abs(radial(t, r));
  }
  return acc;
}

bool BoundaryFunction::depends_on_y() const {
  return std::any_of(terms_.begin(), terms_.end(),
                     [](const Term& t) { return t.inv_width2 > 0.0; });
}

bool BoundaryFunction::is_zero() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const Term& t) { return t.coefficient == 0.0; });
}

}  // namespace fracgreen
