#include "fracgreen/calibration.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fracgreen {

namespace {

using nlohmann::json;

long long quantize(double v) { return std::llround(v * 1e9); }
double dequantize(long long q) { return static_cast<double>(q) * 1e-9; }

}  // namespace

CalibrationStore::Key CalibrationStore::key(double beta, double gamma, int d) {
  return {quantize(beta), quantize(gamma), d};
}

std::optional<EnvelopeCalibration> CalibrationStore::envelope(double beta, double gamma,
                                                              int d) const {
  auto it = envelope_.find(key(beta, gamma, d));
  if (it == envelope_.end()) return std::nullopt;
  return it->second;
}

void CalibrationStore::set_envelope(double beta, double gamma, int d,
                                    const EnvelopeCalibration& c) {
  envelope_[key(beta, gamma, d)] = c;
}

std::optional<OrderingCalibration> CalibrationStore::ordering(double beta, double gamma,
                                                              int d) const {
  auto it = ordering_.find(key(beta, gamma, d));
  if (it == ordering_.end()) return std::nullopt;
  return it->second;
}

void CalibrationStore::set_ordering(double beta, double gamma, int d,
                                    const OrderingCalibration& c) {
  ordering_[key(beta, gamma, d)] = c;
}

std::optional<StableCalibration> CalibrationStore::stable(double alpha) const {
  auto it = stable_.find(quantize(alpha));
  if (it == stable_.end()) return std::nullopt;
  return it->second;
}

void CalibrationStore::set_stable(double alpha, const StableCalibration& c) {
  stable_[quantize(alpha)] = c;
}

std::string CalibrationStore::to_json() const {
  json j;
  j["version"] = kVersion;
  j["stable"] = json::array();
  for (const auto& [a, c] : stable_) {
    j["stable"].push_back({{"alpha", dequantize(a)},
                           {"switch_radius", c.switch_radius},
                           {"tail_radius", c.tail_radius}});
  }
  j["envelope"] = json::array();
  for (const auto& [k, c] : envelope_) {
    j["envelope"].push_back({{"beta", dequantize(std::get<0>(k))},
                             {"gamma", dequantize(std::get<1>(k))},
                             {"d", std::get<2>(k)},
                             {"log_k_low", c.log_k_low},
                             {"log_k_high", c.log_k_high},
                             {"log_spread", c.log_spread},
                             {"a_exponent", c.a_exponent}});
  }
  j["ordering"] = json::array();
  for (const auto& [k, c] : ordering_) {
    j["ordering"].push_back({{"beta", dequantize(std::get<0>(k))},
                             {"gamma", dequantize(std::get<1>(k))},
                             {"d", std::get<2>(k)},
                             {"log_c", c.log_c}});
  }
  return j.dump(2) + "\n";
}

CalibrationStore CalibrationStore::from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.value("version", 0) != kVersion) {
    throw std::runtime_error("calibration store: unsupported version");
  }
  CalibrationStore s;
  for (const auto& e : j.value("stable", json::array())) {
    s.set_stable(e.at("alpha").get<double>(),
                 {e.at("switch_radius").get<double>(), e.at("tail_radius").get<double>()});
  }
  for (const auto& e : j.value("envelope", json::array())) {
    EnvelopeCalibration c;
    c.log_k_low = e.at("log_k_low").get<double>();
    c.log_k_high = e.at("log_k_high").get<double>();
    c.log_spread = e.at("log_spread").get<double>();
    c.a_exponent = e.value("a_exponent", std::string("inverse"));
    s.set_envelope(e.at("beta").get<double>(), e.at("gamma").get<double>(),
                   e.at("d").get<int>(), c);
  }
  for (const auto& e : j.value("ordering", json::array())) {
    OrderingCalibration c;
    c.log_c = e.at("log_c").get<std::array<double, 4>>();
    s.set_ordering(e.at("beta").get<double>(), e.at("gamma").get<double>(),
                   e.at("d").get<int>(), c);
  }
  return s;
}

CalibrationStore CalibrationStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open calibration store " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

void CalibrationStore::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write calibration store " + path);
  out << to_json();
  if (!out) throw std::runtime_error("write failed for calibration store " + path);
}

std::string default_calibration_path() {
  if (const char* env = std::getenv("FRACGREEN_CALIBRATION"); env && *env) return env;
  return std::string(FRACGREEN_DATA_DIR) + "/calibration.json";
}

const CalibrationStore& default_calibration() {
  static const CalibrationStore store = [] {
    const std::string path = default_calibration_path();
    if (!std::filesystem::exists(path)) return CalibrationStore{};
    return CalibrationStore::load(path);
  }();
  return store;
}

}  // namespace fracgreen
