#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <tuple>

namespace fracgreen {

/// Band constants of the two-regime envelope for one (beta, gamma, d).
struct EnvelopeCalibration {
  double log_k_low = 0.0;
  double log_k_high = 0.0;
  /// max log ratio - min log ratio on the calibration grid; later sweeps are
  /// checked against it.
  double log_spread = 0.0;
  /// "inverse" or "direct" small-Omega A exponent.
  std::string a_exponent = "inverse";
};

/// Single dominance constants (log) of the component-integral chains, one per
/// quadrant: [Omega<=1 A<=1, Omega<=1 A>=1, Omega>=1 A<=1, Omega>=1 A>=1].
struct OrderingCalibration {
  std::array<double, 4> log_c{0.0, 0.0, 0.0, 0.0};
};

struct StableCalibration {
  double switch_radius = 0.0;
  double tail_radius = 0.0;
};

/// Versioned JSON store of calibrated constants, keyed by (beta, gamma, d).
class CalibrationStore {
 public:
  static constexpr int kVersion = 1;
  using Key = std::tuple<long long, long long, int>;

  static CalibrationStore load(const std::string& path);
  void save(const std::string& path) const;
  std::string to_json() const;
  static CalibrationStore from_json(const std::string& text);

  std::optional<EnvelopeCalibration> envelope(double beta, double gamma, int d) const;
  void set_envelope(double beta, double gamma, int d, const EnvelopeCalibration& c);
  std::optional<OrderingCalibration> ordering(double beta, double gamma, int d) const;
  void set_ordering(double beta, double gamma, int d, const OrderingCalibration& c);
  std::optional<StableCalibration> stable(double alpha) const;
  void set_stable(double alpha, const StableCalibration& c);

  bool empty() const { return envelope_.empty() && ordering_.empty() && stable_.empty(); }

 private:
  static Key key(double beta, double gamma, int d);
  std::map<Key, EnvelopeCalibration> envelope_;
  std::map<Key, OrderingCalibration> ordering_;
  std::map<long long, StableCalibration> stable_;
};

/// Path of the repository store: $FRACGREEN_CALIBRATION if set, otherwise
/// data/calibration.json in the source tree.
std::string default_calibration_path();

/// Store loaded once from default_calibration_path(); empty if the file does
/// not exist.
const CalibrationStore& default_calibration();

}  // namespace fracgreen
