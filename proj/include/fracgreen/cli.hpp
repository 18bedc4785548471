#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fracgreen::cli {

enum class Command {
  stable_density,
  exit_density,
  greens,
  envelope_sweep,
  components,
  kdim,
  conjecture,
  solve,
  mc_solve,
  simulate,
  ruin,
  laplace_check,
  gamma_check,
  calibrate,
};

enum class Format { csv, json };

/// Process exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNonConvergence = 3;
inline constexpr int kExitIo = 4;

struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Command command = Command::stable_density;
  /// Command parameters keyed by flag name (without the leading dashes).
  nlohmann::json params = nlohmann::json::object();
  /// Empty or "-" means standard output.
  std::string output;
  Format format = Format::csv;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  int threads = 1;
};

std::string_view command_name(Command c);
std::optional<Command> parse_command(std::string_view name);
const std::vector<Command>& all_commands();

/// Kind of a command parameter; decides parsing and validation.
enum class ParamKind { number, integer, text, numbers, grid };

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::number;
  nlohmann::json default_value;
  std::string help;
  /// Allowed values for ParamKind::text (empty = any).
  std::vector<std::string> choices;
  /// Open/closed numeric bounds applied to every number of the parameter.
  std::optional<double> greater_than, at_least, less_than, at_most;
};

const std::vector<ParamSpec>& command_params(Command c);

/// Fills defaults, converts strings to the declared kinds and checks bounds.
/// Throws ValidationError naming the parameter.
void validate_config(RunConfig& cfg);

/// JSON schema:
///   { "command": "<name>", "params": {...}, "output": "...", "format": "csv"|"json",
///     "seed": int, "tolerance": number, "threads": int }
/// Only "command" is required. Parameters may also sit at the top level.
/// Errors name the line of the offending key.
RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
std::string config_to_json(const RunConfig& cfg);

/// Sequence described by a grid string: "lo:hi:step" (inclusive linear),
/// "log:lo:hi:n" (n log-spaced points), a comma list, or a single number.
std::vector<double> parse_grid(std::string_view spec);

/// Executes the command and writes its artifact. Returns an exit status;
/// diagnostics go to `err`. Output is only created once the result exists.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Entry point of the command-line tool.
int main_entry(int argc, char** argv);

}  // namespace fracgreen::cli
