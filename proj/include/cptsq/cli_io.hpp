#pragma once

// Command-line front end: configuration parsing, CSV/JSON emission and the
// figure presets. This is the only part of the library that touches files or
// the terminal.

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "cptsq/model.hpp"

namespace cptsq {

/// Bad command line or config syntax (exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// --help / --version: what() holds the text to print (exit code 0).
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File-system failure while emitting results (exit code 1).
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int io = 1;
inline constexpr int usage = 2;
inline constexpr int invalid_physics = 3;
inline constexpr int numerical = 4;
}  // namespace exit_code

struct GridSettings {
  std::optional<double> omega_min, omega_max;
  std::optional<int> omega_points;
  std::optional<double> delta_min, delta_max;
  std::optional<int> delta_points;
  std::optional<double> w_min, w_max;
  std::optional<int> w_points;
  std::optional<std::vector<double>> ratios;

  void merge(const GridSettings& over);
};

struct RunConfig {
  std::string command;
  std::string figure_id;  // for `figure`
  RawParams params;
  GridSettings grids;
  std::string out;  // output path prefix; empty = summary only
  bool serial = false;
};

inline constexpr const char* kToolVersion = "cptsq 1.0.0";

/// Parses "1.5", "-2e-3", "0.3+0.4i", "0.3-0.4i", "2i".
cplx parse_complex(const std::string& text);

/// Config contents: a single JSON object or flat `key = value` lines
/// (`#` starts a comment). Keys are the SystemParams field names plus
/// `setting`, `omega` and the grid keys. Unknown keys are a UsageError.
void parse_config_text(const std::string& text, RawParams& params,
                       GridSettings& grids);
void load_config_file(const std::string& path, RawParams& params,
                      GridSettings& grids);

/// Throws UsageError on unknown subcommands or flags and HelpRequested for
/// --help or --version. Flag values override values loaded through --config.
RunConfig parse_cli(int argc, const char* const* argv);

// ---------------------------------------------------------------------------
// Serialization

/// 17 significant digits, "nan"/"inf"/"-inf" for non-finite values.
std::string format_number(double v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
};

/// RFC-4180 style quoting, LF line endings. Throws std::logic_error if a
/// row's column count differs from the header.
std::string to_csv(const Table& t);

nlohmann::json params_to_json(const SystemParams& p);
nlohmann::json grids_to_json(const GridSettings& g);

/// Writes through a temporary file in the same directory and renames it into
/// place; on failure the temporary is removed and OutputError names the path
/// and the OS error.
void write_file_atomic(const std::string& path, const std::string& content);

/// Writes <prefix>.csv and <prefix>.json; the JSON sidecar is
/// {params, outputs, tool_version, grid_settings}.
void emit_results(const std::string& prefix, const Table& csv,
                  const nlohmann::json& params, const nlohmann::json& outputs,
                  const nlohmann::json& grids);

/// Runs a parsed configuration, writes outputs and the one-line summary to
/// `out`, diagnostics to `err`. Returns the process exit code.
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// parse_cli + run_command with the exit-code contract applied.
int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace cptsq
