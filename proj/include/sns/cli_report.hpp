#pragma once

// Command-line driver: parses a run configuration, dispatches one experiment
// and writes manifest.txt, results.csv and optional SVG plots.

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace sns {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitTolerance = 1;
inline constexpr int kExitConfig = 2;

/// Thrown by parse_run_config for --help; carries the help text.
struct HelpRequest {
  std::string text;
};

struct RunConfig {
  std::string command;
  /// NaN (and an empty N) select the command's defaults.
  double p = std::numeric_limits<double>::quiet_NaN();
  double q = std::numeric_limits<double>::quiet_NaN();
  double M = 16.0;
  std::vector<int> N;
  double sigma = 2.0;
  int jmin = -12;
  int jmax = -2;
  /// Envelope spacing and node count of the product grid (0 keeps defaults).
  double h = 0.0;
  int K = 0;
  /// Block grid nodes per axis (0 keeps the default).
  int Kb = 0;
  /// Block refinement tolerance (0 keeps the default).
  double tol = 0.0;
  std::string out = "sns_out";
  bool plot = false;
  std::string config;
};

/// The subcommands in the order of the help text.
const std::vector<std::string>& commands();

/// Parses arguments (and the optional key=value config file, which flags
/// override) and fills in command defaults. Throws ConfigError on invalid
/// input.
RunConfig parse_run_config(int argc, const char* const* argv);

/// Checks the module preconditions for the chosen command before any compute.
void validate(const RunConfig& cfg);

/// A finished run: results table, manifest entries and plots, not yet on disk.
struct RunOutput {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// key=value pairs, in insertion order.
  std::vector<std::pair<std::string, std::string>> manifest;
  /// file name -> SVG text.
  std::vector<std::pair<std::string, std::string>> plots;
  /// Human-readable summary printed to stdout.
  std::string summary;
  /// Tolerance checks that failed (empty means exit 0).
  std::vector<std::string> failures;
};

/// Runs the configured experiment in memory.
RunOutput execute(const RunConfig& cfg);

/// Writes manifest.txt, results.csv and the plots into cfg.out.
void write_outputs(const RunConfig& cfg, const RunOutput& out, double wall_seconds);

/// Full entry point: parse, validate, execute, write. Returns the exit code
/// and prints a one-line diagnostic on failure.
int run(int argc, const char* const* argv);

/// %.17g.
std::string format_number(double v);

/// Comma-separated rendering of a results table with a header row.
std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// A minimal line plot as standalone SVG; log axes take log10 of the data.
std::string svg_plot(const std::string& title, const std::string& xlabel,
                     const std::string& ylabel, const std::vector<PlotSeries>& series,
                     bool logx, bool logy);

}  // namespace sns
