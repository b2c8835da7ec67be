#pragma once

// Experiment configuration, the registered experiments and their CSV/JSON
// emission.

#include "hatlab/numerics.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hatlab {

/// Malformed configuration or flags (CLI exit code 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable config or unwritable output (CLI exit code 3).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric field outside its cap (CLI exit code 2).
class CapError : public NumericError {
 public:
  using NumericError::NumericError;
};

struct Caps {
  static constexpr long max_bits = 1L << 16;
  static constexpr long max_guard = 4096;
  static constexpr int max_order = 512;
  static constexpr long max_grid_points = 4096;
};

enum class OutputFormat { csv, json };

struct ExperimentConfig {
  std::string experiment;
  /// Empty means the experiment's default function set.
  std::string function;
  /// Scalar, comma list, or a:b:n grid; empty means the experiment default.
  std::string t;
  /// 0 means the experiment's default order.
  int order = 0;
  long bits = 256;
  long guard_bits = 32;
  double delta = 0.1;
  OutputFormat format = OutputFormat::csv;
  std::string out;
};

using ConfigValues = std::map<std::string, std::string>;

/// Flat `key = value` lines; `#` starts a comment. Unknown or repeated keys
/// are rejected.
ConfigValues parse_config_text(std::string_view text);
ConfigValues read_config_file(const std::filesystem::path& path);
/// Overlays `flags` on `file`, fills defaults and checks caps.
ExperimentConfig resolve_config(const ConfigValues& file, const ConfigValues& flags);
const std::vector<std::string>& config_keys();

/// "x", "x,y,z" or "a:b:n" (n evenly spaced points, both ends included).
/// Exact endpoints give exact grid points.
std::vector<Scalar> parse_grid(std::string_view text, const PrecisionContext& ctx);

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct Verdict {
  std::string name;
  bool pass = false;
  /// Threshold in `key<=value` / `key>=value` form.
  std::string threshold;
  std::string observed;
};

struct ExperimentResult {
  std::string id;
  std::string title;
  bool exploratory = false;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<Table> tables;
  std::vector<Verdict> verdicts;

  const Table* table(std::string_view name) const;
};

struct ExperimentInfo {
  std::string id;
  std::string title;
  bool exploratory = false;
};
const std::vector<ExperimentInfo>& experiments();

ExperimentResult run_experiment(const ExperimentConfig& cfg);
/// Single-point shortcuts behind `hatlab classify` and `hatlab radius`.
ExperimentResult classify_command(const ExperimentConfig& cfg);
ExperimentResult radius_command(const ExperimentConfig& cfg);

std::string to_csv(const ExperimentResult& result);
std::string to_json(const ExperimentResult& result);
ExperimentResult from_json(std::string_view text);
/// Writes to `path`, or stdout when the path is empty.
void emit(const ExperimentResult& result, OutputFormat format, const std::string& path);

/// Shortest text that parses back to the same double.
std::string format_double(double x);

}  // namespace hatlab
