/**
 * @file config.hpp
 * @brief Flat key-value configuration with dotted sections.
 *
 * Accepted syntax is a small TOML subset:
 *
 *     # comment
 *     model = "ou"            # quoted or bare strings
 *     theta = 0.5
 *     deltas = [2^-5, 2^-6]   # 2^k is accepted wherever a number is
 *     [newton]
 *     tol = 1e-5              # same as newton.tol = 1e-5
 *
 * A run manifest (JSON with a "config" object) is accepted as well, so a
 * run can be repeated from its manifest.
 */
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tclsde/composer.hpp"
#include "tclsde/experiment.hpp"

namespace tclsde {

struct ConfigValue {
  enum class Kind { number, boolean, string, list };
  Kind kind = Kind::string;
  double number = 0.0;
  bool boolean = false;
  std::string text;          // raw token for numbers, contents for strings
  std::vector<double> list;
};

class ConfigDocument {
 public:
  /// Throws ParseError (with line numbers) on malformed or empty input.
  static ConfigDocument parse(std::string_view text);
  static ConfigDocument load_file(const std::string& path);

  bool contains(const std::string& key) const { return entries_.count(key) > 0; }
  const std::map<std::string, ConfigValue>& entries() const noexcept { return entries_; }
  /// Overrides one key from a textual value (same syntax as the file).
  void set(const std::string& key, std::string_view value_text);

 private:
  std::map<std::string, ConfigValue> entries_;
};

struct PathPlan {
  ModelConfig model;
  TimeChangedPathPlan path;
};

/// Fully validated plans; ValidationError lists every problem found.
ExperimentPlan load_experiment_plan(const ConfigDocument& doc);
PathPlan load_path_plan(const ConfigDocument& doc);
ModelConfig load_model_config(const ConfigDocument& doc);

/// Resolved configuration as ordered (key, value) pairs; numbers at 17 significant digits.
std::vector<std::pair<std::string, std::string>> resolved_entries(const ExperimentPlan& plan);
std::string to_config_text(const ExperimentPlan& plan);

/// "%.17g"-style text; "nan"/"inf" for non-finite values.
std::string format_double(double v);

}  // namespace tclsde
