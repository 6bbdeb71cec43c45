#pragma once

#include <map>
#include <iosfwd>
#include <string>
#include <vector>

#include "monolab/parallel.hpp"
#include "monolab/profiles.hpp"

namespace monolab {

enum class Suite { identities, gradient, entropy, cones, fund, koch };
std::string to_string(Suite s);
const std::vector<Suite>& all_suites();

struct Range {
  double lo = 0.0, hi = 0.0;
  std::size_t points = 0;
};

/// INI-style scenario description:
///
///   [scenario]
///   model = exp_cone:0.5, 4      ; repeatable
///   r_range = 0.1, 100, 100
///   t_range = 0.1, 100, 50
///   suites = identities, gradient  ; empty or absent means all
///   output_dir = out/run
///   seed = 0
///   [tolerances]
///   mainmono_residual = 1e-4
struct ScenarioConfig {
  std::vector<ManifoldModel> models;
  Range r_range{0.1, 100.0, 100};
  Range t_range{0.1, 100.0, 50};
  std::vector<Suite> suites;
  std::map<std::string, double> tolerances;  // overrides by check id
  std::string output_dir = "monolab_out";
  long seed = 0;
};

struct ConfigError {
  int line = 0;
  std::string message;
};

struct ParseResult {
  ScenarioConfig config;
  std::vector<ConfigError> errors;  // every problem found, in line order
  bool ok() const { return errors.empty(); }
};

ParseResult parse_config(const std::string& text);

/// Parses `family[:param], n`, `family[:param],n=4` or `family[:param] n`;
/// throws InvalidArgument or InadmissibleModel.
ManifoldModel parse_model(const std::string& text);

struct CheckInfo {
  std::string id;
  Suite suite;
  std::string anchor;  // stable statement name used in summary.csv
  double tolerance;
};

const std::vector<CheckInfo>& check_catalog();
std::string list_checks();

struct CheckRecord {
  std::string check, anchor, model;
  double value = 0.0, tolerance = 0.0;
  bool pass = false;
  std::string note;
};

struct SuiteSummary {
  std::vector<CheckRecord> records;
  std::vector<std::string> files;  // written reports, relative to output_dir
  bool passed() const;
  std::vector<std::string> failing() const;  // "check@model"
};

/// Runs every (model, suite) cell, concurrently when exec is parallel, and
/// writes one CSV per cell plus summary.csv into config.output_dir.
SuiteSummary run_scenario(const ScenarioConfig& config, Exec exec = Exec::parallel);

void write_summary_csv(const SuiteSummary& summary, std::ostream& out);

}  // namespace monolab
