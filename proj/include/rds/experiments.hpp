#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rds/config.hpp"

namespace rds {

// Version string embedded in every report.
std::string code_version();

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// Outcome of one run. `payload` and `tables` depend only on the canonical
/// config: reruns reproduce them byte for byte whatever the worker count.
struct ExperimentReport {
  Subcommand subcommand = Subcommand::Eval;
  std::string config_hash;
  std::string canonical_config;
  std::uint64_t master_seed = 0;
  nlohmann::ordered_json payload;
  std::vector<Table> tables;
  std::optional<std::string> svg;
  std::string summary;
  // False when a checked inequality or structural property failed.
  bool checks_passed = true;
  double wall_time_seconds = 0.0;

  // Versioned document: header, canonical config, payload, wall time.
  nlohmann::ordered_json document() const;
  // Serialized payload plus tables; what reproducibility compares.
  std::string payload_bytes() const;
};

ExperimentReport run_eval(const ExperimentConfig& config);
ExperimentReport run_scan(const ExperimentConfig& config);
ExperimentReport run_no_zero_experiment(const ExperimentConfig& config);
ExperimentReport run_sign_change_experiment(const ExperimentConfig& config);
ExperimentReport run_clt(const ExperimentConfig& config);
ExperimentReport run_char_fn(const ExperimentConfig& config);
ExperimentReport run_variance_profile(const ExperimentConfig& config);
ExperimentReport run_inequalities(const ExperimentConfig& config);
ExperimentReport run_bu_event_experiment(const ExperimentConfig& config);
ExperimentReport run_exceedance_experiment(const ExperimentConfig& config);
ExperimentReport run_report(const ExperimentConfig& config);

// Validates the config, then dispatches on its subcommand.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Human-readable plan printed by --dry-run.
std::string describe_plan(const ExperimentConfig& config);

struct SvgSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Self-contained SVG line chart.
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<SvgSeries>& series, bool log_x = false);

std::string to_csv(const Table& table);

// Writes <subcommand>-<hash>.json, one CSV per table and the SVG if present.
// Returns the written paths.
std::vector<std::string> write_report(const ExperimentReport& report, const std::string& out_dir);

}  // namespace rds
