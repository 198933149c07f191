#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rds/frequencies.hpp"

namespace rds {

inline constexpr int kConfigSchema = 1;

enum class Subcommand {
  Eval,
  Scan,
  NoZeros,
  SignChanges,
  Clt,
  CharFn,
  VarianceProfile,
  Inequalities,
  BuEvent,
  Exceedance,
  Report,
};

std::string_view to_string(Subcommand s);
Subcommand parse_subcommand(std::string_view name);
const std::vector<Subcommand>& all_subcommands();

/// Parameters of one run. Every key has a default; the keys a subcommand
/// accepts are listed by config_keys(). Worker count and output location are
/// execution details and stay out of the canonical form.
struct ExperimentConfig {
  Subcommand subcommand = Subcommand::Eval;

  // sequence
  std::string seq = "naturals";  // naturals | primes | weighted-naturals | explicit
  double seq_exponent = 2.0;
  std::int64_t seq_start = 0;  // 0 selects the family default
  std::vector<double> seq_values;
  std::string seq_file;

  // sampling
  std::uint64_t seed = 1;
  std::int64_t trials = 100;
  std::int64_t first_trial = 0;
  std::int64_t trial = 0;

  // evaluation and scanning
  std::string mode = "certified";  // certified | deterministic | heuristic
  double sigma = 0.75;
  std::vector<double> sigmas;
  double sigma_lo = 0.6;
  double sigma_hi = 2.0;
  std::vector<double> sigma0;
  double sigma_switch = 2.0;
  double cutoff = 1e5;
  double eta = 0.01;
  std::int64_t grid = 33;
  std::int64_t refine = 4;
  bool heuristic = false;
  double heuristic_max_cutoff = 2e7;

  // no-zero experiment
  double condition_cutoff = 0.0;  // 0 disables the A_U conditioning arm
  bool exhaustive = false;

  // B_U event
  std::vector<double> u_ladder;
  double horizon_factor = 1000.0;
  double bu_level = 0.1;

  // exceedance
  std::vector<double> scales;
  std::vector<double> levels;

  // characteristic function
  double t_max = 1.0;
  std::int64_t points = 41;

  // inequalities
  std::int64_t n = 12;
  std::int64_t instances = 100;
  std::int64_t lambda_points = 20;

  // report re-rendering
  std::string input;

  // execution (excluded from the canonical form)
  int workers = 1;
  std::string out;
  bool svg = false;

  // Sets `key` from its textual value; throws ValidationError naming the key.
  void set(std::string_view key, std::string_view value);
  // Throws ValidationError naming the first offending key.
  void validate() const;
  // Sorted "key = value" lines of every key the subcommand accepts.
  std::string canonical() const;
  // FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;

  std::shared_ptr<const FrequencySequence> make_sequence() const;
};

// Defaults of a subcommand.
ExperimentConfig make_config(Subcommand s);

// Keys accepted by a subcommand (execution keys workers/out/svg included).
std::vector<std::string> config_keys(Subcommand s);
bool is_execution_key(std::string_view key);

// Flat text format: "key = value" per line, '#' comments, lists separated by
// commas, an optional "subcommand" key and an optional "schema = 1".
ExperimentConfig parse_config(std::string_view text, std::optional<Subcommand> subcommand = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& file, std::optional<Subcommand> subcommand = std::nullopt);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace rds
