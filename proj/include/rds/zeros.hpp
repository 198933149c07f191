#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "rds/eval.hpp"

namespace rds {

enum class Sign : std::int8_t { Negative = -1, Undecided = 0, Positive = 1 };

inline Sign to_sign(int s) { return s > 0 ? Sign::Positive : (s < 0 ? Sign::Negative : Sign::Undecided); }
char to_char(Sign s);

struct ScanOptions {
  double sigma_lo = 0.6;
  double sigma_hi = 2.0;
  int initial_grid = 33;
  int max_refinement = 4;
  double eta_budget = 0.01;
  double cutoff = 1e5;
  // Base exponents of the tail certificates; empty means one certificate at
  // (1/2 + sigma_lo) / 2. The eta budget is split evenly between them.
  std::vector<double> sigma0s;
  // Also use the deterministic tail radius where the tail converges absolutely.
  bool deterministic = true;
  // Fill certified-undecided points with signs of the partial sum truncated at
  // max(cutoff, y(sigma)), when that cutoff stays within heuristic_max_cutoff.
  bool heuristic = false;
  double heuristic_max_cutoff = 2e7;
  // Grid points added to the initial grid (kept when inside [sigma_lo, sigma_hi]).
  std::vector<double> extra_points;
};

struct SignScanReport {
  std::vector<double> sigma_grid;
  std::vector<Sign> decided_signs;
  std::vector<CertificateKind> deciding_certificate;  // Heuristic where undecided
  std::vector<Sign> heuristic_signs;                  // certified sign, else heuristic
  std::vector<std::pair<double, double>> sign_change_brackets;
  int sign_changes = 0;
  int combined_sign_changes = 0;
  double undecided_measure = 0.0;
  bool no_zero_certified = false;
  bool resolution_reached = false;
  int refinement_rounds = 0;
  double eta_total = 0.0;
  std::vector<TailCertificate> certificates;
  // Filled by certify_no_zeros.
  std::vector<std::pair<double, int>> domination_ladder;  // (sigma, sign or 0)
  std::optional<double> closure_sigma;
  // Every gap of the grid on [sigma_lo, closure_sigma] was shown zero free by a
  // second-order expansion of the partial sum plus the tail radius.
  bool interval_closure = false;
  int closure_intervals = 0;
};

Sign certified_sign(const SamplePath& path, double sigma, const TailCertificate& cert);

SignScanReport scan(const SamplePath& path, const ScanOptions& options);
SignScanReport scan(const SamplePath& path, double sigma_lo, double sigma_hi, int initial_grid, int max_refinement,
                    double eta_budget);

struct NoZeroOptions {
  ScanOptions scan;
  double sigma_switch = 2.0;
  int ladder_steps = 6;  // domination checks at sigma_switch * 2^j
  int max_interval_depth = 12;
  int max_interval_checks = 20000;
};

// Scans [sigma_lo, sigma_switch] and closes [sigma_switch, inf) with
// domination certificates ending in a leading-term closure. Certification also
// requires every gap between grid points up to the closure to be zero free.
SignScanReport certify_no_zeros(const SamplePath& path, double sigma_lo, const NoZeroOptions& options = {});

// Number of sign alternations among the decided entries. Undecided entries are
// skipped: each alternation between two decided points still forces a zero in
// between, and inserting points can only add alternations.
int count_sign_changes(const std::vector<Sign>& signs);
// The same count restricted to grid points with sigma >= sigma_from.
int count_sign_changes_from(const std::vector<double>& grid, const std::vector<Sign>& signs, double sigma_from);

}  // namespace rds
