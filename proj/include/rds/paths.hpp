#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "rds/frequencies.hpp"
#include "rds/rng.hpp"

namespace rds {

/// One realization of the random signs X_p, p in P.
///
/// Signs are a pure function of (master_seed, trial_index, element index), so
/// any prefix can be revisited in any order from any thread. A path may carry
/// forced signs on top of its base stream (used to realize conditioning
/// events) and a global flip.
class SamplePath {
 public:
  static SamplePath random(std::shared_ptr<const FrequencySequence> seq, std::uint64_t master_seed,
                           std::uint64_t trial_index);
  // Every sign equal to `sign` (+1 or -1).
  static SamplePath constant(std::shared_ptr<const FrequencySequence> seq, int sign);

  const FrequencySequence& sequence() const { return *seq_; }
  const std::shared_ptr<const FrequencySequence>& sequence_ptr() const { return seq_; }
  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t trial_index() const { return trial_; }
  bool is_flipped() const { return flipped_; }

  int sign_at(std::int64_t index) const;
  // Signs (as +-1.0) for indices first, first+1, ...
  void fill_signs(std::int64_t first, std::span<double> out) const;

  // Same path with every sign negated.
  SamplePath flipped() const;
  // Path forcing indices [start_index, last_index] to `sign`.
  SamplePath with_forced_prefix(std::int64_t last_index, int sign) const;
  // Path with the given index -> sign overrides merged in (later wins).
  SamplePath with_overrides(const std::map<std::int64_t, int>& assignment) const;

 private:
  SamplePath(std::shared_ptr<const FrequencySequence> seq, std::uint64_t seed, std::uint64_t trial, int constant);

  std::shared_ptr<const FrequencySequence> seq_;
  std::uint64_t master_seed_ = 0;
  std::uint64_t trial_ = 0;
  CounterRng rng_;
  int constant_ = 0;  // 0 means random stream
  bool flipped_ = false;
  std::int64_t forced_last_ = 0;
  int forced_sign_ = 1;
  std::shared_ptr<const std::vector<std::pair<std::int64_t, int>>> overrides_;
};

// Path agreeing with `assignment` where given and with `base` elsewhere.
// Throws ValidationError for signs outside {-1, +1} or unserved indices.
SamplePath forced_path(const std::map<std::int64_t, int>& assignment, const SamplePath& base);

// Conditioning event A_U: every element p <= cutoff gets `sign`.
SamplePath force_up_to(const SamplePath& base, double cutoff, int sign = 1);

// max over x in (from_cutoff, to_cutoff] of |sum_{from < p <= x} X_p p^(-sigma0)|.
double running_sup(const SamplePath& path, double sigma0, double from_cutoff, double to_cutoff);

// Same quantity over the index range [first, last] using precomputed weights,
// where weights[0] belongs to index `weights_first`.
double running_sup_indexed(const SamplePath& path, std::span<const double> weights, std::int64_t weights_first,
                           std::int64_t first, std::int64_t last);

/// Summatory function A(x) = sum_{p <= x} X_p at each element up to a cutoff,
/// plus running weighted sums for registered exponents.
struct PrefixSums {
  double cutoff = 0.0;
  std::vector<std::pair<double, std::int64_t>> a_of_x;  // (p, A(p))
  std::map<double, std::vector<double>> weighted;        // sigma -> running sum at each p
};

PrefixSums prefix_sums(const SamplePath& path, double cutoff, std::span<const double> sigmas = {});

}  // namespace rds
