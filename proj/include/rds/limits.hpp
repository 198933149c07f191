#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "rds/paths.hpp"

namespace rds {

// Standard normal CDF.
double normal_cdf(double x);

/// prod_{p <= cutoff} cos(t p^(-sigma) / V), V^2 = sum_{p <= cutoff} p^(-2 sigma).
/// Accumulated as a sum of log|cos| with sign tracking; a factor that is
/// exactly zero makes the result 0.
double char_function(const FrequencySequence& seq, double sigma, double t, double cutoff);

// Precomputed scaled weights p^(-sigma) / V for repeated evaluation in t.
class CharFunctionTable {
 public:
  CharFunctionTable(const FrequencySequence& seq, double sigma, double cutoff);
  double operator()(double t) const;
  double scale() const { return scale_; }  // V

 private:
  std::vector<double> weights_;
  double scale_ = 0.0;
};

// sup over t in [-t_max, t_max] (grid of `points` values of |t|) of |phi(t) - exp(-t^2/2)|.
double char_function_deviation(const FrequencySequence& seq, double sigma, double cutoff, double t_max = 1.0,
                               int points = 41);

struct CltSample {
  std::vector<double> values;
  double truncated_variance = 0.0;  // sum_{p <= cutoff} p^(-2 sigma)
  Enclosure full_variance;          // truncated + tail enclosure (upper infinite if divergent)
  double variance_fraction = 0.0;   // truncated / full_variance.upper
  bool low_variance_warning = false;
};

// Normalized values partial_sum(path, sigma, cutoff) / sqrt(truncated variance)
// for each given path (all over the same sequence).
CltSample clt_sample(std::span<const SamplePath> paths, double sigma, double cutoff, int workers = 1);
// Same for trials [first_trial, first_trial + count) of random paths.
CltSample clt_sample(std::shared_ptr<const FrequencySequence> seq, std::uint64_t master_seed,
                     std::uint64_t first_trial, std::uint64_t count, double sigma, double cutoff, int workers = 1);

// Two-sided Kolmogorov-Smirnov distance of the empirical CDF to N(0, 1).
double ks_statistic(std::span<const double> samples);

struct VarianceProfile {
  double sigma = 0.0;
  double y_rule = 0.0;           // exp(1 / (2 sigma - 1))
  double v_y = 0.0;              // sum_{p <= y} (p^-sigma - p^-1/2)^2
  double mean_value_bound = 0.0; // (sigma - 1/2)^2 sum_{p <= y} log^2 p / p
  Enclosure u_y;                 // sum_{p > y} p^(-2 sigma)
  double v2 = 0.0;               // sum_{p <= v2_cutoff} p^(-2 sigma)
  double v2_cutoff = 0.0;
};

// Throws ResourceError naming the smallest feasible sigma when y exceeds the
// term budget.
VarianceProfile variance_profile(const FrequencySequence& seq, double sigma, double v2_cutoff = 0.0);

// Smallest sigma whose y(sigma) stays within `max_cutoff`.
double minimal_feasible_sigma(double max_cutoff);

}  // namespace rds
