#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rds {

enum class SequenceKind { Naturals, Primes, WeightedNaturals, Explicit };

// A closed interval [lower, upper] that encloses some real quantity.
struct Enclosure {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double x) const { return lower <= x && x <= upper; }
  double width() const { return upper - lower; }
};

// Process-wide cap on the number of terms any single summation may touch.
std::int64_t term_budget();
void set_term_budget(std::int64_t terms);

/// A strictly increasing frequency sequence p_start < p_{start+1} < ... with
/// every element >= 1.
///
/// Elements are addressed by their index in the underlying family (the k-th
/// natural, the k-th prime, ...); only indices >= start_index are served.
/// Built-in families have abscissa of convergence 1 for sum p^(-s). Explicit
/// sequences are accepted as given; that property is then the caller's
/// responsibility.
///
/// Instances are immutable and safe to share across threads.
class FrequencySequence {
 public:
  static FrequencySequence naturals(std::int64_t start_index = 1);
  static FrequencySequence primes(std::int64_t start_index = 1);
  // p_n = n * log(n + 1)^exponent, exponent > 1. The default start index is 2
  // because p_1 = log(2)^exponent < 1.
  static FrequencySequence weighted_naturals(double exponent, std::int64_t start_index = 2);
  static FrequencySequence explicit_values(std::vector<double> values, std::int64_t start_index = 1);
  // One positive real per line, strictly increasing, '#' starts a comment.
  static FrequencySequence load_explicit(const std::filesystem::path& file);

  SequenceKind kind() const { return kind_; }
  double exponent() const { return exponent_; }
  std::int64_t start_index() const { return start_; }
  // Last served index for finite sequences.
  std::optional<std::int64_t> last_index() const;
  bool is_finite() const { return kind_ == SequenceKind::Explicit; }
  // True when sum 1/p is finite.
  bool reciprocal_sum_converges() const;
  // True when sum p^(-sigma) has a finite tail.
  bool tail_converges(double sigma) const;

  double element(std::int64_t index) const;
  // Writes p_first, ..., p_{first+out.size()-1}.
  void elements(std::int64_t first, std::span<double> out) const;
  // Largest index k >= start-1 with p_k <= x (start-1 when none).
  std::int64_t last_index_le(double x) const;
  // Number of served elements <= x.
  std::int64_t count_le(double x) const { return last_index_le(x) - start_ + 1; }

  std::string describe() const;

 private:
  FrequencySequence(SequenceKind kind, double exponent, std::int64_t start,
                    std::shared_ptr<const std::vector<double>> values);
  void validate() const;
  double weighted_element(std::int64_t n) const;

  SequenceKind kind_;
  double exponent_ = 0.0;
  std::int64_t start_ = 1;
  std::shared_ptr<const std::vector<double>> values_;
};

// next_element: p_index; throws OutOfRangeError past the end of a finite sequence.
double next_element(const FrequencySequence& seq, std::int64_t index);

// pi(x) = |{p in P : p <= x}|.
std::int64_t counting_function(const FrequencySequence& seq, double x);

// Compensated sum of p^(-sigma) over p <= cutoff.
double power_sum(const FrequencySequence& seq, double sigma, double cutoff);

// Rigorous enclosure of sum_{p > cutoff} p^(-sigma). Throws DivergenceError
// when the tail is infinite.
Enclosure tail_power_sum(const FrequencySequence& seq, double sigma, double cutoff);

// pi(cutoff) together with memoized power sums at that cutoff.
class SummatoryCache {
 public:
  SummatoryCache(std::shared_ptr<const FrequencySequence> seq, double cutoff);

  double cutoff() const { return cutoff_; }
  std::int64_t count() const { return count_; }
  double power_sum(double sigma);
  const std::map<double, double>& power_sums() const { return power_sums_; }

 private:
  std::shared_ptr<const FrequencySequence> seq_;
  double cutoff_;
  std::int64_t count_;
  std::map<double, double> power_sums_;
};

}  // namespace rds
