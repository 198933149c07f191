#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

namespace rds {

// sum_k a_k X_k with independent Rademacher X_k.
struct WeightedRademacherInstance {
  std::vector<double> weights;

  explicit WeightedRademacherInstance(std::vector<double> a);
  std::size_t size() const { return weights.size(); }
  double sum_of_squares() const;
};

// Largest n accepted by the exhaustive oracles.
inline constexpr std::size_t kMaxEnumeration = 24;

/// Exact probability numerator / 2^log2_denominator.
struct Dyadic {
  std::uint64_t numerator = 0;
  int log2_denominator = 0;

  // Exact: numerator < 2^53 for every enumerable instance.
  double value() const;
  friend bool operator==(const Dyadic& a, const Dyadic& b);
  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);
};

enum class TailMode {
  Sum,           // P(sum_k a_k X_k >= lambda)
  MaxPrefixAbs,  // P(max_m |sum_{k<=m} a_k X_k| >= lambda)
};

// exp(-lambda^2 / (2 sum a_k^2)).
double hoeffding_bound(const WeightedRademacherInstance& instance, double lambda);

// 3 * max_m P(|S_m| >= t/3) given the prefix probabilities for that threshold.
double levy_bound(const WeightedRademacherInstance& instance, std::span<const double> prefix_tail_probs, double t);

// Exact probability by enumerating all 2^n sign vectors. Partial sums are
// accumulated left to right in double precision. `workers` splits the
// enumeration into blocks of leading signs with an integer reduction.
Dyadic exact_tail(const WeightedRademacherInstance& instance, double lambda, TailMode mode, int workers = 1);

// P(|S_m| >= x) for m = 1..n, exactly.
std::vector<Dyadic> exact_prefix_abs_tails(const WeightedRademacherInstance& instance, double x);
// The two-sided Hoeffding bounds 2 exp(-x^2 / (2 sum_{k<=m} a_k^2)) for m = 1..n.
std::vector<double> hoeffding_prefix_abs_tails(const WeightedRademacherInstance& instance, double x);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double x) const { return lower <= x && x <= upper; }
};

// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::int64_t successes, std::int64_t trials, double confidence = 0.95);

}  // namespace rds
