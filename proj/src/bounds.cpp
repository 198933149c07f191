#include "rds/bounds.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/erf.hpp>

#include "rds/error.hpp"
#include "rds/parallel.hpp"

namespace rds {
namespace {

void check_enumerable(const WeightedRademacherInstance& instance) {
  if (instance.size() > kMaxEnumeration) {
    throw ResourceError("exhaustive enumeration supports n <= " + std::to_string(kMaxEnumeration) + ", got " +
                        std::to_string(instance.size()));
  }
}

// Counts leaves below `depth` whose path satisfies the mode predicate.
struct Enumerator {
  const std::vector<double>& a;
  double lambda;
  TailMode mode;

  std::uint64_t count(std::size_t depth, double sum, double max_abs) const {
    if (mode == TailMode::MaxPrefixAbs && max_abs >= lambda) {
      return std::uint64_t{1} << (a.size() - depth);
    }
    if (depth == a.size()) {
      return mode == TailMode::Sum ? (sum >= lambda ? 1 : 0) : 0;
    }
    std::uint64_t total = 0;
    for (const double s : {1.0, -1.0}) {
      const double next = sum + s * a[depth];
      total += count(depth + 1, next, std::max(max_abs, std::abs(next)));
    }
    return total;
  }
};

Dyadic reduce(std::uint64_t numerator, int log2_denominator) {
  while (log2_denominator > 0 && numerator % 2 == 0) {
    numerator /= 2;
    --log2_denominator;
  }
  if (numerator == 0) log2_denominator = 0;
  return {numerator, log2_denominator};
}

}  // namespace

WeightedRademacherInstance::WeightedRademacherInstance(std::vector<double> a) : weights(std::move(a)) {
  if (weights.empty()) throw ValidationError("weighted Rademacher instance needs n >= 1");
  for (const double w : weights) {
    if (!std::isfinite(w)) throw ValidationError("weights must be finite");
  }
}

double WeightedRademacherInstance::sum_of_squares() const {
  double s = 0.0;
  for (const double w : weights) s += w * w;
  return s;
}

double Dyadic::value() const { return std::ldexp(static_cast<double>(numerator), -log2_denominator); }

bool operator==(const Dyadic& a, const Dyadic& b) { return (a <=> b) == std::strong_ordering::equal; }

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
  // Bring both to the common denominator 2^max; numerators stay below 2^64.
  const int d = std::max(a.log2_denominator, b.log2_denominator);
  const auto lhs = static_cast<unsigned __int128>(a.numerator) << (d - a.log2_denominator);
  const auto rhs = static_cast<unsigned __int128>(b.numerator) << (d - b.log2_denominator);
  return lhs <=> rhs;
}

double hoeffding_bound(const WeightedRademacherInstance& instance, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("hoeffding_bound needs lambda > 0");
  const double v = instance.sum_of_squares();
  if (!(v > 0.0)) throw DomainError("hoeffding_bound needs a nonzero weight");
  return std::exp(-lambda * lambda / (2.0 * v));
}

double levy_bound(const WeightedRademacherInstance& instance, std::span<const double> prefix_tail_probs, double t) {
  if (!(t > 0.0)) throw DomainError("levy_bound needs t > 0");
  if (prefix_tail_probs.size() != instance.size()) {
    throw ValidationError("levy_bound needs one prefix probability per weight");
  }
  return 3.0 * *std::max_element(prefix_tail_probs.begin(), prefix_tail_probs.end());
}

Dyadic exact_tail(const WeightedRademacherInstance& instance, double lambda, TailMode mode, int workers) {
  check_enumerable(instance);
  const auto n = instance.size();
  const Enumerator e{instance.weights, lambda, mode};
  // Split on the leading `split` signs; each block is summed exactly.
  const std::size_t split = std::min<std::size_t>(n, workers > 1 ? 6 : 0);
  const std::size_t blocks = std::size_t{1} << split;
  std::vector<std::uint64_t> counts(blocks, 0);
  parallel_for(blocks, workers, [&](std::size_t b) {
    double sum = 0.0;
    double max_abs = 0.0;
    for (std::size_t k = 0; k < split; ++k) {
      const double s = ((b >> (split - 1 - k)) & 1) ? -1.0 : 1.0;
      sum += s * instance.weights[k];
      max_abs = std::max(max_abs, std::abs(sum));
    }
    counts[b] = e.count(split, sum, max_abs);
  });
  std::uint64_t total = 0;
  for (const auto c : counts) total += c;
  return reduce(total, static_cast<int>(n));
}

std::vector<Dyadic> exact_prefix_abs_tails(const WeightedRademacherInstance& instance, double x) {
  check_enumerable(instance);
  const auto n = instance.size();
  std::vector<std::uint64_t> hits(n, 0);
  // Breadth-first over prefixes: level m holds the 2^m partial sums S_m.
  std::vector<double> level{0.0};
  for (std::size_t m = 0; m < n; ++m) {
    std::vector<double> next;
    next.reserve(level.size() * 2);
    for (const double s : level) {
      for (const double sign : {1.0, -1.0}) {
        const double v = s + sign * instance.weights[m];
        if (std::abs(v) >= x) ++hits[m];
        next.push_back(v);
      }
    }
    level = std::move(next);
  }
  std::vector<Dyadic> out;
  for (std::size_t m = 0; m < n; ++m) out.push_back(reduce(hits[m], static_cast<int>(m + 1)));
  return out;
}

std::vector<double> hoeffding_prefix_abs_tails(const WeightedRademacherInstance& instance, double x) {
  std::vector<double> out;
  double v = 0.0;
  for (const double w : instance.weights) {
    v += w * w;
    out.push_back(v > 0.0 ? 2.0 * std::exp(-x * x / (2.0 * v)) : (x <= 0.0 ? 1.0 : 0.0));
  }
  return out;
}

Interval wilson_interval(std::int64_t successes, std::int64_t trials, double confidence) {
  if (trials < 1 || successes < 0 || successes > trials) {
    throw ValidationError("wilson_interval needs 0 <= successes <= trials and trials >= 1");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) throw ValidationError("confidence must lie in (0, 1)");
  const double z = std::sqrt(2.0) * boost::math::erfc_inv(1.0 - confidence);
  const auto n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  Interval out{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (successes == 0) out.lower = 0.0;
  if (successes == trials) out.upper = 1.0;
  return out;
}

}  // namespace rds
