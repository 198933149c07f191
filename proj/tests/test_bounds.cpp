#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "rds/bounds.hpp"
#include "rds/error.hpp"
#include "rds/rng.hpp"

using namespace rds;

namespace {

// Brute-force count of sign vectors meeting the event, sums accumulated left to right.
std::uint64_t count_paths(const std::vector<double>& a, double lambda, bool max_prefix, bool negate = false) {
  const std::size_t n = a.size();
  std::uint64_t hits = 0;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    double s = 0.0, best = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      s += ((mask >> k) & 1U) ? a[k] : -a[k];
      best = std::max(best, std::abs(s));
    }
    if (max_prefix) hits += best >= lambda;
    else hits += (negate ? -s : s) >= lambda;
  }
  return hits;
}

std::vector<double> random_weights(std::uint64_t seed, std::uint64_t i, std::size_t n) {
  const CounterRng rng(seed, i);
  std::vector<double> a(n);
  for (std::size_t k = 0; k < n; ++k) a[k] = 2.0 * rng.uniform(k) - 1.0;
  return a;
}

}  // namespace

TEST_CASE("hoeffding_bound examples") {
  const WeightedRademacherInstance two({1.0, 1.0});
  CHECK(hoeffding_bound(two, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(exact_tail(two, 2.0, TailMode::Sum).value() == 0.25);
  CHECK(count_paths({1.0, 1.0}, 2.0, false) == 1);
  double prev = 1.0;
  for (double l = 0.5; l < 20.0; l += 0.5) {
    const double b = hoeffding_bound(two, l);
    CHECK(b < prev);
    prev = b;
  }
  CHECK_THROWS_AS(hoeffding_bound(WeightedRademacherInstance({0.0, 0.0}), 1.0), DomainError);
}

TEST_CASE("levy_bound examples") {
  const WeightedRademacherInstance one({1.0});
  const auto p1 = exact_prefix_abs_tails(one, 1.0 / 3.0);
  std::vector<double> v1{p1[0].value()};
  CHECK(levy_bound(one, v1, 1.0) == 3.0);
  CHECK(exact_tail(one, 1.0, TailMode::MaxPrefixAbs).value() == 1.0);

  const WeightedRademacherInstance two({1.0, 1.0});
  CHECK(exact_tail(two, 2.0, TailMode::MaxPrefixAbs).value() == 0.5);
  const auto p2 = exact_prefix_abs_tails(two, 2.0 / 3.0);
  std::vector<double> v2{p2[0].value(), p2[1].value()};
  CHECK(v2[0] == 1.0);
  CHECK(v2[1] == 0.5);
  CHECK(levy_bound(two, v2, 2.0) == 3.0);
}

TEST_CASE("exact_tail examples") {
  CHECK(exact_tail(WeightedRademacherInstance({1.0, 1.0}), 2.0, TailMode::Sum) == Dyadic{1, 2});
  CHECK(exact_tail(WeightedRademacherInstance({1.0, 1.0, 1.0}), 3.0, TailMode::Sum).value() == 0.125);
  CHECK_THROWS_AS(exact_tail(WeightedRademacherInstance(std::vector<double>(25, 1.0)), 1.0, TailMode::Sum),
                  ResourceError);
  CHECK(Dyadic{1, 2} == Dyadic{2, 3});
  CHECK(Dyadic{1, 2} < Dyadic{3, 3});
}

TEST_CASE("exact_tail matches a brute-force count") {
  for (std::uint64_t i = 0; i < 30; ++i) {
    const auto a = random_weights(11, i, 3 + i % 10);
    const WeightedRademacherInstance inst(a);
    const double scale = std::sqrt(inst.sum_of_squares());
    for (const double l : {0.25 * scale, scale, 2.0 * scale}) {
      const auto e = exact_tail(inst, l, TailMode::Sum);
      CHECK(e == Dyadic{count_paths(a, l, false), static_cast<int>(a.size())});
      const auto m = exact_tail(inst, l, TailMode::MaxPrefixAbs);
      CHECK(m == Dyadic{count_paths(a, l, true), static_cast<int>(a.size())});
    }
  }
}

TEST_CASE("symmetry and total probability hold exactly") {
  for (std::uint64_t i = 0; i < 40; ++i) {
    const auto a = random_weights(12, i, 4 + i % 9);
    const auto n = static_cast<int>(a.size());
    std::vector<double> neg(a);
    for (double& w : neg) w = -w;
    for (const double x : {1e-9, 0.3, 1.1}) {
      const auto up = exact_tail(WeightedRademacherInstance(a), x, TailMode::Sum);
      const auto down = exact_tail(WeightedRademacherInstance(neg), x, TailMode::Sum);
      CHECK(up == down);
      CHECK(down == Dyadic{count_paths(a, x, false, true), n});
      // P(S >= x) + P(S < x) = 1
      const std::uint64_t below = (1ULL << n) - count_paths(a, x, false);
      CHECK((up.numerator << (n - up.log2_denominator)) + below == (1ULL << n));
    }
  }
}

TEST_CASE("Hoeffding and the maximal inequality dominate the exact tails") {
  int checked = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const std::size_t n = 1 + i % 16;
    const WeightedRademacherInstance inst(random_weights(2024, i, n));
    double l1 = 0.0;
    for (const double w : inst.weights) l1 += std::abs(w);
    for (int j = 1; j <= 20; ++j) {
      const double lambda = 1.05 * l1 * j / 20.0;
      CHECK(exact_tail(inst, lambda, TailMode::Sum).value() <= hoeffding_bound(inst, lambda));
      const auto prefix = exact_prefix_abs_tails(inst, lambda / 3.0);
      std::vector<double> probs;
      for (const auto& d : prefix) probs.push_back(d.value());
      CHECK(exact_tail(inst, lambda, TailMode::MaxPrefixAbs).value() <= levy_bound(inst, probs, lambda));
      ++checked;
    }
  }
  CHECK(checked == 4000);
}

TEST_CASE("prefix tails") {
  const auto a = random_weights(3, 0, 10);
  const WeightedRademacherInstance inst(a);
  const auto exact = exact_prefix_abs_tails(inst, 0.7);
  const auto hoeff = hoeffding_prefix_abs_tails(inst, 0.7);
  REQUIRE(exact.size() == 10);
  for (std::size_t m = 0; m < 10; ++m) {
    const std::vector<double> head(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(m) + 1);
    std::uint64_t hits = 0;
    for (std::uint64_t mask = 0; mask < (1ULL << (m + 1)); ++mask) {
      double s = 0.0;
      for (std::size_t k = 0; k <= m; ++k) s += ((mask >> k) & 1U) ? head[k] : -head[k];
      hits += std::abs(s) >= 0.7;
    }
    CHECK(exact[m].value() == static_cast<double>(hits) / static_cast<double>(1ULL << (m + 1)));
    CHECK(exact[m].value() <= hoeff[m]);
  }
}

TEST_CASE("parallel enumeration equals serial") {
  const WeightedRademacherInstance inst(random_weights(8, 1, 20));
  for (const auto mode : {TailMode::Sum, TailMode::MaxPrefixAbs}) {
    const auto serial = exact_tail(inst, 1.5, mode, 1);
    CHECK(exact_tail(inst, 1.5, mode, 4) == serial);
    CHECK(exact_tail(inst, 1.5, mode, 3).numerator == serial.numerator);
  }
}

TEST_CASE("wilson_interval examples") {
  const auto zero = wilson_interval(0, 100);
  CHECK(zero.lower == 0.0);
  CHECK(zero.upper == doctest::Approx(oracle::wilson95(0, 100).second).epsilon(1e-9));
  CHECK(zero.upper == doctest::Approx(0.0370).epsilon(2e-3));

  const auto half = wilson_interval(50, 100);
  CHECK(0.5 - half.lower == doctest::Approx(half.upper - 0.5).epsilon(1e-12));
  CHECK(half.upper - half.lower == doctest::Approx(0.19).epsilon(0.01));

  const auto all = wilson_interval(100, 100);
  CHECK(all.upper == 1.0);
  CHECK(all.lower == doctest::Approx(1.0 - zero.upper).epsilon(1e-12));
  CHECK_THROWS_AS(wilson_interval(5, 4), ValidationError);
}

TEST_CASE("wilson_interval contains the MLE") {
  for (std::int64_t n : {1, 2, 7, 50, 1000}) {
    for (std::int64_t k = 0; k <= n; ++k) {
      const auto iv = wilson_interval(k, n);
      CHECK(iv.contains(static_cast<double>(k) / static_cast<double>(n)));
      const auto ref = oracle::wilson95(static_cast<double>(k), static_cast<double>(n));
      CHECK(iv.lower == doctest::Approx(ref.first).epsilon(1e-9));
      CHECK(iv.upper == doctest::Approx(ref.second).epsilon(1e-9));
    }
  }
}
