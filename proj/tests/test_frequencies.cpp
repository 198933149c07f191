#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "rds/error.hpp"
#include "rds/frequencies.hpp"
#include "rds/primes.hpp"

using namespace rds;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << body;
  return p;
}

double direct_tail(const FrequencySequence& seq, double sigma, double cutoff, std::int64_t terms) {
  const auto m = seq.last_index_le(cutoff) + 1;
  std::vector<double> t;
  for (std::int64_t k = m; k < m + terms; ++k) t.push_back(std::pow(seq.element(k), -sigma));
  return static_cast<double>(oracle::reversed_sum(t));
}

}  // namespace

TEST_CASE("next_element on the built-in families") {
  CHECK(next_element(FrequencySequence::naturals(), 3) == 3.0);
  const auto primes = FrequencySequence::primes();
  CHECK(next_element(primes, 4) == 7.0);
  const auto wn = FrequencySequence::weighted_naturals(2.0);
  CHECK(next_element(wn, 2) == doctest::Approx(2.0 * std::pow(std::log(3.0), 2)).epsilon(1e-15));

  // trial-division oracle for the first 2000 primes
  std::uint64_t candidate = 1;
  for (std::int64_t k = 1; k <= 2000; ++k) {
    do ++candidate;
    while (!oracle::is_prime(candidate));
    REQUIRE(next_element(primes, k) == static_cast<double>(candidate));
  }
}

TEST_CASE("finite sequences end") {
  const auto e = FrequencySequence::explicit_values({2.0, 3.0});
  CHECK(next_element(e, 2) == 3.0);
  CHECK_THROWS_AS(next_element(e, 3), OutOfRangeError);
  CHECK_THROWS_AS(next_element(FrequencySequence::naturals(5), 4), ValidationError);
}

TEST_CASE("counting_function examples") {
  CHECK(counting_function(FrequencySequence::naturals(), 10.5) == 10);
  CHECK(counting_function(FrequencySequence::primes(), 10.0) == 4);
  for (const auto& seq : {FrequencySequence::naturals(), FrequencySequence::primes(),
                          FrequencySequence::weighted_naturals(2.0), FrequencySequence::explicit_values({1.5, 4.0})}) {
    CHECK(counting_function(seq, 0.5) == 0);
    CHECK(counting_function(seq, 0.0) == 0);
  }
  CHECK(counting_function(FrequencySequence::explicit_values({1.5, 4.0}), 4.0) == 2);
}

TEST_CASE("prime counting agrees with a plain sieve") {
  const auto sieve = oracle::primes_up_to(2'000'000);
  const auto primes = FrequencySequence::primes();
  for (const double x : {1.0, 2.0, 100.0, 7919.0, 65536.0, 999'983.0, 1e6, 1'999'999.0, 2e6}) {
    const auto expected = std::upper_bound(sieve.begin(), sieve.end(), static_cast<std::uint64_t>(x)) - sieve.begin();
    CHECK(counting_function(primes, x) == expected);
  }
}

TEST_CASE("segmented sieve matches a plain sieve across segment boundaries") {
  const auto sieve = oracle::primes_up_to(3'000'000);
  const auto snap = PrimeTable::instance().up_to(3'000'000);
  REQUIRE(snap->size() >= sieve.size());
  for (std::size_t i = 0; i < sieve.size(); ++i) REQUIRE((*snap)[i] == sieve[i]);
}

TEST_CASE("counting_function dominates the index") {
  for (const auto& seq : {FrequencySequence::naturals(), FrequencySequence::primes(), FrequencySequence::weighted_naturals(2.0),
                          FrequencySequence::weighted_naturals(1.5, 3), FrequencySequence::naturals(7)}) {
    for (std::int64_t k = seq.start_index(); k < seq.start_index() + 10000; ++k) {
      REQUIRE(counting_function(seq, next_element(seq, k)) >= k - seq.start_index() + 1);
      REQUIRE(next_element(seq, k + 1) > next_element(seq, k));
    }
  }
}

TEST_CASE("power_sum examples") {
  CHECK(power_sum(FrequencySequence::naturals(), 1.0, 3.0) == doctest::Approx(11.0 / 6.0).epsilon(1e-15));
  const double four = std::pow(2.0, -0.5) + std::pow(3.0, -0.5) + std::pow(5.0, -0.5) + std::pow(7.0, -0.5);
  CHECK(power_sum(FrequencySequence::primes(), 0.5, 10.0) == doctest::Approx(four).epsilon(1e-15));
}

TEST_CASE("zeta(1.5) from power_sum plus tail enclosure") {
  const auto nat = FrequencySequence::naturals();
  const double cutoff = 1e7;
  const double head = power_sum(nat, 1.5, cutoff);
  const auto tail = tail_power_sum(nat, 1.5, cutoff);
  const auto z = static_cast<double>(oracle::zeta(1.5L));
  CHECK(z == doctest::Approx(2.612375348685488).epsilon(1e-14));
  CHECK(head + tail.lower <= z + 1e-12);
  CHECK(head + tail.upper >= z - 1e-12);
  CHECK(std::abs(head + 0.5 * (tail.lower + tail.upper) - z) < 1e-9);
}

TEST_CASE("tail_power_sum examples") {
  const auto fin = tail_power_sum(FrequencySequence::explicit_values({2.0, 3.0}), 1.0, 5.0);
  CHECK(fin.lower == 0.0);
  CHECK(fin.upper == 0.0);

  const auto nat = FrequencySequence::naturals();
  const auto t = tail_power_sum(nat, 1.5, 1000.0);
  const auto ref = static_cast<double>(oracle::zeta_tail(1.5L, 1000));
  // 10^7 further terms summed directly, remainder by the Euler-Maclaurin oracle
  const double brute = direct_tail(nat, 1.5, 1000.0, 10'000'000) + static_cast<double>(oracle::zeta_tail(1.5L, 10'001'000));
  CHECK(t.contains(ref));
  CHECK(t.contains(brute));
  CHECK(std::abs(brute - ref) < 1e-12);
  CHECK(t.width() < 1e-3 * ref);
  CHECK(ref == doctest::Approx(2.0 / std::sqrt(1000.0)).epsilon(0.01));

  const auto z2 = tail_power_sum(nat, 2.0, 1.0);
  CHECK(z2.contains(std::numbers::pi * std::numbers::pi / 6.0 - 1.0));
}

TEST_CASE("divergent tails are rejected") {
  CHECK_THROWS_AS(tail_power_sum(FrequencySequence::naturals(), 1.0, 100.0), DivergenceError);
  CHECK_THROWS_AS(tail_power_sum(FrequencySequence::primes(), 1.0, 100.0), DivergenceError);
  CHECK_THROWS_AS(tail_power_sum(FrequencySequence::weighted_naturals(2.0), 0.99, 100.0), DivergenceError);
  CHECK_NOTHROW(tail_power_sum(FrequencySequence::weighted_naturals(2.0), 1.0, 100.0));
}

TEST_CASE("tail enclosures bracket direct summation plus a crude remainder") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> sig(1.1, 3.0);
  std::uniform_real_distribution<double> cut(1.0, 5000.0);
  for (const auto& seq : {FrequencySequence::naturals(), FrequencySequence::primes(), FrequencySequence::weighted_naturals(2.0)}) {
    for (int i = 0; i < 6; ++i) {
      const double sigma = sig(gen);
      const double cutoff = cut(gen);
      const std::int64_t terms = 1'000'000;
      const double head = direct_tail(seq, sigma, cutoff, terms);
      // every family satisfies p_k >= k, so the rest is at most sum_{n > k_end} n^-sigma
      const auto k_end = seq.last_index_le(cutoff) + terms;
      const double crude = std::pow(static_cast<double>(k_end), 1.0 - sigma) / (sigma - 1.0);
      const auto e = tail_power_sum(seq, sigma, cutoff);
      INFO(seq.describe(), " sigma=", sigma, " cutoff=", cutoff);
      CHECK(e.upper >= head);
      CHECK(e.lower <= head + crude);
      CHECK(e.lower <= e.upper);
    }
  }
}

TEST_CASE("power_sum monotonicity") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> sig(0.3, 2.5);
  std::uniform_real_distribution<double> cut(1.0, 1e5);
  for (const auto& seq : {FrequencySequence::naturals(), FrequencySequence::primes(), FrequencySequence::weighted_naturals(2.0)}) {
    for (int i = 0; i < 20; ++i) {
      const double s1 = sig(gen), s2 = sig(gen), c1 = cut(gen), c2 = cut(gen);
      CHECK(power_sum(seq, std::min(s1, s2), c1) >= power_sum(seq, std::max(s1, s2), c1));
      CHECK(power_sum(seq, s1, std::min(c1, c2)) <= power_sum(seq, s1, std::max(c1, c2)));
    }
  }
}

TEST_CASE("reciprocal sums: bounded for weighted naturals, unbounded otherwise") {
  const auto wn = FrequencySequence::weighted_naturals(2.0);
  CHECK(wn.reciprocal_sum_converges());
  const double total_upper = power_sum(wn, 1.0, 1e6) + tail_power_sum(wn, 1.0, 1e6).upper;
  for (const double x : {1e2, 1e4, 1e6, 1e8}) CHECK(power_sum(wn, 1.0, x) <= total_upper);
  CHECK(!FrequencySequence::naturals().reciprocal_sum_converges());
  CHECK(!FrequencySequence::primes().reciprocal_sum_converges());
  CHECK(power_sum(FrequencySequence::naturals(), 1.0, 1e7) > 16.0);
  CHECK(power_sum(FrequencySequence::primes(), 1.0, 1e7) > 3.0);
}

TEST_CASE("weighted naturals validation") {
  CHECK_THROWS_AS(FrequencySequence::weighted_naturals(2.0, 1), ValidationError);
  CHECK_THROWS_AS(FrequencySequence::weighted_naturals(1.0), ValidationError);
  CHECK(FrequencySequence::weighted_naturals(2.0).start_index() == 2);
}

TEST_CASE("explicit sequences from files") {
  const auto ok = write_temp("rds_seq_ok.txt", "# comment\n1\n2.5  # inline\n\n7\n");
  const auto seq = FrequencySequence::load_explicit(ok);
  CHECK(*seq.last_index() == 3);
  CHECK(seq.element(2) == 2.5);

  auto message = [](const std::string& body) {
    try {
      FrequencySequence::load_explicit(write_temp("rds_seq_bad.txt", body));
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("2\n0.5\n").find(":2:") != std::string::npos);
  CHECK(message("2\n3\n3\n").find(":3:") != std::string::npos);
  CHECK(message("2\nabc\n").find(":2:") != std::string::npos);
  CHECK(message("# nothing\n").find("no elements") != std::string::npos);
  CHECK_THROWS_AS(FrequencySequence::explicit_values({2.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(FrequencySequence::explicit_values({0.5}), ValidationError);
}

TEST_CASE("term budget") {
  const auto saved = term_budget();
  set_term_budget(1000);
  CHECK_THROWS_AS(power_sum(FrequencySequence::naturals(), 1.0, 1e4), ResourceError);
  set_term_budget(saved);
  CHECK_NOTHROW(power_sum(FrequencySequence::naturals(), 1.0, 1e4));
}

TEST_CASE("SummatoryCache") {
  auto seq = std::make_shared<const FrequencySequence>(FrequencySequence::primes());
  SummatoryCache cache(seq, 1000.0);
  CHECK(cache.count() == 168);
  const double a = cache.power_sum(1.0);
  CHECK(a == power_sum(*seq, 1.0, 1000.0));
  CHECK(cache.power_sum(2.0) < a);
  CHECK(cache.power_sums().size() == 2);
}
