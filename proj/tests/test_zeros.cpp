#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "rds/rng.hpp"
#include "rds/zeros.hpp"

using namespace rds;

namespace {

using SeqPtr = std::shared_ptr<const FrequencySequence>;

SeqPtr explicit_seq(std::vector<double> v) {
  return std::make_shared<const FrequencySequence>(FrequencySequence::explicit_values(std::move(v)));
}
SeqPtr naturals() { return std::make_shared<const FrequencySequence>(FrequencySequence::naturals()); }

SamplePath with_signs(SeqPtr seq, const std::vector<int>& signs) {
  std::map<std::int64_t, int> a;
  for (std::size_t k = 0; k < signs.size(); ++k) a[static_cast<std::int64_t>(k) + 1] = signs[k];
  return forced_path(a, SamplePath::constant(seq, 1));
}

double f_value(const std::vector<double>& v, const std::vector<int>& s, double sigma) {
  long double acc = 0.0L;
  for (std::size_t k = 0; k < v.size(); ++k) acc += s[k] * std::pow(static_cast<long double>(v[k]), -sigma);
  return static_cast<double>(acc);
}

ScanOptions exact_options(double lo, double hi, int grid = 33, int refine = 4) {
  ScanOptions o;
  o.sigma_lo = lo;
  o.sigma_hi = hi;
  o.initial_grid = grid;
  o.max_refinement = refine;
  o.cutoff = 1e3;
  return o;
}

}  // namespace

TEST_CASE("certified_sign examples") {
  const auto seq = explicit_seq({2.0, 3.0});
  const auto cert = tail_certificate(*seq, 0.6, 10.0, 0.01);
  CHECK(certified_sign(with_signs(seq, {1, -1}), 1.0, cert) == Sign::Positive);

  TailCertificate wide;
  wide.sigma0 = 1.0;
  wide.cutoff = 10.0;
  wide.sup_bound = 0.1;
  wide.eta = 0.01;
  CHECK(certify_partial(0.0, 1.0, wide).sign() == 0);
  CHECK(certify_partial(0.2, 1.0, wide).sign() == 1);

  const auto plus = SamplePath::constant(naturals(), 1);
  const auto c = tail_certificate(*naturals(), 0.6, 1e4, 1e-3);
  const double partial = partial_sum(plus, 0.75, 1e4);
  CHECK(partial > 30.0);
  CHECK(c.radius(0.75) < 10.0);
  CHECK(certified_sign(plus, 0.75, c) == Sign::Positive);
}

TEST_CASE("scan of a positive series") {
  ScanOptions o;
  o.sigma_lo = 0.6;
  o.sigma_hi = 2.0;
  o.cutoff = 1e4;
  const auto r = scan(SamplePath::constant(naturals(), 1), o);
  CHECK(r.sign_changes == 0);
  CHECK(std::all_of(r.decided_signs.begin(), r.decided_signs.end(), [](Sign s) { return s == Sign::Positive; }));
  CHECK(r.eta_total <= o.eta_budget);
}

TEST_CASE("scan finds the zero of -2^-s + 3^-s + 4^-s") {
  const std::vector<double> v{2.0, 3.0, 4.0};
  const std::vector<int> s{-1, 1, 1};
  const double root = oracle::bisect([&](double x) { return f_value(v, s, x); }, 1.0, 1.5);
  CHECK(root == doctest::Approx(1.293174075673).epsilon(1e-12));
  CHECK(std::abs(root - 1.2946) < 2e-3);
  CHECK(f_value(v, s, 1.0) == doctest::Approx(1.0 / 12.0));
  CHECK(f_value(v, s, 1.5) < 0.0);

  const auto path = with_signs(explicit_seq(v), s);
  const auto r = scan(path, exact_options(0.1, 3.0));
  CHECK(r.sign_changes == 1);
  REQUIRE(r.sign_change_brackets.size() == 1);
  CHECK(r.sign_change_brackets[0].first <= root);
  CHECK(r.sign_change_brackets[0].second >= root);
  CHECK(r.eta_total == 0.0);

  const auto tail = scan(path, exact_options(2.0, 3.0));
  CHECK(tail.sign_changes == 0);
  CHECK(f_value(v, s, 2.0) < 0.0);
}

TEST_CASE("certify_no_zeros examples") {
  const auto plus = SamplePath::constant(naturals(), 1);
  NoZeroOptions o;
  o.scan.cutoff = 1e4;
  CHECK(certify_no_zeros(plus, 0.6, o).no_zero_certified);

  const auto path = with_signs(explicit_seq({2.0, 3.0, 4.0}), {-1, 1, 1});
  const auto r = certify_no_zeros(path, 0.1, o);
  CHECK(!r.no_zero_certified);
  CHECK(r.sign_changes >= 1);

  const auto two = with_signs(explicit_seq({2.0, 3.0}), {1, -1});
  CHECK(certify_no_zeros(two, 0.1, o).no_zero_certified);
}

TEST_CASE("refinement is monotone") {
  const auto nat = naturals();
  for (int t = 0; t < 20; ++t) {
    const auto p = SamplePath::random(nat, 5, t);
    ScanOptions o;
    o.sigma_lo = 0.55;
    o.sigma_hi = 2.0;
    o.cutoff = 1e4;
    o.initial_grid = 9;
    o.max_refinement = 0;
    auto prev = scan(p, o);
    for (int depth = 1; depth <= 4; ++depth) {
      o.max_refinement = depth;
      const auto next = scan(p, o);
      CHECK(next.sign_changes >= prev.sign_changes);
      for (std::size_t i = 0; i < prev.sigma_grid.size(); ++i) {
        if (prev.decided_signs[i] == Sign::Undecided) continue;
        const auto it = std::find(next.sigma_grid.begin(), next.sigma_grid.end(), prev.sigma_grid[i]);
        REQUIRE(it != next.sigma_grid.end());
        CHECK(next.decided_signs[static_cast<std::size_t>(it - next.sigma_grid.begin())] == prev.decided_signs[i]);
      }
      prev = next;
    }
  }
}

TEST_CASE("finite paths match a dense evaluation oracle") {
  int mismatches = 0;
  for (int t = 0; t < 100; ++t) {
    const CounterRng rng(404, static_cast<std::uint64_t>(t));
    std::vector<double> v;
    while (v.size() < 5) {
      const double x = 1.0 + std::floor(40.0 * rng.uniform(v.size() + 100 * t + 1000));
      if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
      else v.push_back(x + 41.0 + v.size());
    }
    std::sort(v.begin(), v.end());
    std::vector<int> s(5);
    for (int k = 0; k < 5; ++k) s[k] = rng.sign(static_cast<std::uint64_t>(k));
    const double lo = 0.1, hi = 4.0;
    const int dense = 10000;
    int truth = 0, prev = 0;
    for (int i = 0; i <= dense; ++i) {
      const double x = lo + (hi - lo) * i / dense;
      const double y = f_value(v, s, x);
      const int sg = (y > 0) - (y < 0);
      if (sg != 0 && prev != 0 && sg != prev) ++truth;
      if (sg != 0) prev = sg;
    }
    const auto r = scan(with_signs(explicit_seq(v), s), exact_options(lo, hi, 129, 8));
    mismatches += r.sign_changes != truth;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("no-zero certification is antitone in sigma_lo") {
  const auto wn = std::make_shared<const FrequencySequence>(FrequencySequence::weighted_naturals(2.0));
  NoZeroOptions o;
  o.scan.cutoff = 1e4;
  o.scan.eta_budget = 1e-3;
  int certified = 0;
  for (int t = 0; t < 40; ++t) {
    const auto p = SamplePath::random(wn, 9, t);
    if (!certify_no_zeros(p, 0.6, o).no_zero_certified) continue;
    ++certified;
    CHECK(certify_no_zeros(p, 0.8, o).no_zero_certified);
    CHECK(certify_no_zeros(p, 1.2, o).no_zero_certified);
  }
  CHECK(certified > 0);
}

TEST_CASE("count_sign_changes skips undecided entries") {
  using enum Sign;
  CHECK(count_sign_changes({}) == 0);
  CHECK(count_sign_changes({Positive, Positive, Negative}) == 1);
  CHECK(count_sign_changes({Positive, Undecided, Negative, Undecided, Positive}) == 2);
  CHECK(count_sign_changes({Undecided, Undecided}) == 0);
  const std::vector<double> grid{0.6, 0.7, 0.8, 0.9};
  CHECK(count_sign_changes_from(grid, {Negative, Positive, Negative, Negative}, 0.7) == 1);
  CHECK(to_char(Positive) == '+');
  CHECK(to_char(Undecided) == '?');
}
