#include "rds/primes.hpp"

#include <algorithm>
#include <cmath>

#include "rds/error.hpp"

namespace rds {
namespace {

constexpr std::uint64_t kSegmentSize = std::uint64_t{1} << 18;
constexpr std::uint64_t kMaxSieveLimit = std::uint64_t{4'000'000'000};

std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

}  // namespace

std::vector<std::uint32_t> simple_sieve(std::uint32_t limit) {
  std::vector<std::uint32_t> out;
  if (limit < 2) return out;
  std::vector<char> composite(limit + 1, 0);
  for (std::uint64_t p = 2; p * p <= limit; ++p) {
    if (composite[p]) continue;
    for (std::uint64_t j = p * p; j <= limit; j += p) composite[j] = 1;
  }
  for (std::uint32_t i = 2; i <= limit; ++i) {
    if (!composite[i]) out.push_back(i);
  }
  return out;
}

PrimeTable::PrimeTable() : primes_(std::make_shared<const std::vector<std::uint32_t>>()) {}

PrimeTable& PrimeTable::instance() {
  static PrimeTable table;
  return table;
}

std::uint64_t PrimeTable::sieved_limit() const {
  std::lock_guard lock(mutex_);
  return sieved_;
}

PrimeTable::Snapshot PrimeTable::up_to(std::uint64_t limit) {
  std::lock_guard lock(mutex_);
  if (limit > sieved_) {
    // Grow geometrically so repeated small extensions stay amortized.
    extend_locked(std::max<std::uint64_t>(limit, std::min(2 * sieved_, kMaxSieveLimit)));
  }
  return primes_;
}

PrimeTable::Snapshot PrimeTable::at_least(std::uint64_t count) {
  std::lock_guard lock(mutex_);
  while (primes_->size() < count) {
    // p_n < n (ln n + ln ln n) for n >= 6.
    const double n = static_cast<double>(std::max<std::uint64_t>(count, 6));
    const auto estimate = static_cast<std::uint64_t>(n * (std::log(n) + std::log(std::log(n)))) + 16;
    extend_locked(std::max({estimate, 2 * sieved_, std::uint64_t{64}}));
  }
  return primes_;
}

void PrimeTable::extend_locked(std::uint64_t limit) {
  if (limit > kMaxSieveLimit) {
    throw ResourceError("prime sieve limit " + std::to_string(limit) + " exceeds supported maximum " +
                        std::to_string(kMaxSieveLimit));
  }
  if (limit <= sieved_) return;
  const auto base = simple_sieve(static_cast<std::uint32_t>(isqrt(limit)));
  auto next = std::make_shared<std::vector<std::uint32_t>>(*primes_);
  next->reserve(static_cast<std::size_t>(1.1 * static_cast<double>(limit) / std::log(static_cast<double>(limit) + 2.0)) + 16);

  std::vector<char> composite(kSegmentSize);
  for (std::uint64_t lo = sieved_ + 1; lo <= limit; lo += kSegmentSize) {
    const std::uint64_t hi = std::min(lo + kSegmentSize - 1, limit);
    std::fill(composite.begin(), composite.end(), 0);
    for (const std::uint64_t p : base) {
      if (p * p > hi) break;
      std::uint64_t first = std::max(p * p, ((lo + p - 1) / p) * p);
      for (std::uint64_t j = first; j <= hi; j += p) composite[j - lo] = 1;
    }
    for (std::uint64_t v = std::max<std::uint64_t>(lo, 2); v <= hi; ++v) {
      if (!composite[v - lo]) next->push_back(static_cast<std::uint32_t>(v));
    }
  }
  primes_ = std::move(next);
  sieved_ = limit;
}

}  // namespace rds
