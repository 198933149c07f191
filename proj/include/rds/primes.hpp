#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <vector>

namespace rds {

// Process-wide table of primes grown on demand by a segmented sieve of
// Eratosthenes. Readers receive immutable snapshots, so a snapshot obtained
// once may be used from any thread without locking.
class PrimeTable {
 public:
  using Snapshot = std::shared_ptr<const std::vector<std::uint32_t>>;

  static PrimeTable& instance();

  // Snapshot holding every prime <= limit (and possibly more).
  Snapshot up_to(std::uint64_t limit);
  // Snapshot holding at least `count` primes.
  Snapshot at_least(std::uint64_t count);

  // Largest value sieved so far.
  std::uint64_t sieved_limit() const;

 private:
  PrimeTable();
  void extend_locked(std::uint64_t limit);

  mutable std::mutex mutex_;
  Snapshot primes_;
  std::uint64_t sieved_ = 1;
};

// Plain sieve of Eratosthenes over [2, limit]; used for base primes.
std::vector<std::uint32_t> simple_sieve(std::uint32_t limit);

}  // namespace rds
