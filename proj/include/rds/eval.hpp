#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rds/paths.hpp"

namespace rds {

enum class CertificateKind {
  Exact,          // finite sequence exhausted, radius 0
  Deterministic,  // triangle inequality on the absolutely convergent tail
  Probabilistic,  // tail certificate holding with probability >= 1 - eta
  Heuristic,      // truncation at the heuristic cutoff, no bound
};

std::string_view to_string(CertificateKind kind);

/// F(sigma) ~ partial_sum with |F(sigma) - partial_sum| <= error_radius under
/// the stated certificate.
struct CertifiedValue {
  double sigma = 0.0;
  double partial_sum = 0.0;
  double cutoff = 0.0;
  double error_radius = 0.0;
  CertificateKind certificate = CertificateKind::Heuristic;
  double eta = 0.0;  // failure probability for Probabilistic, else 0

  bool decidable() const;
  // +1, -1, or 0 when the sign is not decided.
  int sign() const;
};

/// Simultaneous bound on the truncated tail of a path:
///   P( sup_{x>U} |sum_{U<p<=x} X_p p^(-sigma0)| >= t ) <= eta
/// with t = sqrt(18 * T_U * log(6 / eta)) and T_U an upper bound for
/// sum_{p>U} p^(-2 sigma0). The constant chains the maximal inequality
/// (factor 3, threshold t/3) with a two-sided Hoeffding bound (factor 2).
struct TailCertificate {
  double sigma0 = 0.0;
  double cutoff = 0.0;
  double tail_variance = 0.0;  // T_U
  double sup_bound = 0.0;      // t
  double eta = 0.0;
  bool exact = false;  // no elements beyond the cutoff

  // Error radius at sigma >= sigma0: t * U^-(sigma - sigma0).
  double radius(double sigma) const;
};

// t such that 6 exp(-t^2 / (18 T)) = eta.
double levy_hoeffding_threshold(double tail_variance, double eta);
// min(1, 6 exp(-t^2 / (18 T))); 0 for an empty tail.
double levy_hoeffding_failure(double tail_variance, double t);

struct SumRequest {
  double sigma = 0.0;
  double cutoff = 0.0;
};

// sum_{p <= cutoff} X_p p^(-sigma), compensated, in index order.
double partial_sum(const SamplePath& path, double sigma, double cutoff);
// Several partial sums in one pass over the elements. Each result is bit
// identical to the corresponding partial_sum call.
std::vector<double> partial_sums(const SamplePath& path, std::span<const SumRequest> requests);

// Weighted sum of signs over indices [first, first + weights.size()).
double weighted_sign_sum(const SamplePath& path, std::int64_t first, std::span<const double> weights);
// Weights p^(-sigma) for indices [first, last].
std::vector<double> weight_table(const FrequencySequence& seq, double sigma, std::int64_t first, std::int64_t last);

TailCertificate tail_certificate(const FrequencySequence& seq, double sigma0, double cutoff, double eta);

CertifiedValue evaluate(const SamplePath& path, double sigma, const TailCertificate& cert);
// Same, reusing an already computed partial sum at cert.cutoff.
CertifiedValue certify_partial(double partial, double sigma, const TailCertificate& cert);
// Radius = upper enclosure of sum_{p>cutoff} p^(-sigma); needs a convergent tail.
CertifiedValue evaluate_deterministic(const SamplePath& path, double sigma, double cutoff);

// y(sigma) = exp(1 / (2 sigma - 1)).
double heuristic_cutoff(double sigma);
// Partial sum at max(min_cutoff, y(sigma)); flagged Heuristic with radius 0.
CertifiedValue evaluate_heuristic(const SamplePath& path, double sigma, double min_cutoff = 1.0);

// Sign of F(sigma) if |sum of the first K terms| exceeds the upper tail bound
// past p_K for some tested block size K; otherwise nullopt. Block sizes count
// elements from start_index; the default tries K = 1, 2, 4, ..., 4096.
std::optional<int> domination_certificate(const SamplePath& path, double sigma,
                                          std::span<const std::int64_t> block_sizes = {});

// True when p_1^sigma * sum_{p>p_1} p^(-sigma) < 1. Each ratio (p_1/p)^sigma
// decreases with sigma, so the sign of F equals the sign of the first term on
// all of [sigma, inf).
bool leading_term_closure(const FrequencySequence& seq, double sigma);

// |s int_1^X A(x) x^(-1-s) dx + A(X) X^(-s) - sum_{p<=X} X_p p^(-s)|, with the
// integral evaluated exactly over the constancy intervals of A.
double mellin_check(const SamplePath& path, double s, double x_max);

}  // namespace rds
