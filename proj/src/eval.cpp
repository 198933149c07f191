#include "rds/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "rds/error.hpp"
#include "rds/summation.hpp"

namespace rds {
namespace {

constexpr std::size_t kBlock = 4096;

}  // namespace

std::string_view to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::Exact: return "exact";
    case CertificateKind::Deterministic: return "deterministic";
    case CertificateKind::Probabilistic: return "probabilistic";
    case CertificateKind::Heuristic: return "heuristic";
  }
  return "unknown";
}

bool CertifiedValue::decidable() const { return std::abs(partial_sum) > error_radius; }

int CertifiedValue::sign() const {
  if (!decidable()) return 0;
  return partial_sum > 0 ? 1 : -1;
}

double TailCertificate::radius(double sigma) const {
  if (exact) return 0.0;
  if (sigma < sigma0) throw DomainError("sigma below the certificate's base exponent");
  return sup_bound * std::exp(-(sigma - sigma0) * std::log(cutoff));
}

double levy_hoeffding_threshold(double tail_variance, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw ValidationError("eta must lie in (0, 1)");
  return std::sqrt(18.0 * tail_variance * std::log(6.0 / eta));
}

double levy_hoeffding_failure(double tail_variance, double t) {
  if (tail_variance <= 0.0) return 0.0;
  return std::min(1.0, 6.0 * std::exp(-t * t / (18.0 * tail_variance)));
}

std::vector<double> partial_sums(const SamplePath& path, std::span<const SumRequest> requests) {
  const auto& seq = path.sequence();
  const auto first = seq.start_index();
  std::vector<std::int64_t> last(requests.size());
  std::int64_t max_last = first - 1;
  for (std::size_t j = 0; j < requests.size(); ++j) {
    if (requests[j].cutoff < 1.0) throw ValidationError("partial sum cutoff must be >= 1");
    last[j] = seq.last_index_le(requests[j].cutoff);
    max_last = std::max(max_last, last[j]);
  }
  if (max_last - first + 1 > term_budget()) {
    throw ResourceError("partial sum needs " + std::to_string(max_last - first + 1) + " terms, above the budget");
  }
  // Visit requests in order of decreasing reach so the inner loop can stop early.
  std::vector<std::size_t> order(requests.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return last[a] > last[b]; });

  std::vector<CompensatedSum> acc(requests.size());
  std::array<double, kBlock> p{};
  std::array<double, kBlock> signs{};
  std::array<double, kBlock> log_p{};
  for (auto k = first; k <= max_last; k += static_cast<std::int64_t>(kBlock)) {
    const auto n = static_cast<std::size_t>(std::min<std::int64_t>(kBlock, max_last - k + 1));
    seq.elements(k, std::span(p.data(), n));
    path.fill_signs(k, std::span(signs.data(), n));
    for (std::size_t i = 0; i < n; ++i) log_p[i] = std::log(p[i]);
    for (const auto j : order) {
      if (last[j] < k) break;
      const auto m = static_cast<std::size_t>(std::min<std::int64_t>(static_cast<std::int64_t>(n), last[j] - k + 1));
      const double sigma = requests[j].sigma;
      auto& a = acc[j];
      for (std::size_t i = 0; i < m; ++i) a.add(signs[i] * term_weight(log_p[i], sigma));
    }
  }
  std::vector<double> out(requests.size());
  for (std::size_t j = 0; j < requests.size(); ++j) out[j] = acc[j].value();
  return out;
}

double partial_sum(const SamplePath& path, double sigma, double cutoff) {
  const SumRequest r{sigma, cutoff};
  return partial_sums(path, std::span(&r, 1)).front();
}

std::vector<double> weight_table(const FrequencySequence& seq, double sigma, std::int64_t first, std::int64_t last) {
  if (last < first) return {};
  if (last - first + 1 > term_budget()) throw ResourceError("weight table exceeds the term budget");
  std::vector<double> w(static_cast<std::size_t>(last - first + 1));
  seq.elements(first, w);
  for (auto& x : w) x = term_weight(std::log(x), sigma);
  return w;
}

double weighted_sign_sum(const SamplePath& path, std::int64_t first, std::span<const double> weights) {
  CompensatedSum acc;
  std::array<double, kBlock> signs{};
  for (std::size_t off = 0; off < weights.size(); off += kBlock) {
    const auto n = std::min(kBlock, weights.size() - off);
    path.fill_signs(first + static_cast<std::int64_t>(off), std::span(signs.data(), n));
    for (std::size_t i = 0; i < n; ++i) acc.add(signs[i] * weights[off + i]);
  }
  return acc.value();
}

TailCertificate tail_certificate(const FrequencySequence& seq, double sigma0, double cutoff, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw ValidationError("eta must lie in (0, 1)");
  if (cutoff < 1.0) throw ValidationError("certificate cutoff must be >= 1");
  TailCertificate cert;
  cert.sigma0 = sigma0;
  cert.cutoff = cutoff;
  cert.eta = eta;
  if (auto last = seq.last_index(); last && seq.last_index_le(cutoff) >= *last) {
    cert.exact = true;
    return cert;
  }
  cert.tail_variance = tail_power_sum(seq, 2.0 * sigma0, cutoff).upper;
  cert.sup_bound = levy_hoeffding_threshold(cert.tail_variance, eta);
  return cert;
}

CertifiedValue certify_partial(double partial, double sigma, const TailCertificate& cert) {
  CertifiedValue v;
  v.sigma = sigma;
  v.partial_sum = partial;
  v.cutoff = cert.cutoff;
  v.error_radius = cert.radius(sigma);
  if (cert.exact) {
    v.certificate = CertificateKind::Exact;
  } else {
    v.certificate = CertificateKind::Probabilistic;
    v.eta = cert.eta;
  }
  return v;
}

CertifiedValue evaluate(const SamplePath& path, double sigma, const TailCertificate& cert) {
  if (!cert.exact && sigma < cert.sigma0) throw DomainError("evaluate: sigma below the certificate's base exponent");
  return certify_partial(partial_sum(path, sigma, cert.cutoff), sigma, cert);
}

CertifiedValue evaluate_deterministic(const SamplePath& path, double sigma, double cutoff) {
  CertifiedValue v;
  v.sigma = sigma;
  v.cutoff = cutoff;
  v.partial_sum = partial_sum(path, sigma, cutoff);
  const auto tail = tail_power_sum(path.sequence(), sigma, cutoff);
  v.error_radius = tail.upper;
  v.certificate = tail.upper == 0.0 ? CertificateKind::Exact : CertificateKind::Deterministic;
  return v;
}

double heuristic_cutoff(double sigma) {
  if (!(sigma > 0.5)) throw DomainError("heuristic cutoff needs sigma > 1/2");
  return std::exp(1.0 / (2.0 * sigma - 1.0));
}

CertifiedValue evaluate_heuristic(const SamplePath& path, double sigma, double min_cutoff) {
  CertifiedValue v;
  v.sigma = sigma;
  v.cutoff = std::max(min_cutoff, heuristic_cutoff(sigma));
  v.partial_sum = partial_sum(path, sigma, v.cutoff);
  v.certificate = CertificateKind::Heuristic;
  return v;
}

std::optional<int> domination_certificate(const SamplePath& path, double sigma,
                                          std::span<const std::int64_t> block_sizes) {
  const auto& seq = path.sequence();
  std::vector<std::int64_t> sizes(block_sizes.begin(), block_sizes.end());
  if (sizes.empty()) {
    for (std::int64_t k = 1; k <= 4096; k *= 2) sizes.push_back(k);
  }
  const auto start = seq.start_index();
  for (const auto k : sizes) {
    if (k < 1) continue;
    auto index = start + k - 1;
    if (auto last = seq.last_index(); last && index > *last) index = *last;
    const double p_k = seq.element(index);
    Enclosure tail;
    try {
      tail = tail_power_sum(seq, sigma, p_k);
    } catch (const DivergenceError&) {
      return std::nullopt;
    }
    const double partial = partial_sum(path, sigma, p_k);
    if (std::abs(partial) > tail.upper) return partial > 0 ? 1 : -1;
  }
  return std::nullopt;
}

bool leading_term_closure(const FrequencySequence& seq, double sigma) {
  const double p1 = seq.element(seq.start_index());
  Enclosure tail;
  try {
    tail = tail_power_sum(seq, sigma, p1);
  } catch (const DivergenceError&) {
    return false;
  }
  return std::exp(sigma * std::log(p1)) * tail.upper < 1.0;
}

double mellin_check(const SamplePath& path, double s, double x_max) {
  if (x_max < 1.0) throw ValidationError("mellin_check needs X >= 1");
  const auto& seq = path.sequence();
  const auto first = seq.start_index();
  const auto last = seq.last_index_le(x_max);
  if (last - first + 1 > term_budget()) throw ResourceError("mellin_check exceeds the term budget");
  CompensatedSum left;
  CompensatedSum right;
  std::int64_t a = 0;
  for (auto k = first; k <= last; ++k) {
    const double p = seq.element(k);
    const int x = path.sign_at(k);
    a += x;
    const double w = term_weight(std::log(p), s);
    right.add(x * w);
    // s * int over [p_k, next) of A x^(-1-s) dx = A (p_k^-s - next^-s).
    const double next = k < last ? seq.element(k + 1) : x_max;
    left.add(static_cast<double>(a) * (w - term_weight(std::log(next), s)));
  }
  left.add(static_cast<double>(a) * term_weight(std::log(x_max), s));
  return std::abs(left.value() - right.value());
}

}  // namespace rds
