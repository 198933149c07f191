#include "rds/frequencies.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "rds/error.hpp"
#include "rds/primes.hpp"
#include "rds/summation.hpp"

namespace rds {
namespace {

std::atomic<std::int64_t> g_term_budget{400'000'000};

// Largest index we are willing to address for unbounded families.
constexpr double kIndexCeiling = 1e15;
// Terms summed directly before switching to the analytic remainder.
constexpr std::int64_t kTailDirectTerms = 1 << 14;
// Rosser & Schoenfeld: pi(x) < 1.25506 x / log x for x > 1 and
// pi(x) > x / log x for x >= 17.
constexpr double kChebyshevUpper = 1.25506;
constexpr double kChebyshevLowerFrom = 17.0;
// Outward widening that absorbs floating-point error in the enclosures.
constexpr double kOutwardSlack = 1e-13;
constexpr std::size_t kBlock = 4096;

void check_budget(std::int64_t terms, const char* what) {
  if (terms > term_budget()) {
    throw ResourceError(std::string(what) + " needs " + std::to_string(terms) +
                        " terms, above the term budget of " + std::to_string(term_budget()));
  }
}

// Compensated sum of p_k^(-sigma) for k in [first, last].
double sum_terms(const FrequencySequence& seq, std::int64_t first, std::int64_t last, double sigma) {
  CompensatedSum acc;
  std::array<double, kBlock> buf{};
  for (std::int64_t k = first; k <= last; k += static_cast<std::int64_t>(kBlock)) {
    const auto n = static_cast<std::size_t>(std::min<std::int64_t>(kBlock, last - k + 1));
    seq.elements(k, std::span(buf.data(), n));
    for (std::size_t i = 0; i < n; ++i) acc.add(term_weight(std::log(buf[i]), sigma));
  }
  return acc.value();
}

// Integral of x^(-sigma) over [a, b] (b may be +inf when sigma > 1).
double power_integral(double a, double b, double sigma) {
  if (sigma == 1.0) return std::log(b / a);
  if (std::isinf(b)) return std::pow(a, 1.0 - sigma) / (sigma - 1.0);
  return (std::pow(a, 1.0 - sigma) - std::pow(b, 1.0 - sigma)) / (sigma - 1.0);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::int64_t term_budget() { return g_term_budget.load(); }
void set_term_budget(std::int64_t terms) { g_term_budget.store(terms); }

FrequencySequence::FrequencySequence(SequenceKind kind, double exponent, std::int64_t start,
                                     std::shared_ptr<const std::vector<double>> values)
    : kind_(kind), exponent_(exponent), start_(start), values_(std::move(values)) {
  validate();
}

FrequencySequence FrequencySequence::naturals(std::int64_t start_index) {
  return {SequenceKind::Naturals, 0.0, start_index, nullptr};
}

FrequencySequence FrequencySequence::primes(std::int64_t start_index) {
  return {SequenceKind::Primes, 0.0, start_index, nullptr};
}

FrequencySequence FrequencySequence::weighted_naturals(double exponent, std::int64_t start_index) {
  return {SequenceKind::WeightedNaturals, exponent, start_index, nullptr};
}

FrequencySequence FrequencySequence::explicit_values(std::vector<double> values, std::int64_t start_index) {
  return {SequenceKind::Explicit, 0.0, start_index,
          std::make_shared<const std::vector<double>>(std::move(values))};
}

FrequencySequence FrequencySequence::load_explicit(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open sequence file " + file.string());
  std::vector<double> values;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    const auto hash = line.find('#');
    const std::string text = trim(std::string_view(line).substr(0, hash));
    if (text.empty()) continue;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    const auto where = file.string() + ":" + std::to_string(line_no) + ": ";
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
      throw ValidationError(where + "'" + text + "' is not a finite real number");
    }
    if (v < 1.0) throw ValidationError(where + "value " + text + " is below 1");
    if (!values.empty() && !(v > values.back())) {
      throw ValidationError(where + "value " + text + " does not exceed the previous element");
    }
    values.push_back(v);
  }
  if (values.empty()) throw ValidationError(file.string() + ": sequence file has no elements");
  return explicit_values(std::move(values));
}

void FrequencySequence::validate() const {
  if (start_ < 1) throw ValidationError("start_index must be >= 1");
  switch (kind_) {
    case SequenceKind::Naturals:
    case SequenceKind::Primes:
      break;
    case SequenceKind::WeightedNaturals:
      if (!(exponent_ > 1.0) || !std::isfinite(exponent_)) {
        throw ValidationError("weighted naturals need exponent > 1");
      }
      if (weighted_element(start_) < 1.0) {
        throw ValidationError("weighted naturals: first element below 1; raise start_index");
      }
      break;
    case SequenceKind::Explicit: {
      const auto& v = *values_;
      if (v.empty()) throw ValidationError("explicit sequence is empty");
      if (start_ > static_cast<std::int64_t>(v.size())) {
        throw ValidationError("start_index past the end of the explicit sequence");
      }
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) throw ValidationError("explicit element " + std::to_string(i + 1) + " is not finite");
        if (i + 1 >= static_cast<std::size_t>(start_) && v[i] < 1.0) {
          throw ValidationError("explicit element " + std::to_string(i + 1) + " is below 1");
        }
        if (i > 0 && !(v[i] > v[i - 1])) {
          throw ValidationError("explicit element " + std::to_string(i + 1) + " is not strictly increasing");
        }
      }
      break;
    }
  }
}

std::optional<std::int64_t> FrequencySequence::last_index() const {
  if (kind_ != SequenceKind::Explicit) return std::nullopt;
  return static_cast<std::int64_t>(values_->size());
}

bool FrequencySequence::reciprocal_sum_converges() const {
  return kind_ == SequenceKind::WeightedNaturals || kind_ == SequenceKind::Explicit;
}

bool FrequencySequence::tail_converges(double sigma) const {
  switch (kind_) {
    case SequenceKind::Naturals:
    case SequenceKind::Primes:
      return sigma > 1.0;
    case SequenceKind::WeightedNaturals:
      return sigma > 1.0 || (sigma == 1.0 && exponent_ > 1.0);
    case SequenceKind::Explicit:
      return true;
  }
  return false;
}

double FrequencySequence::weighted_element(std::int64_t n) const {
  const auto x = static_cast<double>(n);
  return x * std::pow(std::log(x + 1.0), exponent_);
}

double FrequencySequence::element(std::int64_t index) const {
  double out = 0.0;
  elements(index, std::span(&out, 1));
  return out;
}

void FrequencySequence::elements(std::int64_t first, std::span<double> out) const {
  if (out.empty()) return;
  if (first < start_) {
    throw OutOfRangeError("index " + std::to_string(first) + " precedes start_index " + std::to_string(start_));
  }
  const auto last = first + static_cast<std::int64_t>(out.size()) - 1;
  switch (kind_) {
    case SequenceKind::Naturals:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(first + static_cast<std::int64_t>(i));
      return;
    case SequenceKind::Primes: {
      const auto primes = PrimeTable::instance().at_least(static_cast<std::uint64_t>(last));
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<double>((*primes)[static_cast<std::size_t>(first - 1) + i]);
      }
      return;
    }
    case SequenceKind::WeightedNaturals:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = weighted_element(first + static_cast<std::int64_t>(i));
      return;
    case SequenceKind::Explicit:
      if (last > static_cast<std::int64_t>(values_->size())) {
        throw OutOfRangeError("index " + std::to_string(last) + " past the last explicit element " +
                              std::to_string(values_->size()));
      }
      std::copy_n(values_->begin() + (first - 1), out.size(), out.begin());
      return;
  }
}

std::int64_t FrequencySequence::last_index_le(double x) const {
  if (std::isnan(x)) throw ValidationError("cutoff is NaN");
  std::int64_t idx = 0;
  switch (kind_) {
    case SequenceKind::Naturals:
      if (x >= kIndexCeiling) throw ResourceError("cutoff exceeds addressable index range");
      idx = x < 1.0 ? 0 : static_cast<std::int64_t>(std::floor(x));
      break;
    case SequenceKind::Primes: {
      if (x < 2.0) {
        idx = 0;
        break;
      }
      if (x > 4e9) throw ResourceError("prime cutoff exceeds sieve range");
      const auto primes = PrimeTable::instance().up_to(static_cast<std::uint64_t>(std::floor(x)));
      idx = std::upper_bound(primes->begin(), primes->end(), static_cast<std::uint32_t>(std::floor(x))) - primes->begin();
      break;
    }
    case SequenceKind::WeightedNaturals: {
      if (x >= kIndexCeiling) throw ResourceError("cutoff exceeds addressable index range");
      // p_n >= n for n >= 2, so the answer lies in [0, x].
      std::int64_t lo = 0;
      auto hi = static_cast<std::int64_t>(std::max(2.0, std::floor(x))) + 1;
      while (hi - lo > 1) {
        const auto mid = lo + (hi - lo) / 2;
        if (weighted_element(mid) <= x) lo = mid; else hi = mid;
      }
      idx = lo;
      break;
    }
    case SequenceKind::Explicit:
      idx = std::upper_bound(values_->begin(), values_->end(), x) - values_->begin();
      break;
  }
  return std::max(idx, start_ - 1);
}

std::string FrequencySequence::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case SequenceKind::Naturals: os << "naturals"; break;
    case SequenceKind::Primes: os << "primes"; break;
    case SequenceKind::WeightedNaturals: os << "weighted_naturals(a=" << exponent_ << ")"; break;
    case SequenceKind::Explicit: os << "explicit(n=" << values_->size() << ")"; break;
  }
  os << "[start=" << start_ << "]";
  return os.str();
}

double next_element(const FrequencySequence& seq, std::int64_t index) { return seq.element(index); }

std::int64_t counting_function(const FrequencySequence& seq, double x) {
  if (x < 1.0) return 0;
  return seq.count_le(x);
}

double power_sum(const FrequencySequence& seq, double sigma, double cutoff) {
  const auto first = seq.start_index();
  const auto last = seq.last_index_le(cutoff);
  check_budget(last - first + 1, "power_sum");
  return sum_terms(seq, first, last, sigma);
}

Enclosure tail_power_sum(const FrequencySequence& seq, double sigma, double cutoff) {
  const auto m = seq.last_index_le(cutoff) + 1;
  if (seq.kind() == SequenceKind::Explicit) {
    const auto last = *seq.last_index();
    if (m > last) return {0.0, 0.0};
    const double s = sum_terms(seq, m, last, sigma);
    return {s, s};
  }
  if (!seq.tail_converges(sigma)) {
    std::ostringstream os;
    os << "tail of sum p^(-" << sigma << ") diverges for " << seq.describe();
    throw DivergenceError(os.str());
  }

  double direct = 0.0;
  Enclosure rem;
  switch (seq.kind()) {
    case SequenceKind::Naturals: {
      const auto big_m = static_cast<double>(m);
      rem.lower = power_integral(big_m, std::numeric_limits<double>::infinity(), sigma);
      rem.upper = std::pow(big_m, -sigma) + rem.lower;
      break;
    }
    case SequenceKind::WeightedNaturals: {
      const auto big_m_index = m + kTailDirectTerms;
      direct = sum_terms(seq, m, big_m_index - 1, sigma);
      const auto big_m = static_cast<double>(big_m_index);
      const double a = seq.exponent();
      const double log_m = std::log(big_m);
      // Upper: log(x+1) > log x and x^(1-sigma) <= M^(1-sigma) for sigma >= 1.
      double upper = std::numeric_limits<double>::infinity();
      if (sigma > 1.0) upper = std::pow(log_m, -a * sigma) * power_integral(big_m, upper, sigma);
      if (a * sigma > 1.0) {
        upper = std::min(upper, std::pow(big_m, 1.0 - sigma) * std::pow(log_m, 1.0 - a * sigma) / (a * sigma - 1.0));
      }
      // Lower: on [M, M^2] the log factor is at most log(M^2 + 1).
      rem.lower = std::pow(std::log(big_m * big_m + 1.0), -a * sigma) * power_integral(big_m, big_m * big_m, sigma);
      rem.upper = std::pow(seq.element(big_m_index), -sigma) + upper;
      break;
    }
    case SequenceKind::Primes: {
      const auto big_m_index = std::max<std::int64_t>(m + kTailDirectTerms, 8);
      direct = sum_terms(seq, m, big_m_index - 1, sigma);
      // Partial summation with the exact count pi(X) = M - 1.
      const double x = seq.element(big_m_index - 1);
      const double log_x = std::log(x);
      const double boundary = static_cast<double>(big_m_index - 1) * std::pow(x, -sigma);
      const double integral = power_integral(x, std::numeric_limits<double>::infinity(), sigma);
      rem.upper = std::max(0.0, -boundary + kChebyshevUpper * sigma * integral / log_x);
      if (x >= kChebyshevLowerFrom) {
        rem.lower = std::max(0.0, -boundary + sigma * power_integral(x, x * x, sigma) / (2.0 * log_x));
      }
      break;
    }
    case SequenceKind::Explicit:
      break;
  }
  return {(direct + rem.lower) * (1.0 - kOutwardSlack), (direct + rem.upper) * (1.0 + kOutwardSlack)};
}

SummatoryCache::SummatoryCache(std::shared_ptr<const FrequencySequence> seq, double cutoff)
    : seq_(std::move(seq)), cutoff_(cutoff), count_(counting_function(*seq_, cutoff)) {}

double SummatoryCache::power_sum(double sigma) {
  const auto it = power_sums_.find(sigma);
  if (it != power_sums_.end()) return it->second;
  const double value = rds::power_sum(*seq_, sigma, cutoff_);
  power_sums_.emplace(sigma, value);
  return value;
}

}  // namespace rds
