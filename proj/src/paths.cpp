#include "rds/paths.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "rds/error.hpp"
#include "rds/summation.hpp"

namespace rds {
namespace {

constexpr std::size_t kBlock = 4096;

}  // namespace

SamplePath::SamplePath(std::shared_ptr<const FrequencySequence> seq, std::uint64_t seed, std::uint64_t trial,
                       int constant)
    : seq_(std::move(seq)), master_seed_(seed), trial_(trial), rng_(seed, trial), constant_(constant) {
  if (!seq_) throw ValidationError("sample path needs a frequency sequence");
}

SamplePath SamplePath::random(std::shared_ptr<const FrequencySequence> seq, std::uint64_t master_seed,
                              std::uint64_t trial_index) {
  return {std::move(seq), master_seed, trial_index, 0};
}

SamplePath SamplePath::constant(std::shared_ptr<const FrequencySequence> seq, int sign) {
  if (sign != 1 && sign != -1) throw ValidationError("constant path sign must be +1 or -1");
  return {std::move(seq), 0, 0, sign};
}

int SamplePath::sign_at(std::int64_t index) const {
  double s = 0.0;
  fill_signs(index, std::span(&s, 1));
  return s > 0 ? 1 : -1;
}

void SamplePath::fill_signs(std::int64_t first, std::span<double> out) const {
  if (first < seq_->start_index()) {
    throw OutOfRangeError("sign requested for index " + std::to_string(first) + " before start_index");
  }
  if (constant_ != 0) {
    std::fill(out.begin(), out.end(), static_cast<double>(constant_));
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = static_cast<double>(rng_.sign(static_cast<std::uint64_t>(first) + i));
    }
  }
  const auto last = first + static_cast<std::int64_t>(out.size()) - 1;
  if (forced_last_ >= first) {
    const auto stop = std::min(forced_last_, last);
    for (auto k = first; k <= stop; ++k) out[static_cast<std::size_t>(k - first)] = forced_sign_;
  }
  if (overrides_) {
    auto it = std::lower_bound(overrides_->begin(), overrides_->end(), std::pair{first, -2});
    for (; it != overrides_->end() && it->first <= last; ++it) {
      out[static_cast<std::size_t>(it->first - first)] = it->second;
    }
  }
  if (flipped_) {
    for (auto& s : out) s = -s;
  }
}

SamplePath SamplePath::flipped() const {
  SamplePath p = *this;
  p.flipped_ = !flipped_;
  return p;
}

SamplePath SamplePath::with_forced_prefix(std::int64_t last_index, int sign) const {
  if (sign != 1 && sign != -1) throw ValidationError("forced sign must be +1 or -1");
  if (overrides_ || flipped_) {
    // Keep precedence simple: fold into the sparse overrides.
    std::map<std::int64_t, int> assignment;
    for (auto k = seq_->start_index(); k <= last_index; ++k) assignment[k] = sign;
    return with_overrides(assignment);
  }
  SamplePath p = *this;
  p.forced_last_ = last_index;
  p.forced_sign_ = sign;
  return p;
}

SamplePath SamplePath::with_overrides(const std::map<std::int64_t, int>& assignment) const {
  std::map<std::int64_t, int> merged;
  if (overrides_) merged.insert(overrides_->begin(), overrides_->end());
  for (const auto& [k, s] : assignment) {
    if (s != 1 && s != -1) {
      throw ValidationError("forced sign for index " + std::to_string(k) + " must be +1 or -1, got " +
                            std::to_string(s));
    }
    if (k < seq_->start_index()) throw ValidationError("forced index " + std::to_string(k) + " precedes start_index");
    if (auto last = seq_->last_index(); last && k > *last) {
      throw ValidationError("forced index " + std::to_string(k) + " past the end of the sequence");
    }
    // Overrides are stored pre-flip so that flipped() still negates them.
    merged[k] = flipped_ ? -s : s;
  }
  SamplePath p = *this;
  p.overrides_ = std::make_shared<const std::vector<std::pair<std::int64_t, int>>>(merged.begin(), merged.end());
  return p;
}

SamplePath forced_path(const std::map<std::int64_t, int>& assignment, const SamplePath& base) {
  return base.with_overrides(assignment);
}

SamplePath force_up_to(const SamplePath& base, double cutoff, int sign) {
  return base.with_forced_prefix(base.sequence().last_index_le(cutoff), sign);
}

double running_sup_indexed(const SamplePath& path, std::span<const double> weights, std::int64_t weights_first,
                           std::int64_t first, std::int64_t last) {
  if (last < first) return 0.0;
  if (first < weights_first || last - weights_first >= static_cast<std::int64_t>(weights.size())) {
    throw ValidationError("running_sup: weight table does not cover the index range");
  }
  CompensatedSum acc;
  double best = 0.0;
  std::array<double, kBlock> signs{};
  for (auto k = first; k <= last; k += static_cast<std::int64_t>(kBlock)) {
    const auto n = static_cast<std::size_t>(std::min<std::int64_t>(kBlock, last - k + 1));
    path.fill_signs(k, std::span(signs.data(), n));
    const double* w = weights.data() + (k - weights_first);
    for (std::size_t i = 0; i < n; ++i) {
      acc.add(signs[i] * w[i]);
      best = std::max(best, std::abs(acc.value()));
    }
  }
  return best;
}

double running_sup(const SamplePath& path, double sigma0, double from_cutoff, double to_cutoff) {
  if (!(from_cutoff < to_cutoff)) throw ValidationError("running_sup needs from_cutoff < to_cutoff");
  const auto& seq = path.sequence();
  const auto first = seq.last_index_le(from_cutoff) + 1;
  const auto last = seq.last_index_le(to_cutoff);
  if (last < first) return 0.0;
  if (last - first + 1 > term_budget()) throw ResourceError("running_sup exceeds the term budget");
  CompensatedSum acc;
  double best = 0.0;
  std::array<double, kBlock> p{};
  std::array<double, kBlock> signs{};
  for (auto k = first; k <= last; k += static_cast<std::int64_t>(kBlock)) {
    const auto n = static_cast<std::size_t>(std::min<std::int64_t>(kBlock, last - k + 1));
    seq.elements(k, std::span(p.data(), n));
    path.fill_signs(k, std::span(signs.data(), n));
    for (std::size_t i = 0; i < n; ++i) {
      acc.add(signs[i] * term_weight(std::log(p[i]), sigma0));
      best = std::max(best, std::abs(acc.value()));
    }
  }
  return best;
}

PrefixSums prefix_sums(const SamplePath& path, double cutoff, std::span<const double> sigmas) {
  const auto& seq = path.sequence();
  const auto first = seq.start_index();
  const auto last = seq.last_index_le(cutoff);
  if (last - first + 1 > term_budget()) throw ResourceError("prefix_sums exceeds the term budget");
  PrefixSums out;
  out.cutoff = cutoff;
  std::vector<CompensatedSum> acc(sigmas.size());
  for (const double s : sigmas) out.weighted[s].reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, last - first + 1)));
  std::int64_t a = 0;
  std::array<double, kBlock> p{};
  std::array<double, kBlock> signs{};
  for (auto k = first; k <= last; k += static_cast<std::int64_t>(kBlock)) {
    const auto n = static_cast<std::size_t>(std::min<std::int64_t>(kBlock, last - k + 1));
    seq.elements(k, std::span(p.data(), n));
    path.fill_signs(k, std::span(signs.data(), n));
    for (std::size_t i = 0; i < n; ++i) {
      a += signs[i] > 0 ? 1 : -1;
      out.a_of_x.emplace_back(p[i], a);
      const double log_p = std::log(p[i]);
      for (std::size_t j = 0; j < sigmas.size(); ++j) {
        acc[j].add(signs[i] * term_weight(log_p, sigmas[j]));
        out.weighted[sigmas[j]].push_back(acc[j].value());
      }
    }
  }
  return out;
}

}  // namespace rds
