#include "rds/limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rds/error.hpp"
#include "rds/eval.hpp"
#include "rds/parallel.hpp"
#include "rds/summation.hpp"

namespace rds {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

CharFunctionTable::CharFunctionTable(const FrequencySequence& seq, double sigma, double cutoff) {
  const auto last = seq.last_index_le(cutoff);
  weights_ = weight_table(seq, sigma, seq.start_index(), last);
  CompensatedSum v2;
  for (const double w : weights_) v2.add(w * w);
  scale_ = std::sqrt(v2.value());
  if (!(scale_ > 0.0)) throw DomainError("characteristic function needs at least one element below the cutoff");
  for (auto& w : weights_) w /= scale_;
}

double CharFunctionTable::operator()(double t) const {
  CompensatedSum log_abs;
  bool negative = false;
  for (const double w : weights_) {
    const double c = std::cos(t * w);
    if (c == 0.0) return 0.0;
    if (c < 0.0) negative = !negative;
    log_abs.add(std::log(std::abs(c)));
  }
  const double magnitude = std::exp(log_abs.value());
  return negative ? -magnitude : magnitude;
}

double char_function(const FrequencySequence& seq, double sigma, double t, double cutoff) {
  return CharFunctionTable(seq, sigma, cutoff)(t);
}

double char_function_deviation(const FrequencySequence& seq, double sigma, double cutoff, double t_max, int points) {
  if (points < 2) throw ValidationError("char_function_deviation needs at least 2 grid points");
  const CharFunctionTable phi(seq, sigma, cutoff);
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double t = t_max * i / (points - 1);
    worst = std::max(worst, std::abs(phi(t) - std::exp(-0.5 * t * t)));
  }
  return worst;
}

CltSample clt_sample(std::span<const SamplePath> paths, double sigma, double cutoff, int workers) {
  CltSample out;
  if (paths.empty()) return out;
  const auto& seq = paths.front().sequence();
  const auto first = seq.start_index();
  const auto last = seq.last_index_le(cutoff);
  const auto weights = weight_table(seq, sigma, first, last);
  CompensatedSum v2;
  for (const double w : weights) v2.add(w * w);
  out.truncated_variance = v2.value();
  if (!(out.truncated_variance > 0.0)) throw DomainError("clt_sample: no elements below the cutoff");
  if (seq.tail_converges(2.0 * sigma)) {
    const auto tail = tail_power_sum(seq, 2.0 * sigma, cutoff);
    out.full_variance = {out.truncated_variance + tail.lower, out.truncated_variance + tail.upper};
  } else {
    out.full_variance = {out.truncated_variance, std::numeric_limits<double>::infinity()};
  }
  out.variance_fraction = out.truncated_variance / out.full_variance.upper;
  out.low_variance_warning = out.variance_fraction < 0.9;

  const double norm = std::sqrt(out.truncated_variance);
  out.values.resize(paths.size());
  parallel_for(paths.size(), workers, [&](std::size_t i) {
    out.values[i] = weighted_sign_sum(paths[i], first, weights) / norm;
  });
  return out;
}

CltSample clt_sample(std::shared_ptr<const FrequencySequence> seq, std::uint64_t master_seed,
                     std::uint64_t first_trial, std::uint64_t count, double sigma, double cutoff, int workers) {
  std::vector<SamplePath> paths;
  paths.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) paths.push_back(SamplePath::random(seq, master_seed, first_trial + i));
  return clt_sample(paths, sigma, cutoff, workers);
}

double ks_statistic(std::span<const double> samples) {
  if (samples.empty()) throw ValidationError("ks_statistic needs a nonempty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf(sorted[i]);
    const auto k = static_cast<double>(i);
    d = std::max({d, (k + 1.0) / n - f, f - k / n});
  }
  return d;
}

double minimal_feasible_sigma(double max_cutoff) { return 0.5 + 0.5 / std::log(max_cutoff); }

VarianceProfile variance_profile(const FrequencySequence& seq, double sigma, double v2_cutoff) {
  if (!(sigma > 0.5)) throw DomainError("variance_profile needs sigma > 1/2");
  VarianceProfile vp;
  vp.sigma = sigma;
  vp.y_rule = heuristic_cutoff(sigma);
  const auto budget = static_cast<double>(term_budget());
  if (!(vp.y_rule <= budget)) {
    std::ostringstream os;
    os << "y(" << sigma << ") = " << vp.y_rule << " exceeds the term budget; smallest feasible sigma is "
       << minimal_feasible_sigma(budget);
    throw ResourceError(os.str());
  }
  CompensatedSum v_y;
  CompensatedSum mvb;
  const auto last = seq.last_index_le(vp.y_rule);
  for (auto k = seq.start_index(); k <= last; ++k) {
    const double p = seq.element(k);
    const double lp = std::log(p);
    const double d = term_weight(lp, sigma) - term_weight(lp, 0.5);
    v_y.add(d * d);
    mvb.add(lp * lp / p);
  }
  vp.v_y = v_y.value();
  vp.mean_value_bound = (sigma - 0.5) * (sigma - 0.5) * mvb.value();
  vp.u_y = tail_power_sum(seq, 2.0 * sigma, vp.y_rule);
  vp.v2_cutoff = v2_cutoff > 0.0 ? v2_cutoff : vp.y_rule;
  vp.v2 = power_sum(seq, 2.0 * sigma, vp.v2_cutoff);
  return vp;
}

}  // namespace rds
