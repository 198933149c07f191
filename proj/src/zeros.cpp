#include "rds/zeros.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rds/error.hpp"
#include "rds/summation.hpp"

namespace rds {
namespace {

// Grid coordinate: log(sigma - 1/2) when the scan stays right of 1/2, plain
// sigma otherwise (finite sequences only).
struct GridMap {
  bool geometric = true;
  double to_u(double sigma) const { return geometric ? std::log(sigma - 0.5) : sigma; }
  double to_sigma(double u) const { return geometric ? 0.5 + std::exp(u) : u; }
};

// Smallest available bound on |F(sigma) - partial sum at cutoff|.
double best_radius(const FrequencySequence& seq, const std::vector<TailCertificate>& certs, double sigma,
                   double cutoff, bool deterministic, bool exact, CertificateKind* kind = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  CertificateKind k = CertificateKind::Heuristic;
  for (const auto& c : certs) {
    if (!c.exact && sigma < c.sigma0) continue;
    const double r = c.radius(sigma);
    if (r < best) {
      best = r;
      k = c.exact ? CertificateKind::Exact : CertificateKind::Probabilistic;
    }
  }
  if (deterministic && !exact && seq.tail_converges(sigma)) {
    const double r = tail_power_sum(seq, sigma, cutoff).upper;
    if (r < best) {
      best = r;
      k = CertificateKind::Deterministic;
    }
  }
  if (kind) *kind = k;
  return best;
}

// S(a), S'(a) and sum log^2 p p^-a over p <= cutoff. For sigma in [a, a + h]
// Taylor's theorem gives |S(sigma) - S(a) - S'(a)(sigma - a)| <= h^2/2 * curvature.
struct Expansion {
  double value = 0.0;
  double slope = 0.0;
  double curvature = 0.0;
  double magnitude = 0.0;  // sum p^-a, scale for rounding slack
};

Expansion expand(const SamplePath& path, double a, double cutoff) {
  const auto& seq = path.sequence();
  const std::int64_t first = seq.start_index();
  const std::int64_t last = seq.last_index_le(cutoff);
  CompensatedSum value, slope, curvature, magnitude;
  constexpr std::int64_t kBlock = 4096;
  std::vector<double> p(kBlock), x(kBlock);
  for (std::int64_t k = first; k <= last; k += kBlock) {
    const auto n = static_cast<std::size_t>(std::min(kBlock, last - k + 1));
    seq.elements(k, std::span(p.data(), n));
    path.fill_signs(k, std::span(x.data(), n));
    for (std::size_t i = 0; i < n; ++i) {
      const double lp = std::log(p[i]);
      const double w = term_weight(lp, a);
      value += x[i] * w;
      slope += -x[i] * lp * w;
      curvature += lp * lp * w;
      magnitude += w;
    }
  }
  return {value.value(), slope.value(), curvature.value(), magnitude.value()};
}

class IntervalCloser {
 public:
  IntervalCloser(const SamplePath& path, const std::vector<TailCertificate>& certs, const ScanOptions& opt,
                 const NoZeroOptions& nz, int sign)
      : path_(path), certs_(certs), opt_(opt), nz_(nz), sign_(sign) {
    const auto last = path.sequence().last_index();
    exact_ = last && path.sequence().last_index_le(opt.cutoff) >= *last;
  }

  bool close(double a, double b, int depth = 0) {
    if (++checks_ > nz_.max_interval_checks) return false;
    const Expansion e = expand(path_, a, opt_.cutoff);
    const double h = b - a;
    const double r = best_radius(path_.sequence(), certs_, a, opt_.cutoff, opt_.deterministic, exact_);
    const double slack = 1e-12 * e.magnitude;
    const double margin = std::abs(e.value) - std::abs(e.slope) * h - 0.5 * h * h * e.curvature - r - slack;
    if (margin > 0.0 && (e.value > 0 ? 1 : -1) == sign_) return true;
    if (depth >= nz_.max_interval_depth) return false;
    const double mid = 0.5 * (a + b);
    return close(a, mid, depth + 1) && close(mid, b, depth + 1);
  }

  int checks() const { return checks_; }

 private:
  const SamplePath& path_;
  const std::vector<TailCertificate>& certs_;
  const ScanOptions& opt_;
  const NoZeroOptions& nz_;
  int sign_;
  bool exact_ = false;
  int checks_ = 0;
};

struct PointState {
  double sigma = 0.0;
  Sign certified = Sign::Undecided;
  CertificateKind kind = CertificateKind::Heuristic;
  Sign combined = Sign::Undecided;
};

class Scanner {
 public:
  Scanner(const SamplePath& path, const ScanOptions& opt) : path_(path), opt_(opt) {
    const auto& seq = path.sequence();
    if (!(opt.sigma_lo < opt.sigma_hi)) throw ValidationError("scan needs sigma_lo < sigma_hi");
    if (!(opt.eta_budget > 0.0 && opt.eta_budget < 1.0)) throw ValidationError("eta_budget must lie in (0, 1)");
    if (opt.initial_grid < 2) throw ValidationError("initial_grid must be >= 2");
    if (opt.max_refinement < 0) throw ValidationError("max_refinement must be >= 0");
    if (opt.cutoff < 1.0) throw ValidationError("cutoff must be >= 1");

    const auto last = seq.last_index();
    exact_ = last && seq.last_index_le(opt.cutoff) >= *last;
    map_.geometric = opt.sigma_lo > 0.5;
    if (!map_.geometric && !seq.is_finite()) {
      throw ValidationError("scan below sigma = 1/2 is only available for finite sequences");
    }
    if (exact_) {
      TailCertificate c;
      c.exact = true;
      c.sigma0 = opt.sigma_lo;
      c.cutoff = opt.cutoff;
      certs_.push_back(c);
      return;
    }
    std::vector<double> bases = opt.sigma0s;
    if (bases.empty()) bases.push_back(map_.geometric ? 0.5 * (0.5 + opt.sigma_lo) : opt.sigma_lo);
    const double eta_each = opt.eta_budget / static_cast<double>(bases.size());
    for (const double s0 : bases) {
      if (s0 > opt.sigma_hi) throw ValidationError("certificate base exponent above sigma_hi");
      certs_.push_back(tail_certificate(seq, s0, opt.cutoff, eta_each));
    }
  }

  SignScanReport run() {
    std::vector<double> initial;
    const double u_lo = map_.to_u(opt_.sigma_lo);
    const double u_hi = map_.to_u(opt_.sigma_hi);
    const int n = opt_.initial_grid;
    initial.push_back(opt_.sigma_lo);
    for (int i = 1; i + 1 < n; ++i) initial.push_back(map_.to_sigma(u_lo + (u_hi - u_lo) * i / (n - 1)));
    initial.push_back(opt_.sigma_hi);
    for (const double x : opt_.extra_points) {
      if (x >= opt_.sigma_lo && x <= opt_.sigma_hi) initial.push_back(x);
    }
    std::sort(initial.begin(), initial.end());
    initial.erase(std::unique(initial.begin(), initial.end()), initial.end());
    points_ = evaluate(initial);

    SignScanReport report;
    report.resolution_reached = false;
    for (int round = 0;; ++round) {
      std::vector<double> mids;
      for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
        const Sign a = effective(points_[i]);
        const Sign b = effective(points_[i + 1]);
        if (a == Sign::Undecided || b == Sign::Undecided || a != b) {
          const double mid = map_.to_sigma(0.5 * (map_.to_u(points_[i].sigma) + map_.to_u(points_[i + 1].sigma)));
          if (mid > points_[i].sigma && mid < points_[i + 1].sigma) mids.push_back(mid);
        }
      }
      if (mids.empty()) {
        report.resolution_reached = true;
        break;
      }
      if (round >= opt_.max_refinement) break;
      auto fresh = evaluate(mids);
      points_.insert(points_.end(), fresh.begin(), fresh.end());
      std::sort(points_.begin(), points_.end(), [](const auto& a, const auto& b) { return a.sigma < b.sigma; });
      report.refinement_rounds = round + 1;
    }

    for (const auto& p : points_) {
      report.sigma_grid.push_back(p.sigma);
      report.decided_signs.push_back(p.certified);
      report.deciding_certificate.push_back(p.kind);
      report.heuristic_signs.push_back(p.combined);
    }
    report.sign_changes = count_sign_changes(report.decided_signs);
    report.combined_sign_changes = count_sign_changes(report.heuristic_signs);
    Sign prev = Sign::Undecided;
    double prev_sigma = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const Sign s = points_[i].certified;
      if (s == Sign::Undecided) continue;
      if (prev != Sign::Undecided && s != prev) report.sign_change_brackets.emplace_back(prev_sigma, points_[i].sigma);
      prev = s;
      prev_sigma = points_[i].sigma;
    }
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
      if (points_[i].certified == Sign::Undecided || points_[i + 1].certified == Sign::Undecided) {
        report.undecided_measure += points_[i + 1].sigma - points_[i].sigma;
      }
    }
    if (points_.size() == 1 && points_[0].certified == Sign::Undecided) report.undecided_measure = 0.0;
    for (const auto& c : certs_) {
      if (!c.exact) report.eta_total += c.eta;
    }
    report.certificates = certs_;
    return report;
  }

 private:
  Sign effective(const PointState& p) const { return opt_.heuristic ? p.combined : p.certified; }

  std::vector<PointState> evaluate(const std::vector<double>& sigmas) {
    const auto& seq = path_.sequence();
    std::vector<SumRequest> req;
    req.reserve(sigmas.size());
    for (const double s : sigmas) req.push_back({s, opt_.cutoff});
    const auto partial = partial_sums(path_, req);

    std::vector<PointState> out(sigmas.size());
    std::vector<SumRequest> heuristic_req;
    std::vector<std::size_t> heuristic_idx;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
      const double sigma = sigmas[i];
      auto& st = out[i];
      st.sigma = sigma;
      CertificateKind kind = CertificateKind::Heuristic;
      const double best = best_radius(seq, certs_, sigma, opt_.cutoff, opt_.deterministic, exact_, &kind);
      if (std::abs(partial[i]) > best) {
        st.certified = to_sign(partial[i] > 0 ? 1 : -1);
        st.kind = kind;
        st.combined = st.certified;
        continue;
      }
      if (!opt_.heuristic || !(sigma > 0.5)) continue;
      const double u_h = std::max(opt_.cutoff, heuristic_cutoff(sigma));
      if (u_h > opt_.heuristic_max_cutoff) continue;
      if (u_h == opt_.cutoff) {
        st.combined = to_sign(partial[i] > 0 ? 1 : (partial[i] < 0 ? -1 : 0));
      } else {
        heuristic_req.push_back({sigma, u_h});
        heuristic_idx.push_back(i);
      }
    }
    if (!heuristic_req.empty()) {
      const auto h = partial_sums(path_, heuristic_req);
      for (std::size_t j = 0; j < h.size(); ++j) {
        out[heuristic_idx[j]].combined = to_sign(h[j] > 0 ? 1 : (h[j] < 0 ? -1 : 0));
      }
    }
    return out;
  }

  const SamplePath& path_;
  const ScanOptions& opt_;
  GridMap map_;
  bool exact_ = false;
  std::vector<TailCertificate> certs_;
  std::vector<PointState> points_;
};

}  // namespace

char to_char(Sign s) {
  switch (s) {
    case Sign::Negative: return '-';
    case Sign::Positive: return '+';
    case Sign::Undecided: return '?';
  }
  return '?';
}

int count_sign_changes(const std::vector<Sign>& signs) {
  int changes = 0;
  Sign prev = Sign::Undecided;
  for (const Sign s : signs) {
    if (s == Sign::Undecided) continue;
    if (prev != Sign::Undecided && s != prev) ++changes;
    prev = s;
  }
  return changes;
}

int count_sign_changes_from(const std::vector<double>& grid, const std::vector<Sign>& signs, double sigma_from) {
  std::vector<Sign> tail;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] >= sigma_from) tail.push_back(signs[i]);
  }
  return count_sign_changes(tail);
}

Sign certified_sign(const SamplePath& path, double sigma, const TailCertificate& cert) {
  return to_sign(evaluate(path, sigma, cert).sign());
}

SignScanReport scan(const SamplePath& path, const ScanOptions& options) { return Scanner(path, options).run(); }

SignScanReport scan(const SamplePath& path, double sigma_lo, double sigma_hi, int initial_grid, int max_refinement,
                    double eta_budget) {
  ScanOptions opt;
  opt.sigma_lo = sigma_lo;
  opt.sigma_hi = sigma_hi;
  opt.initial_grid = initial_grid;
  opt.max_refinement = max_refinement;
  opt.eta_budget = eta_budget;
  return scan(path, opt);
}

SignScanReport certify_no_zeros(const SamplePath& path, double sigma_lo, const NoZeroOptions& options) {
  ScanOptions opt = options.scan;
  opt.sigma_lo = sigma_lo;
  opt.sigma_hi = std::max(options.sigma_switch, sigma_lo + 1.0 / 16);
  opt.heuristic = false;
  SignScanReport report = scan(path, opt);

  const auto& signs = report.decided_signs;
  const bool all_decided = std::none_of(signs.begin(), signs.end(), [](Sign s) { return s == Sign::Undecided; });
  if (!all_decided || report.sign_changes != 0 || !report.resolution_reached) return report;
  const int common = static_cast<int>(signs.front());

  const auto& seq = path.sequence();
  const int leading = path.sign_at(seq.start_index());
  double sigma = opt.sigma_hi;
  for (int j = 0; j <= options.ladder_steps; ++j, sigma *= 2.0) {
    const auto dom = domination_certificate(path, sigma);
    report.domination_ladder.emplace_back(sigma, dom.value_or(0));
    if (!dom || *dom != common) return report;
    if (leading_term_closure(seq, sigma)) {
      report.closure_sigma = sigma;
      if (leading != common) return report;
      std::vector<double> knots = report.sigma_grid;
      for (const auto& [s, _] : report.domination_ladder) {
        if (s > knots.back()) knots.push_back(s);
      }
      IntervalCloser closer(path, report.certificates, opt, options, common);
      bool closed = true;
      for (std::size_t i = 0; closed && i + 1 < knots.size(); ++i) closed = closer.close(knots[i], knots[i + 1]);
      report.interval_closure = closed;
      report.closure_intervals = closer.checks();
      report.no_zero_certified = closed;
      return report;
    }
  }
  return report;
}

}  // namespace rds
