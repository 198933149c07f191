#pragma once

#include <cmath>

namespace rds {

/// Neumaier's variant of Kahan summation. The running compensation also
/// captures the error when the incoming term is larger than the partial sum.
///
/// The update is odd-symmetric: feeding the negated terms yields exactly the
/// negated result, which the sign-flip tests rely on.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }

  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

// p^(-sigma) given log(p). Every code path computes term weights through this
// one expression so table-driven and streaming sums agree bit for bit.
inline double term_weight(double log_p, double sigma) { return std::exp(-sigma * log_p); }

}  // namespace rds
