#pragma once

#include <cmath>

namespace mgtv::detail {

// Neumaier compensated summation.
class CompensatedSum {
public:
  CompensatedSum &operator+=(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
    return *this;
  }

  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace mgtv::detail
