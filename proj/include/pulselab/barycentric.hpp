#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace pulselab {

/// Barycentric Lagrange interpolation on equispaced nodes x0 + k h,
/// k = 0..order. Weights are (-1)^k binom(order, k).
class EquispacedBarycentric {
 public:
  explicit EquispacedBarycentric(int order) : order_(order), w_(order + 1) {
    if (order < 1) throw std::invalid_argument("interpolation order >= 1");
    double binom = 1.0;
    for (int k = 0; k <= order; ++k) {
      w_[k] = (k % 2 == 0 ? 1.0 : -1.0) * binom;
      binom = binom * double(order - k) / double(k + 1);
    }
  }

  int order() const { return order_; }

  /// values[k] sampled at x0 + k h; evaluates the interpolant at x.
  double operator()(std::span<const double> values, double x0, double h, double x) const {
    if (values.size() != w_.size())
      throw std::invalid_argument("barycentric: need order+1 values");
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < w_.size(); ++k) {
      const double dx = x - (x0 + double(k) * h);
      if (dx == 0.0) return values[k];
      const double t = w_[k] / dx;
      num += t * values[k];
      den += t;
    }
    return num / den;
  }

 private:
  int order_;
  std::vector<double> w_;
};

}  // namespace pulselab
