#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace pulselab {

/// Exponential fit value ~ C exp(-delta t) over a time window.
struct DecayFit {
  double delta{0.0};
  double prefactor{0.0};
  double t_begin{0.0};
  double t_end{0.0};
  double r_squared{0.0};
  std::size_t points{0};
  bool conclusive{false};
  std::string reason;
};

struct FitWindow {
  double t_begin{0.0};
  double t_end{0.0};
};

inline constexpr double kFitClip = 1e-14;
inline constexpr double kConclusiveR2 = 0.98;
inline constexpr std::size_t kMinFitPoints = 8;

/// Roundoff level of a series computed from fields of size ~max|value|.
inline double roundoff_floor(const std::vector<std::pair<double, double>>& series) {
  double m = 0.0;
  for (const auto& [t, v] : series)
    if (std::isfinite(v)) m = std::max(m, std::abs(v));
  return 1e3 * std::numeric_limits<double>::epsilon() * m;
}

/// Least squares of ln(value) against t on the window. Values below
/// max(1e-14, floor) are dropped. A series with no variation in ln(value) has
/// R^2 defined as 1.
inline DecayFit fit_decay(const std::vector<std::pair<double, double>>& series,
                          FitWindow window, double floor = kFitClip) {
  const double clip = std::max(kFitClip, floor);
  DecayFit fit;
  fit.t_begin = window.t_begin;
  fit.t_end = window.t_end;
  std::vector<double> ts, ys;
  for (const auto& [t, v] : series) {
    if (t < window.t_begin || t > window.t_end) continue;
    if (!(v > clip) || !std::isfinite(v)) continue;
    ts.push_back(t);
    ys.push_back(std::log(v));
  }
  fit.points = ts.size();
  if (ts.size() < kMinFitPoints) {
    fit.reason = "fewer than 8 usable points";
    return fit;
  }
  const double n = double(ts.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    my += ys[i];
  }
  mt /= n;
  my /= n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    sty += (ts[i] - mt) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (stt == 0.0) {
    fit.reason = "degenerate time window";
    return fit;
  }
  const double slope = sty / stt;
  const double intercept = my - slope * mt;
  double sse = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double e = ys[i] - (intercept + slope * ts[i]);
    sse += e * e;
  }
  fit.delta = -slope;
  fit.prefactor = std::exp(intercept);
  // Relative to the data scale so a flat series (syy ~ roundoff) counts as a perfect fit.
  fit.r_squared = syy <= 1e-24 * n * (1.0 + my * my) ? 1.0 : 1.0 - sse / syy;
  fit.conclusive = fit.r_squared >= kConclusiveR2;
  if (!fit.conclusive) fit.reason = "R^2 below 0.98";
  return fit;
}

}  // namespace pulselab
