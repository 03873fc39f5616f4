#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace pulselab {

struct QuadResult {
  double value{0.0};
  double error{0.0};
  bool converged{true};
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, QuadResult partial)
      : std::runtime_error(what), partial_(partial) {}
  const QuadResult& partial() const { return partial_; }

 private:
  QuadResult partial_;
};

struct QuadOptions {
  double rel_tol{1e-13};
  double abs_tol{1e-15};
  unsigned max_depth{24};
  /// Upper bound on the width of a single panel (0 disables); used to keep
  /// oscillatory integrands to a bounded number of periods per panel.
  double max_panel{0.0};
};

/// Adaptive 15-point Gauss-Kronrod on consecutive panels [b_i, b_{i+1}].
template <class F>
QuadResult integrate_panels(F&& f, std::vector<double> breaks,
                            const QuadOptions& opt = {}) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  std::sort(breaks.begin(), breaks.end());
  if (opt.max_panel > 0.0) {
    std::vector<double> refined;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
      const double a = breaks[i], b = breaks[i + 1];
      const auto n = std::max<std::size_t>(1, std::size_t(std::ceil((b - a) / opt.max_panel)));
      for (std::size_t k = 0; k < n; ++k) refined.push_back(a + (b - a) * double(k) / double(n));
    }
    refined.push_back(breaks.back());
    breaks = std::move(refined);
  }
  // A single Kronrod pass estimates every panel's L1 norm, so that each panel
  // is refined only to its share of the global tolerance. Asking a tail panel
  // for rel_tol of its own (tiny, oscillating) integral stalls at roundoff.
  std::vector<double> est(breaks.size(), 0.0);
  double l1_est = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    double err = 0.0, panel_l1 = 0.0;
    GK::integrate(f, breaks[i], breaks[i + 1], 0, 0.0, &err, &panel_l1);
    est[i] = panel_l1;
    l1_est += panel_l1;
  }
  QuadResult r;
  double l1 = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    double err = 0.0, panel_l1 = 0.0;
    const double share = est[i] > 0.0 ? l1_est / est[i] : 1.0;
    const double tol = std::min(1e-3, opt.rel_tol * std::max(1.0, share));
    const double v = GK::integrate(f, breaks[i], breaks[i + 1], opt.max_depth, tol, &err,
                                   &panel_l1);
    r.value += v;
    r.error += err;
    l1 += panel_l1;
  }
  const double allowed = std::max(opt.abs_tol, 1e3 * opt.rel_tol * l1);
  r.converged = std::isfinite(r.value) && r.error <= allowed;
  return r;
}

template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadOptions& opt = {}) {
  return integrate_panels(std::forward<F>(f), {a, b}, opt);
}

/// Integral over [a, inf) via the Kronrod rule on the mapped interval.
template <class F>
QuadResult integrate_to_infinity(F&& f, double a, const QuadOptions& opt = {}) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  QuadResult r;
  double l1 = 0.0;
  r.value = GK::integrate(f, a, std::numeric_limits<double>::infinity(),
                          opt.max_depth, opt.rel_tol, &r.error, &l1);
  r.converged = std::isfinite(r.value) &&
                r.error <= std::max(opt.abs_tol, 1e3 * opt.rel_tol * l1);
  return r;
}

/// Breakpoints 0 < scale/2 < 2 scale < 8 scale < ... < cutoff, geometric in
/// ratio 4; the integrands here have structure near 1/beta and near the
/// kernel's roll-off frequency.
inline std::vector<double> frequency_breaks(double scale, double cutoff) {
  std::vector<double> b{0.0};
  for (double x = 0.5 * scale; x < cutoff; x *= 4.0) b.push_back(x);
  b.push_back(cutoff);
  return b;
}

/// Fixed composite Gauss-Legendre rule (16 nodes per panel) on geometric
/// panels [a, 2a]; reused when an integrand is evaluated many times with a
/// slowly varying parameter.
struct FixedRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  static FixedRule geometric(double lo, double hi) {
    static constexpr double x16[8] = {
        0.0950125098376374401853193, 0.2816035507792589132304605,
        0.4580167776572273863424194, 0.6178762444026437484466718,
        0.7554044083550030338951012, 0.8656312023878317438804679,
        0.9445750230732325760779884, 0.9894009349916499325961542};
    static constexpr double w16[8] = {
        0.1894506104550684962853967, 0.1826034150449235888667637,
        0.1691565193950025381893121, 0.1495959888165767320815017,
        0.1246289712555338720524763, 0.0951585116824927848099251,
        0.0622535239386478928628438, 0.0271524594117540948517806};
    FixedRule r;
    if (!(hi > lo) || !(lo > 0.0)) return r;
    for (double a = lo; a < hi; a *= 2.0) {
      const double b = std::min(2.0 * a, hi);
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (int k = 0; k < 8; ++k) {
        r.nodes.push_back(mid - half * x16[k]);
        r.weights.push_back(half * w16[k]);
        r.nodes.push_back(mid + half * x16[k]);
        r.weights.push_back(half * w16[k]);
      }
    }
    return r;
  }
};

}  // namespace pulselab
