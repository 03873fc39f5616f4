#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "pulselab/kernel.hpp"
#include "pulselab/params.hpp"

// Slow, independent verifiers. Everything here uses direct-space or mapped
// midpoint sums with Richardson extrapolation, never the Gauss-Kronrod or
// spectral paths used by the fast code.

namespace pulselab::oracle {

struct OracleReport {
  std::string quantity;
  double oracle{0.0};
  double fast{0.0};
  double abs_err{0.0};
  double rel_err{0.0};
  double tolerance{0.0};
  bool relative{true};
  bool pass{false};
};

inline OracleReport compare(std::string quantity, double oracle_value, double fast_value,
                            double tolerance, bool relative = true) {
  OracleReport r;
  r.quantity = std::move(quantity);
  r.oracle = oracle_value;
  r.fast = fast_value;
  r.abs_err = std::abs(fast_value - oracle_value);
  r.rel_err = r.abs_err / std::max(std::abs(oracle_value), 1e-300);
  r.tolerance = tolerance;
  r.relative = relative;
  r.pass = (relative ? r.rel_err : r.abs_err) <= tolerance;
  return r;
}

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Midpoint rule with step tripling and Richardson extrapolation (the error
/// expansion is in even powers of h). Open: never evaluates at a or b.
inline double romberg(const std::function<double(double)>& f, double a, double b,
                      double rel_tol = 1e-13, int max_level = 13) {
  if (a == b) return 0.0;
  std::vector<std::vector<double>> R;
  double h = b - a;
  double sum = f(a + 0.5 * h);
  R.push_back({sum * h});
  long n_old = 1;
  for (int level = 1; level <= max_level; ++level) {
    const double h_new = h / 3.0;
    double extra = 0.0;
    for (long i = 0; i < n_old; ++i) {
      const double left = a + double(i) * h;
      extra += f(left + 0.5 * h_new) + f(left + 2.5 * h_new);
    }
    sum += extra;
    h = h_new;
    n_old *= 3;
    std::vector<double> row{sum * h};
    double factor = 1.0;
    for (int k = 1; k <= level; ++k) {
      factor *= 9.0;
      row.push_back(row[k - 1] + (row[k - 1] - R[level - 1][k - 1]) / (factor - 1.0));
    }
    const double diff = std::abs(row.back() - R.back().back());
    R.push_back(std::move(row));
    if (level >= 3 && diff <= rel_tol * std::max(std::abs(R.back().back()), 1e-300))
      return R.back().back();
  }
  const double best = R.back().back();
  if (std::abs(best - R[R.size() - 2].back()) > 1e-8 * std::max(std::abs(best), 1e-30))
    throw OracleError("romberg did not converge on [" + std::to_string(a) + ", " +
                      std::to_string(b) + "]");
  return best;
}

/// Sum of romberg over consecutive panels.
inline double romberg_panels(const std::function<double(double)>& f, std::vector<double> breaks,
                             double rel_tol = 1e-13) {
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    total += romberg(f, breaks[i], breaks[i + 1], rel_tol);
  return total;
}

inline std::vector<double> uniform_breaks(double a, double b, int panels) {
  std::vector<double> v;
  for (int i = 0; i <= panels; ++i) v.push_back(a + (b - a) * double(i) / double(panels));
  return v;
}

/// int_0^inf f(xi) dxi through xi = s u / (1 - u).
inline double romberg_semi_infinite(const std::function<double(double)>& f, double scale,
                                    double rel_tol = 1e-13) {
  auto mapped = [&](double u) {
    const double one_minus = 1.0 - u;
    const double xi = scale * u / one_minus;
    return f(xi) * scale / (one_minus * one_minus);
  };
  return romberg_panels(mapped, uniform_breaks(0.0, 1.0, 8), rel_tol);
}

/// int f(x) e^{-i x xi} dx over [-radius, radius] by direct quadrature.
inline std::complex<double> fourier_by_quadrature(const std::function<double(double)>& profile,
                                                  double xi, double radius,
                                                  std::vector<double> breaks = {},
                                                  int panels = 16) {
  if (!(radius > 0.0)) throw OracleError("fourier_by_quadrature: radius > 0");
  auto b = uniform_breaks(-radius, radius, panels);
  for (double x : breaks)
    if (x > -radius && x < radius) b.push_back(x);
  const double re = romberg_panels([&](double x) { return profile(x) * std::cos(x * xi); }, b);
  const double im = romberg_panels([&](double x) { return -profile(x) * std::sin(x * xi); }, b);
  return {re, im};
}

inline double fourier_by_quadrature(const SourceKernel& g, double xi) {
  const double R = g.support_radius(1e-18);
  if (R == 0.0) return 0.0;
  return fourier_by_quadrature(g.profile, xi, R, {0.0}).real();
}

/// Stationary state by direct-space convolution with the Green's function of
/// (1 - beta^2 d^2): (alpha gamma / 2 beta) int e^{-|x-y|/beta} g(y) dy.
inline std::function<double(double)> greens_convolution(const ModelParams& p,
                                                        const SourceKernel& g) {
  return [p, g](double x) {
    if (g.is_zero() || p.gamma == 0.0) return 0.0;
    const double R = g.support_radius(1e-18);
    auto b = uniform_breaks(-R, R, 16);
    if (x > -R && x < R) b.push_back(x);
    const double integral = romberg_panels(
        [&](double y) { return std::exp(-std::abs(x - y) / p.beta) * g.profile(y); }, b);
    return p.alpha * p.gamma / (2.0 * p.beta) * integral;
  };
}

/// d^k/dx^k of h_t(x) = exp(-x^2/4t)/sqrt(4 pi t), via Hermite polynomials.
inline double heat_kernel_derivative(int k, double t, double x) {
  const double u = x / (2.0 * std::sqrt(t));
  double h0 = 1.0, h1 = 2.0 * u, hk = (k == 0) ? h0 : h1;
  for (int n = 1; n < k; ++n) {
    hk = 2.0 * u * h1 - 2.0 * double(n) * h0;
    h0 = h1;
    h1 = hk;
  }
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return sign * hk * std::exp(-u * u) / std::sqrt(4.0 * std::numbers::pi * t) /
         std::pow(2.0 * std::sqrt(t), k);
}

struct ScalingFit {
  double slope{0.0};
  double expected{0.0};
  double rel_err{0.0};
  std::vector<double> norms;
};

/// p = 0 encodes p = infinity.
inline double heat_norm(int k, int p, double t, double half_width, double dx) {
  const auto n = static_cast<long>(std::ceil(2.0 * half_width / dx));
  const double h = 2.0 * half_width / double(n);
  double acc = 0.0;
  for (long i = 0; i <= n; ++i) {
    const double x = -half_width + double(i) * h;
    const double v = std::abs(heat_kernel_derivative(k, t, x));
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    if (p == 0)
      acc = std::max(acc, v);
    else
      acc += w * h * std::pow(v, p);
  }
  return p == 0 ? acc : std::pow(acc, 1.0 / p);
}

/// Fits log ||d^k h_t||_p against log t on a fixed fine grid shared by all t.
inline ScalingFit heat_norm_scaling(int k, int p, const std::vector<double>& t_grid) {
  if (k < 0 || k > 3) throw OracleError("heat_norm_scaling: 0 <= k <= 3");
  if (!(p == 0 || p == 1 || p == 2)) throw OracleError("heat_norm_scaling: p in {1, 2, inf}");
  if (t_grid.size() < 2) throw OracleError("heat_norm_scaling: need >= 2 times");
  const auto [t_min, t_max] = std::minmax_element(t_grid.begin(), t_grid.end());
  if (!(*t_min > 0.0)) throw OracleError("heat_norm_scaling: t > 0");
  const double half_width = 20.0 * std::sqrt(*t_max);
  const double dx = std::sqrt(*t_min) / 200.0;
  ScalingFit fit;
  double mx = 0.0, my = 0.0;
  std::vector<double> lx, ly;
  for (double t : t_grid) {
    const double nrm = heat_norm(k, p, t, half_width, dx);
    fit.norms.push_back(nrm);
    lx.push_back(std::log(t));
    ly.push_back(std::log(nrm));
    mx += lx.back();
    my += ly.back();
  }
  mx /= double(lx.size());
  my /= double(ly.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw OracleError("heat_norm_scaling: degenerate fit");
  fit.slope = sxy / sxx;
  const double inv_p = (p == 0) ? 0.0 : 1.0 / double(p);
  fit.expected = -(double(k) + (1.0 - inv_p)) / 2.0;
  fit.rel_err = std::abs(fit.slope - fit.expected) / std::abs(fit.expected);
  return fit;
}

// Closed forms.

inline double a_integral_closed_form(double beta) {
  return std::numbers::pi / (4.0 * beta * beta * beta);
}

/// int_0^inf xi^2 / ((1 + xi^2)^2 + v^2 xi^2) dxi = pi / (2 sqrt(4 + v^2)).
inline double velocity_integral_closed_form(double v) {
  return std::numbers::pi / (2.0 * std::sqrt(4.0 + v * v));
}

/// Root of (eta/pi) * pi / (2 sqrt(4 + v^2)) = 1, i.e. the rescaled eps -> 0 speed.
inline double pulse_speed_singular_limit(double eta) {
  return eta > 4.0 ? std::sqrt(eta * eta - 16.0) / 2.0 : 0.0;
}

/// Stationary state of the rescaled model with a Dirac source.
inline double greens_function(double x, double beta = 1.0) {
  return std::exp(-std::abs(x) / beta) / (2.0 * beta);
}

/// Velocity integral of the singular rescaled model by mapped midpoint sums.
inline double velocity_integral_singular(double v) {
  // xi = u/(1-u) maps the integrand to u^2 / (D^2 + v^2 u^2 (1-u)^2), D = (1-u)^2 + u^2.
  auto f = [v](double u) {
    const double w = 1.0 - u;
    const double d = w * w + u * u;
    return u * u / (d * d + v * v * u * u * w * w);
  };
  return romberg_panels(f, uniform_breaks(0.0, 1.0, 8));
}

/// A-integral by mapped midpoint sums.
inline double a_integral(double beta) {
  const double b2 = beta * beta;
  return romberg_semi_infinite(
      [b2](double xi) {
        const double q = 1.0 + b2 * xi * xi;
        return xi * xi / (q * q);
      },
      1.0 / beta);
}

}  // namespace pulselab::oracle
