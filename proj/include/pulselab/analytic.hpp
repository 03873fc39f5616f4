#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>

#include "pulselab/kernel.hpp"
#include "pulselab/params.hpp"
#include "pulselab/quadrature.hpp"
#include "pulselab/roots.hpp"

// Exact stationary and traveling-pulse states of the regularized model, the
// implicit wave-speed relation and the critical stiffness.

namespace pulselab {

namespace analytic {

/// |fourier| is below this beyond the truncation frequency.
inline constexpr double kFourierTailTol = 1e-13;
inline constexpr double kVelocityTol = 1e-13;

inline double truncation_frequency(const SourceKernel& g) {
  return g.fourier_cutoff(kFourierTailTol);
}

inline QuadOptions options_for(double x) {
  QuadOptions opt;
  if (x != 0.0) opt.max_panel = 8.0 * std::numbers::pi / std::abs(x);
  return opt;
}

inline void require_converged(const QuadResult& r, const char* what) {
  if (!r.converged)
    throw QuadratureError(std::string(what) + ": quadrature did not converge (error estimate " +
                              std::to_string(r.error) + ")",
                          r);
}

}  // namespace analytic

/// int_lo^inf alpha^2 gamma g^(xi) xi^2 / ((1 + beta^2 xi^2)^2 + alpha^2 v^2 xi^2) dxi
inline QuadResult velocity_integral(const ModelParams& p, const SourceKernel& g, double v,
                                    double lo = 0.0) {
  const double a2g = p.alpha * p.alpha * p.gamma;
  const double b2 = p.beta * p.beta;
  const double av2 = p.alpha * p.alpha * v * v;
  auto f = [&](double xi) {
    const double q = 1.0 + b2 * xi * xi;
    return a2g * g.fourier(xi) * xi * xi / (q * q + av2 * xi * xi);
  };
  const double hi = analytic::truncation_frequency(g);
  if (!(hi > lo)) return {};
  auto breaks = frequency_breaks(1.0 / p.beta, hi);
  std::erase_if(breaks, [lo](double b) { return b <= lo; });
  breaks.insert(breaks.begin(), lo);
  return integrate_panels(f, breaks);
}

/// LHS(v) - 1 of the wave-speed relation (eta/pi) * velocity_integral = 1.
inline double velocity_residual(const ModelParams& p, const SourceKernel& g, double v) {
  if (v < 0.0) throw ParameterError("v >= 0");
  const auto r = velocity_integral(p, g, v);
  analytic::require_converged(r, "velocity_residual");
  return p.eta / std::numbers::pi * r.value - 1.0;
}

struct ThresholdResult {
  double eta_star{0.0};
  double quadrature_error{0.0};
};

/// eta* = (pi / (alpha^2 gamma)) / int_0^inf g^ xi^2 / (1 + beta^2 xi^2)^2.
inline ThresholdResult critical_stiffness(const ModelParams& p, const SourceKernel& g) {
  p.validate();
  if (p.gamma == 0.0 || g.is_zero())
    throw ParameterError("critical stiffness needs gamma > 0 and a nonzero kernel");
  const auto r = velocity_integral(p, g, 0.0);
  analytic::require_converged(r, "critical_stiffness");
  ThresholdResult t;
  t.eta_star = std::numbers::pi / r.value;
  t.quadrature_error = t.eta_star * r.error / r.value;
  return t;
}

/// The eps -> 0 limit 4 beta^3 / (alpha^2 gamma).
inline double critical_stiffness_limit(const ModelParams& p) {
  return 4.0 * p.beta * p.beta * p.beta / (p.alpha * p.alpha * p.gamma);
}

/// A = int_0^inf xi^2 / (1 + beta^2 xi^2)^2 dxi.
inline double a_integral(double beta) {
  if (!(beta > 0.0)) throw ParameterError("beta > 0");
  const double b2 = beta * beta;
  auto f = [b2](double xi) {
    const double q = 1.0 + b2 * xi * xi;
    return xi * xi / (q * q);
  };
  auto r = integrate_to_infinity(f, 1.0 / beta);
  auto head = integrate(f, 0.0, 1.0 / beta);
  return head.value + r.value;
}

/// Sbar_0(x) = (alpha gamma / 2 pi) int g^(xi) e^{i x xi} / (1 + beta^2 xi^2) dxi.
struct StationaryProfile {
  ModelParams params;
  SourceKernel kernel;
  double center{0.0};

  std::complex<double> fourier(double xi) const {
    return params.alpha * params.gamma * kernel.fourier(xi) /
           (1.0 + params.beta * params.beta * xi * xi) *
           std::exp(std::complex<double>(0.0, -xi * center));
  }

  double operator()(double x) const { return evaluate(x - center, false); }
  double derivative(double x) const { return evaluate(x - center, true); }

 private:
  double evaluate(double y, bool derivative) const {
    if (kernel.is_zero() || params.gamma == 0.0) return 0.0;
    const double b2 = params.beta * params.beta;
    auto f = [&](double xi) {
      const double base = kernel.fourier(xi) / (1.0 + b2 * xi * xi);
      return derivative ? -base * xi * std::sin(y * xi) : base * std::cos(y * xi);
    };
    const auto r = integrate_panels(
        f, frequency_breaks(1.0 / params.beta, analytic::truncation_frequency(kernel)),
        analytic::options_for(y));
    analytic::require_converged(r, "stationary_profile");
    return params.alpha * params.gamma / std::numbers::pi * r.value;
  }
};

inline StationaryProfile stationary_profile(const ModelParams& p, const SourceKernel& g,
                                            double center = 0.0) {
  p.validate();
  return {p, g, center};
}

/// Traveling profile Sbar(w), w = x - center - v t, with transform
/// alpha gamma g^ / (1 + beta^2 xi^2 - i alpha v xi).
struct PulseProfile {
  ModelParams params;
  SourceKernel kernel;
  double v{0.0};
  double center{0.0};

  std::complex<double> fourier(double xi) const {
    using namespace std::complex_literals;
    return params.alpha * params.gamma * kernel.fourier(xi) /
           (1.0 + params.beta * params.beta * xi * xi - 1i * params.alpha * v * xi) *
           std::exp(std::complex<double>(0.0, -xi * center));
  }

  double operator()(double w) const { return evaluate(w - center, false); }
  double derivative(double w) const { return evaluate(w - center, true); }

 private:
  double evaluate(double y, bool derivative) const {
    if (kernel.is_zero() || params.gamma == 0.0) return 0.0;
    const double b2 = params.beta * params.beta;
    const double av = params.alpha * v;
    auto f = [&](double xi) {
      const double q = 1.0 + b2 * xi * xi;
      const double den = q * q + av * av * xi * xi;
      const double c = std::cos(y * xi), s = std::sin(y * xi);
      const double num = derivative ? -q * xi * s - av * xi * xi * c : q * c - av * xi * s;
      return kernel.fourier(xi) * num / den;
    };
    const auto r = integrate_panels(
        f, frequency_breaks(1.0 / params.beta, analytic::truncation_frequency(kernel)),
        analytic::options_for(y));
    analytic::require_converged(r, "pulse_profile");
    return params.alpha * params.gamma / std::numbers::pi * r.value;
  }
};

inline PulseProfile pulse_profile(const ModelParams& p, const SourceKernel& g, double v,
                                  double center = 0.0) {
  p.validate();
  return {p, g, v, center};
}

enum class Direction { right, left };

struct PulseSolution {
  double v_c{0.0};
  PulseProfile profile;
  Direction direction{Direction::right};
  double residual{0.0};

  /// Left-moving copy: x -> -x.
  PulseSolution reflected() const {
    PulseSolution s = *this;
    s.direction = direction == Direction::right ? Direction::left : Direction::right;
    s.profile.v = -profile.v;
    s.profile.center = -profile.center;
    return s;
  }
};

/// Positive wave speed if eta > eta*, otherwise nullopt (only v = 0 exists).
inline std::optional<PulseSolution> pulse_velocity(const ModelParams& p, const SourceKernel& g) {
  p.validate();
  if (p.gamma == 0.0 || g.is_zero() || p.eta == 0.0) return std::nullopt;
  auto residual = [&](double v) { return velocity_residual(p, g, v); };
  if (residual(0.0) <= 0.0) return std::nullopt;
  const auto root = bisect_decreasing(residual, 0.0, 1.0, analytic::kVelocityTol);
  PulseSolution s;
  s.v_c = root.root;
  s.profile = pulse_profile(p, g, s.v_c);
  s.residual = residual(s.v_c);
  return s;
}

}  // namespace pulselab
