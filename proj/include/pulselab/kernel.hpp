#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pulselab {

/// Thrown when a physical parameter leaves its admissible domain.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// max(|g|, |g'|, |g''|) <= M exp(-m z^2) for all z.
struct DecayCertificate {
  double M{0.0};
  double m{0.0};
};

/// Even, non-negative production profile together with its Fourier transform
/// (convention f^(xi) = int f(x) exp(-i x xi) dx, real because f is even).
struct SourceKernel {
  std::string name;
  std::function<double(double)> profile;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  std::function<double(double)> fourier;
  /// Frequency beyond which |fourier| stays below the given tolerance.
  std::function<double(double)> fourier_cutoff;
  double mass{0.0};
  DecayCertificate certificate;
  int smoothness_order{0};

  bool is_zero() const { return mass == 0.0 && certificate.M == 0.0; }

  /// Radius beyond which the certificate bounds the profile by tol.
  double support_radius(double tol) const {
    if (certificate.M <= tol) return 0.0;
    return std::sqrt(std::log(certificate.M / tol) / certificate.m);
  }
};

/// g(x) = exp(-x^2/eps^2) / (eps sqrt(pi)), unit mass, fourier exp(-eps^2 xi^2/4).
inline SourceKernel gaussian_kernel(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw ParameterError("epsilon > 0 (got " + std::to_string(epsilon) + ")");
  const double e = epsilon;
  const double norm = 1.0 / (e * std::sqrt(std::numbers::pi));
  SourceKernel k;
  k.name = "gaussian";
  k.profile = [e, norm](double x) { return norm * std::exp(-x * x / (e * e)); };
  k.d1 = [e, norm](double x) {
    return -2.0 * x / (e * e) * norm * std::exp(-x * x / (e * e));
  };
  k.d2 = [e, norm](double x) {
    const double u = x * x / (e * e);
    return (4.0 * u - 2.0) / (e * e) * norm * std::exp(-u);
  };
  k.fourier = [e](double xi) { return std::exp(-e * e * xi * xi / 4.0); };
  k.fourier_cutoff = [e](double tol) {
    return tol >= 1.0 ? 0.0 : 2.0 * std::sqrt(std::log(1.0 / tol)) / e;
  };
  k.mass = 1.0;
  // m = 1/(2 eps^2); the polynomial factors of g' and g'' peak at u = 1 and
  // u = 5/2 respectively (u = z^2/eps^2).
  const double M = std::max({1.0 / e, 2.0 * std::exp(-0.5) / (e * e),
                             8.0 * std::exp(-1.25) / (e * e * e)}) /
                   std::sqrt(std::numbers::pi);
  k.certificate = {M * (1.0 + 1e-12), 0.5 / (e * e)};
  k.smoothness_order = 64;
  return k;
}

inline SourceKernel zero_kernel() {
  SourceKernel k;
  k.name = "zero";
  auto zero = [](double) { return 0.0; };
  k.profile = zero;
  k.d1 = zero;
  k.d2 = zero;
  k.fourier = zero;
  k.fourier_cutoff = zero;
  k.mass = 0.0;
  k.certificate = {0.0, 1.0};
  k.smoothness_order = 64;
  return k;
}

/// z -> g(s z). Mass and transform follow the substitution; no renormalization.
inline SourceKernel dilated(const SourceKernel& g, double s) {
  if (!(s > 0.0)) throw ParameterError("dilation factor > 0");
  if (g.is_zero()) return g;
  SourceKernel k;
  k.name = g.name + (s == 1.0 ? "" : "_dilated");
  k.profile = [p = g.profile, s](double z) { return p(s * z); };
  k.d1 = [p = g.d1, s](double z) { return s * p(s * z); };
  k.d2 = [p = g.d2, s](double z) { return s * s * p(s * z); };
  k.fourier = [f = g.fourier, s](double xi) { return f(xi / s) / s; };
  k.fourier_cutoff = [c = g.fourier_cutoff, s](double tol) {
    return s * c(tol * s);
  };
  k.mass = g.mass / s;
  k.certificate = {g.certificate.M * std::max({1.0, s, s * s}),
                   g.certificate.m * s * s};
  k.smoothness_order = g.smoothness_order;
  return k;
}

/// Sup norms of g, g', g'' sampled over the certified support.
inline std::array<double, 3> kernel_sup_norms(const SourceKernel& g,
                                              std::size_t samples = 200001) {
  std::array<double, 3> out{0.0, 0.0, 0.0};
  if (g.is_zero()) return out;
  const double R = std::max(g.support_radius(1e-40 * g.certificate.M), 1e-12);
  for (std::size_t i = 0; i < samples; ++i) {
    const double z = -R + 2.0 * R * double(i) / double(samples - 1);
    out[0] = std::max(out[0], std::abs(g.profile(z)));
    out[1] = std::max(out[1], std::abs(g.d1(z)));
    out[2] = std::max(out[2], std::abs(g.d2(z)));
  }
  return out;
}

struct KernelCheck {
  bool even{true};
  bool nonnegative{true};
  bool certificate_holds{true};
  double fourier_mass_error{0.0};
  std::string detail;
  bool ok(double mass_tol = 1e-12) const {
    return even && nonnegative && certificate_holds &&
           fourier_mass_error <= mass_tol;
  }
};

/// Sampled check of the kernel invariants at the given points.
inline KernelCheck check_kernel(const SourceKernel& g,
                                const std::vector<double>& points) {
  KernelCheck c;
  c.fourier_mass_error = std::abs(g.fourier(0.0) - g.mass);
  for (double z : points) {
    const double p = g.profile(z);
    const double scale = std::max(std::abs(p), 1e-300);
    if (std::abs(p - g.profile(-z)) > 1e-14 * scale) {
      c.even = false;
      c.detail = "profile not even at z=" + std::to_string(z);
    }
    if (p < 0.0) {
      c.nonnegative = false;
      c.detail = "negative profile at z=" + std::to_string(z);
    }
    if (std::abs(g.fourier(z) - g.fourier(-z)) > 1e-14) c.even = false;
    const double bound = g.certificate.M * std::exp(-g.certificate.m * z * z);
    const double worst =
        std::max({std::abs(p), std::abs(g.d1(z)), std::abs(g.d2(z))});
    if (worst > bound * (1.0 + 1e-12) + 1e-300) {
      c.certificate_holds = false;
      c.detail = "decay certificate violated at z=" + std::to_string(z);
    }
  }
  return c;
}

}  // namespace pulselab
