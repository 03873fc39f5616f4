#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "pulselab/kernel.hpp"

namespace pulselab {

/// Physical constants of the regularized model
///   alpha s_t + s - beta^2 s_xx = alpha gamma g(x - x_c),  x_c' = -eta s_x(x_c).
struct ModelParams {
  double alpha{1.0};    ///< relaxation time
  double beta{1.0};     ///< correlation length
  double gamma{1.0};    ///< production amplitude
  double eta{0.0};      ///< stiffness / mobility coupling
  double epsilon{1e-3}; ///< source width

  void validate() const {
    auto finite = [](double v, const char* what) {
      if (!std::isfinite(v)) throw ParameterError(std::string(what) + " must be finite");
    };
    finite(alpha, "alpha");
    finite(beta, "beta");
    finite(gamma, "gamma");
    finite(eta, "eta");
    finite(epsilon, "epsilon");
    if (!(alpha > 0.0)) throw ParameterError("alpha > 0");
    if (!(beta > 0.0)) throw ParameterError("beta > 0");
    if (!(epsilon > 0.0)) throw ParameterError("epsilon > 0");
    if (gamma < 0.0) throw ParameterError("gamma >= 0");
    if (eta < 0.0) throw ParameterError("eta >= 0");
  }

  static ModelParams unit(double eta, double epsilon = 1e-3) {
    return {1.0, 1.0, 1.0, eta, epsilon};
  }

  bool operator==(const ModelParams&) const = default;
};

/// s_l(t, x) = lambda^a s(lambda^b t, lambda^c x),  x_cl(t) = lambda^d x_c(lambda^b t).
struct ScalingExponents {
  double lambda{1.0};
  double a{0.0};
  double b{0.0};
  double c{0.0};
  double d{0.0};

  double pow(double exponent) const { return std::pow(lambda, exponent); }
  bool is_identity() const { return a == 0.0 && b == 0.0 && c == 0.0 && d == 0.0; }
};

/// The normalized one-parameter model: alpha = beta = gamma = 1, stiffness eta_r,
/// and the dilated kernel g(beta z).
struct RescaledParams {
  double eta_r{0.0};
  SourceKernel kernel;
  bool degenerate{false};
  std::string note;

  ModelParams model(double epsilon_hint = 1e-3) const {
    return {1.0, 1.0, 1.0, eta_r, epsilon_hint};
  }
};

inline std::pair<RescaledParams, ScalingExponents> rescale(const ModelParams& p,
                                                           const SourceKernel& g) {
  p.validate();
  ScalingExponents ex;
  RescaledParams r;
  // Any lambda != 1 works; e keeps the exponents as plain logarithms.
  ex.lambda = std::exp(1.0);
  ex.b = std::log(p.alpha);
  ex.c = std::log(p.beta);
  ex.d = -ex.c;
  if (p.gamma == 0.0) {
    ex.a = 0.0;
    r.eta_r = 0.0;
    r.kernel = zero_kernel();
    r.degenerate = true;
    r.note = "degenerate: zero production";
    return {r, ex};
  }
  ex.a = -std::log(p.gamma * p.alpha);
  r.eta_r = p.eta * p.alpha * p.alpha * p.gamma / (p.beta * p.beta);
  r.kernel = dilated(g, p.beta);
  return {r, ex};
}

inline std::pair<RescaledParams, ScalingExponents> rescale(const ModelParams& p) {
  p.validate();
  return rescale(p, gaussian_kernel(p.epsilon));
}

}  // namespace pulselab
