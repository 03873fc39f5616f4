#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pulselab/analytic.hpp"
#include "pulselab/dynamics.hpp"
#include "pulselab/fit.hpp"

namespace pulselab {

/// Everything a simulation needs besides initial data.
struct SimulationSetup {
  ModelParams params;
  SourceKernel kernel;
  double half_width{40.0};
  std::size_t n_points{2048};
  StepConfig step;

  Integrator integrator() const {
    return Integrator(params, kernel, SpectralGrid(half_width, n_points), step);
  }
};

/// Default box half-width for a correlation length beta.
inline double default_half_width(double beta) { return std::max(40.0, 20.0 / std::min(1.0, beta)); }

// ---- perturbations -------------------------------------------------------------

enum class PerturbationShape { none, gaussian, gradient, shift, random };

inline std::string to_string(PerturbationShape s) {
  switch (s) {
    case PerturbationShape::none: return "none";
    case PerturbationShape::gaussian: return "gaussian";
    case PerturbationShape::gradient: return "gradient";
    case PerturbationShape::shift: return "shift";
    case PerturbationShape::random: return "random";
  }
  return "none";
}

inline PerturbationShape perturbation_shape_from(const std::string& name) {
  for (auto s : {PerturbationShape::none, PerturbationShape::gaussian, PerturbationShape::gradient,
                 PerturbationShape::shift, PerturbationShape::random})
    if (to_string(s) == name) return s;
  throw ParameterError("perturbation.shape in {none, gaussian, gradient, shift, random}");
}

struct PerturbationSpec {
  PerturbationShape shape{PerturbationShape::none};
  double amplitude{0.0};
  double width{1.0};
  double offset{0.0};
  /// Smallness budget; amplitudes above it are rejected.
  double budget{0.1};
  std::uint64_t seed{0};

  void validate() const {
    if (!(width > 0.0)) throw ParameterError("perturbation.width > 0");
    if (!(budget > 0.0)) throw ParameterError("perturbation.budget > 0");
    if (!(std::abs(amplitude) <= budget))
      throw ParameterError("|perturbation.amplitude| <= perturbation.budget");
  }

  bool operator==(const PerturbationSpec&) const = default;
};

namespace detail {

// Uniform double in [0, 1) from the raw engine output; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

/// z0 added to a base state whose profile is `base` (used by the shift family).
inline Field perturbation_field(const Integrator& in, const PerturbationSpec& spec,
                                const Field& base) {
  spec.validate();
  const auto& grid = in.grid();
  const double A = spec.amplitude, w = spec.width, x0 = spec.offset;
  switch (spec.shape) {
    case PerturbationShape::none:
      return Field(grid);
    case PerturbationShape::gaussian:
      return Field::from_function(grid, [=](double x) {
        const double u = (x - x0) / w;
        return A * std::exp(-u * u);
      });
    case PerturbationShape::gradient:
      return Field::from_function(grid, [=](double x) {
        const double u = (x - x0) / w;
        return A * u * std::exp(-u * u);
      });
    case PerturbationShape::shift: {
      Field moved = base;
      moved.translate(A);
      return moved - base;
    }
    case PerturbationShape::random: {
      std::mt19937_64 rng(spec.seed);
      std::vector<double> amp(6), phase(6);
      for (std::size_t k = 0; k < amp.size(); ++k) {
        amp[k] = 2.0 * detail::unit_uniform(rng) - 1.0;
        phase[k] = 2.0 * std::numbers::pi * detail::unit_uniform(rng);
      }
      return Field::from_function(grid, [=](double x) {
        const double u = (x - x0) / w;
        double acc = 0.0;
        for (std::size_t k = 0; k < amp.size(); ++k)
          acc += amp[k] * std::cos(double(k + 1) * u + phase[k]);
        return A * acc / double(amp.size()) * std::exp(-u * u);
      });
    }
  }
  return Field(grid);
}

// ---- shared helpers -------------------------------------------------------------

using Series = std::vector<std::pair<double, double>>;

/// Default fit window: the last 40% of [t0, T].
inline FitWindow tail_window(double t0, double T) { return {t0 + 0.6 * (T - t0), T}; }

/// Least-squares slope of x_c(t) over the rows with t in [t_begin, t_end].
inline double trajectory_slope(const Trajectory& traj, double t_begin, double t_end) {
  double n = 0, mt = 0, mx = 0;
  for (const auto& r : traj)
    if (r.t >= t_begin && r.t <= t_end) {
      ++n;
      mt += r.t;
      mx += r.x_c;
    }
  if (n < 2) throw std::invalid_argument("trajectory_slope: fewer than 2 rows in the window");
  mt /= n;
  mx /= n;
  double stt = 0, stx = 0;
  for (const auto& r : traj)
    if (r.t >= t_begin && r.t <= t_end) {
      stt += (r.t - mt) * (r.t - mt);
      stx += (r.t - mt) * (r.x_c - mx);
    }
  return stx / stt;
}

// ---- pulse stability -------------------------------------------------------------

struct PulseStabilityResult {
  PulseSolution pulse;
  SimulationResult sim;
  Series z_inf;  ///< sup |s - Sbar(. - x_c)|
  Series y_dot;  ///< |v_c - x_c'|
  std::optional<DecayFit> fit_z;
  std::optional<DecayFit> fit_ydot;
  /// x_c(T) - v_c T: asymptotic phase of the translation mode.
  double phase{0.0};
  double max_z{0.0};
};

/// Exact pulse plus z0, x_c(0) = 0. Fits are skipped for a zero perturbation.
inline PulseStabilityResult pulse_stability_run(const SimulationSetup& setup,
                                                const PerturbationSpec& pert, double T,
                                                std::size_t output_stride) {
  const auto pulse = pulse_velocity(setup.params, setup.kernel);
  if (!pulse)
    throw ParameterError("pulse stability needs eta > eta* (no traveling pulse exists)");
  const Integrator in = setup.integrator();
  const double v = pulse->v_c;
  Field s0 = in.pulse_field(v, 0.0);
  s0 += perturbation_field(in, pert, s0);

  SimulationOptions opt;
  opt.T = T;
  opt.output_stride = output_stride;
  Series z_inf, y_dot;
  double max_z = 0.0;
  auto observe = [&](const SimState& s) {
    const Field z = s.field - in.pulse_field(v, s.x_c);
    const double zn = z.sup_norm();
    z_inf.emplace_back(s.t, zn);
    y_dot.emplace_back(s.t, std::abs(v - s.v_c));
    max_z = std::max(max_z, zn);
  };
  auto sim = Simulation(in, opt).run(in.make_state(std::move(s0), 0.0), observe);
  PulseStabilityResult res{*pulse, std::move(sim), std::move(z_inf), std::move(y_dot), {}, {},
                           0.0, max_z};
  res.phase = res.sim.final_state.lab_position() - v * res.sim.final_state.t;
  if (pert.shape != PerturbationShape::none && pert.amplitude != 0.0) {
    const auto w = tail_window(0.0, T);
    res.fit_z = fit_decay(res.z_inf, w, roundoff_floor(res.z_inf));
    res.fit_ydot = fit_decay(res.y_dot, w, roundoff_floor(res.y_dot));
  }
  return res;
}

// ---- stationary stability -------------------------------------------------------------

enum class StationaryStart { cold, shifted, perturbed };

struct StationaryStabilityResult {
  SimulationResult sim;
  Series residual_w1;  ///< ||s - Sbar0(. - x_bar)||_{W^{1,inf}}
  DecayFit fit;
  double x_bar{0.0};
  double final_residual{0.0};
  bool settled{false};
  std::string advisory;
};

/// x_c(0) = 0 and s0 = 0 (cold), Sbar0(. - shift) (shifted), or Sbar0 + z0 (perturbed).
inline StationaryStabilityResult stationary_stability_run(const SimulationSetup& setup,
                                                          StationaryStart start, double shift,
                                                          const PerturbationSpec& pert, double T,
                                                          std::size_t output_stride,
                                                          double settle_tol = 1e-8) {
  const Integrator in = setup.integrator();
  Field s0(in.grid());
  if (start == StationaryStart::shifted) s0 = in.stationary_field(shift);
  if (start == StationaryStart::perturbed) {
    s0 = in.stationary_field(0.0);
    s0 += perturbation_field(in, pert, s0);
  }

  // The residual needs x_bar, known only at the end: keep the output fields.
  std::vector<std::pair<double, SimState>> outputs;
  SimulationOptions opt;
  opt.T = T;
  opt.output_stride = output_stride;
  auto sim = Simulation(in, opt).run(in.make_state(std::move(s0), 0.0),
                                     [&](const SimState& s) { outputs.emplace_back(s.t, s); });
  StationaryStabilityResult res{std::move(sim), {}, {}, 0.0, 0.0, false, {}};

  const SimState& last = res.sim.final_state;
  res.x_bar = last.lab_position();
  res.settled = std::abs(last.v_c) < settle_tol;
  if (!res.settled)
    res.advisory = "x_c has not settled (|x_c'(T)| = " + std::to_string(std::abs(last.v_c)) +
                   "); extend the run";
  for (const auto& [t, s] : outputs) {
    const Field r = s.field - in.stationary_field(res.x_bar - s.offset);
    const double w1 = r.sup_norm(0) + r.sup_norm(1);
    res.residual_w1.emplace_back(t, w1);
  }
  res.final_residual = res.residual_w1.empty() ? 0.0 : res.residual_w1.back().second;
  res.fit = fit_decay(res.residual_w1, tail_window(0.0, T), roundoff_floor(res.residual_w1));
  return res;
}

// ---- bifurcation sweep -------------------------------------------------------------

struct BifurcationPoint {
  double eta{0.0};
  double eta_star{0.0};
  double v_predicted{0.0};
  double v_measured{0.0};
  bool below_threshold{false};
  bool exempt{false};  ///< within the band around eta* where no claim is made
  bool agree{false};
  std::string error;
};

struct SweepOptions {
  double T{60.0};
  std::size_t output_stride{100};
  double kick{1e-3};
  double kick_width{1.0};
  double exempt_band{0.05};
  double zero_speed_tol{1e-3};
  double speed_rel_tol{0.02};
  /// Slope of x_c is fitted over the last fraction of [0, T].
  double slope_fraction{0.2};
  unsigned threads{1};
};

/// One point: stationary state plus an odd kick, late-time slope of x_c.
inline BifurcationPoint bifurcation_point(const SimulationSetup& base, double eta,
                                          double eta_star, const SweepOptions& opt) {
  BifurcationPoint pt;
  pt.eta = eta;
  pt.eta_star = eta_star;
  try {
    SimulationSetup setup = base;
    setup.params.eta = eta;
    const auto pulse = pulse_velocity(setup.params, setup.kernel);
    pt.below_threshold = !pulse.has_value();
    pt.v_predicted = pulse ? pulse->v_c : 0.0;
    pt.exempt = std::abs(eta - eta_star) <= opt.exempt_band * eta_star;

    const Integrator in = setup.integrator();
    Field s0 = in.stationary_field(0.0);
    PerturbationSpec kick;
    kick.shape = PerturbationShape::gradient;
    kick.amplitude = opt.kick;
    kick.width = opt.kick_width;
    kick.budget = std::max(kick.budget, std::abs(opt.kick));
    s0 += perturbation_field(in, kick, s0);

    SimulationOptions so;
    so.T = opt.T;
    so.output_stride = opt.output_stride;
    const auto sim = Simulation(in, so).run(in.make_state(std::move(s0), 0.0));
    pt.v_measured = trajectory_slope(sim.trajectory, (1.0 - opt.slope_fraction) * opt.T, opt.T);

    const double speed = std::abs(pt.v_measured);
    if (pt.below_threshold)
      pt.agree = speed <= opt.zero_speed_tol;
    else
      pt.agree = std::abs(speed - pt.v_predicted) <= opt.speed_rel_tol * pt.v_predicted;
  } catch (const std::exception& e) {
    pt.error = e.what();
    pt.agree = false;
  }
  return pt;
}

/// Points run concurrently on `opt.threads` workers; results are in eta order.
inline std::vector<BifurcationPoint> bifurcation_sweep(const SimulationSetup& base,
                                                       std::vector<double> etas,
                                                       const SweepOptions& opt) {
  std::sort(etas.begin(), etas.end());
  ModelParams probe = base.params;
  const double eta_star = critical_stiffness(probe, base.kernel).eta_star;
  std::vector<BifurcationPoint> out(etas.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < etas.size(); i = next++)
      out[i] = bifurcation_point(base, etas[i], eta_star, opt);
  };
  const unsigned n = std::max(1u, std::min<unsigned>(opt.threads, unsigned(etas.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

/// The dichotomy: every non-exempt point agrees with the analytic prediction.
inline bool dichotomy_holds(const std::vector<BifurcationPoint>& pts) {
  return std::all_of(pts.begin(), pts.end(),
                     [](const BifurcationPoint& p) { return p.exempt || p.agree; });
}

}  // namespace pulselab
