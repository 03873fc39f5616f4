#pragma once

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pulselab/analytic.hpp"
#include "pulselab/experiments.hpp"
#include "pulselab/io.hpp"
#include "pulselab/oracle.hpp"

// Subcommand implementations shared by the command-line tool and the tests.

namespace pulselab::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitAssertion = 2;

struct Context {
  std::filesystem::path out{"out"};
  unsigned threads{1};
  bool verbose{false};
  std::ostream* log{&std::cerr};

  void note(const std::string& msg) const {
    if (verbose && log) *log << msg << '\n';
  }
  void warn(const std::string& msg) const {
    if (log) *log << "warning: " << msg << '\n';
  }
};

struct Outcome {
  int status{kExitOk};
  std::vector<std::string> failures;
  json diagnostics = json::object();

  void fail(std::string why) {
    status = kExitAssertion;
    failures.push_back(std::move(why));
  }
};

// ---- oracle ------------------------------------------------------------------

/// Cross-checks of fast paths against closed forms and independent quadrature.
inline std::vector<oracle::OracleReport> oracle_suite(const RunConfig& cfg) {
  using oracle::compare;
  std::vector<oracle::OracleReport> rows;
  auto tag = [](const char* name, double v) { return std::string(name) + "=" + format_double(v); };

  for (double beta : cfg.experiment.betas) {
    const double exact = oracle::a_integral_closed_form(beta);
    rows.push_back(compare("a_integral(" + tag("beta", beta) + ")", exact, a_integral(beta), 1e-8));
    rows.push_back(compare("a_integral_oracle(" + tag("beta", beta) + ")", exact,
                           oracle::a_integral(beta), 1e-8));
  }

  const auto g1 = gaussian_kernel(1.0);
  for (double xi : {0.0, 2.0})
    rows.push_back(compare("gaussian_transform(eps=1;" + tag("xi", xi) + ")",
                           oracle::fourier_by_quadrature(g1, xi), g1.fourier(xi), 1e-10));
  rows.push_back(compare(
      "two_sided_exponential_transform(xi=1)",
      oracle::fourier_by_quadrature([](double x) { return oracle::greens_function(x); }, 1.0, 60.0,
                                    {0.0}, 64)
          .real(),
      0.5, 1e-10));

  // Velocity integral of the eps -> 0 rescaled model.
  for (double v : {0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 10.0}) {
    const double closed = oracle::velocity_integral_closed_form(v);
    const double brute = oracle::velocity_integral_singular(v);
    auto f = [v](double xi) {
      const double q = 1.0 + xi * xi;
      return xi * xi / (q * q + v * v * xi * xi);
    };
    const double fast = integrate(f, 0.0, 1.0).value + integrate_to_infinity(f, 1.0).value;
    rows.push_back(compare("velocity_integral_closed_form(" + tag("v", v) + ")", brute, closed, 1e-9));
    rows.push_back(compare("velocity_integral_fast(" + tag("v", v) + ")", brute, fast, 1e-9));
  }

  // Critical stiffness against a mapped midpoint sum.
  for (double eps : {1.0, 0.1}) {
    ModelParams p = ModelParams::unit(1.0, eps);
    const auto g = gaussian_kernel(eps);
    const double integral = oracle::romberg_semi_infinite(
        [&](double xi) {
          const double q = 1.0 + xi * xi;
          return g.fourier(xi) * xi * xi / (q * q);
        },
        1.0);
    rows.push_back(compare("critical_stiffness(" + tag("eps", eps) + ")", std::numbers::pi / integral,
                           critical_stiffness(p, g).eta_star, 1e-8));
  }

  // Stationary state: Fourier quadrature against direct-space Green's convolution.
  {
    const ModelParams p = ModelParams::unit(0.0, cfg.model.epsilon);
    const auto g = gaussian_kernel(cfg.model.epsilon);
    const auto prof = stationary_profile(p, g);
    const auto conv = oracle::greens_convolution(p, g);
    double worst = 0.0, at = 0.0, ref = 0.0, fast = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double x = -5.0 + 0.1 * i;
      const double a = conv(x), b = prof(x);
      if (std::abs(a - b) >= worst) {
        worst = std::abs(a - b);
        at = x;
        ref = a;
        fast = b;
      }
    }
    rows.push_back(compare("stationary_vs_greens(worst x=" + format_double(at) + ")", ref, fast,
                           1e-8, false));
    rows.push_back(compare("stationary_peak(" + tag("eps", cfg.model.epsilon) + ")", 0.5, prof(0.0),
                           1e-3, false));
  }

  // Heat-kernel norm scaling.
  const std::vector<double> times{0.25, 0.5, 1.0, 2.0, 4.0};
  for (auto [k, p] : {std::pair{0, 0}, std::pair{1, 1}, std::pair{2, 2}}) {
    const auto fit = oracle::heat_norm_scaling(k, p, times);
    const std::string pn = p == 0 ? "inf" : std::to_string(p);
    rows.push_back(compare("heat_norm_scaling(k=" + std::to_string(k) + ";p=" + pn + ")",
                           fit.expected, fit.slope, 0.02));
  }
  return rows;
}

inline Outcome run_oracle(const RunConfig& cfg, const Context& ctx) {
  Outcome o;
  const auto rows = oracle_suite(cfg);
  CsvWriter w(ctx.out / "oracle.csv",
              {"quantity", "oracle", "fast", "abs_err", "rel_err", "tolerance", "relative", "pass"});
  for (const auto& r : rows) {
    w.row({r.quantity, r.oracle, r.fast, r.abs_err, r.rel_err, r.tolerance, r.relative, r.pass});
    if (!r.pass) o.fail("oracle mismatch: " + r.quantity);
  }
  o.diagnostics["checks"] = rows.size();
  return o;
}

// ---- threshold ------------------------------------------------------------------

struct ThresholdRow {
  double epsilon{0.0};
  double eta_star{0.0};
  double quadrature_error{0.0};
  double limit{0.0};
};

inline std::vector<ThresholdRow> threshold_table(const RunConfig& cfg) {
  std::vector<ThresholdRow> rows;
  for (double eps : cfg.experiment.epsilons) {
    ModelParams p = cfg.model;
    p.epsilon = eps;
    const auto t = critical_stiffness(p, gaussian_kernel(eps));
    rows.push_back({eps, t.eta_star, t.quadrature_error, critical_stiffness_limit(p)});
  }
  return rows;
}

/// eta* strictly decreases as epsilon decreases.
inline bool threshold_monotone(std::vector<ThresholdRow> rows) {
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.epsilon > b.epsilon; });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].eta_star < rows[i - 1].eta_star)) return false;
  return true;
}

inline Outcome run_threshold(const RunConfig& cfg, const Context& ctx) {
  Outcome o;
  const auto rows = threshold_table(cfg);
  CsvWriter w(ctx.out / "threshold.csv", {"epsilon", "eta_star", "quadrature_error", "eta_star_limit"});
  for (const auto& r : rows) w.row({r.epsilon, r.eta_star, r.quadrature_error, r.limit});
  if (!threshold_monotone(rows)) o.fail("eta* is not strictly decreasing as epsilon decreases");
  return o;
}

// ---- profiles ------------------------------------------------------------------

inline std::vector<double> profile_abscissae(const RunConfig& cfg) {
  const auto& e = cfg.experiment;
  std::vector<double> x(e.profile_points);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = -e.profile_extent + 2.0 * e.profile_extent * double(i) / double(x.size() - 1);
  return x;
}

inline Outcome run_stationary(const RunConfig& cfg, const Context& ctx) {
  Outcome o;
  const auto g = gaussian_kernel(cfg.model.epsilon);
  const auto prof = stationary_profile(cfg.model, g);
  CsvWriter w(ctx.out / "profile.csv", {"x", "s", "ds"});
  for (double x : profile_abscissae(cfg)) w.row({x, prof(x), prof.derivative(x)});
  CsvWriter s(ctx.out / "summary.csv", {"key", "value"});
  s.row({std::string("peak"), prof(0.0)});
  s.row({std::string("total"), cfg.model.alpha * cfg.model.gamma * g.mass});
  return o;
}

inline Outcome run_pulse(const RunConfig& cfg, const Context& ctx) {
  Outcome o;
  const auto g = gaussian_kernel(cfg.model.epsilon);
  CsvWriter s(ctx.out / "summary.csv", {"key", "value"});
  const auto pulse = pulse_velocity(cfg.model, g);
  s.row({std::string("eta"), cfg.model.eta});
  if (cfg.model.gamma > 0.0) s.row({std::string("eta_star"), critical_stiffness(cfg.model, g).eta_star});
  s.row({std::string("below_threshold"), !pulse.has_value()});
  if (!pulse) return o;
  const double self = -cfg.model.eta * pulse->profile.derivative(0.0);
  s.row({std::string("v_c"), pulse->v_c});
  s.row({std::string("residual"), pulse->residual});
  s.row({std::string("direction"), std::string("right")});
  s.row({std::string("self_consistency"), self - pulse->v_c});
  if (std::abs(self - pulse->v_c) > 1e-6 * std::max(1.0, pulse->v_c))
    o.fail("pulse self-consistency -eta Sbar'(0) = v_c violated");
  CsvWriter w(ctx.out / "profile.csv", {"w", "s"});
  for (double x : profile_abscissae(cfg)) w.row({x, pulse->profile(x)});
  return o;
}

// ---- simulate ------------------------------------------------------------------

/// Initial state selected by experiment.initial.
inline SimState initial_state(const RunConfig& cfg, const Integrator& in) {
  const auto& e = cfg.experiment;
  Field s0(in.grid());
  if (e.initial == "stationary" || e.initial == "kicked" || e.initial == "perturbed")
    s0 = in.stationary_field(0.0);
  if (e.initial == "shifted") s0 = in.stationary_field(e.shift);
  if (e.initial == "pulse") {
    const auto pulse = pulse_velocity(in.params(), in.kernel());
    if (!pulse) throw ConfigError("config: experiment.initial = pulse needs eta > eta*");
    s0 = in.pulse_field(pulse->v_c, 0.0);
  }
  if (e.initial == "kicked") {
    PerturbationSpec kick;
    kick.shape = PerturbationShape::gradient;
    kick.amplitude = e.kick;
    kick.budget = std::max(kick.budget, std::abs(e.kick));
    s0 += perturbation_field(in, kick, s0);
  }
  if (e.initial == "perturbed") s0 += perturbation_field(in, cfg.perturbation(), s0);
  return in.make_state(std::move(s0), 0.0);
}

inline SimulationResult simulate(const RunConfig& cfg) {
  const auto in = cfg.setup().integrator();
  SimulationOptions opt;
  opt.T = cfg.experiment.T;
  opt.output_stride = cfg.experiment.output_stride;
  opt.snapshot_times = cfg.experiment.snapshot_times;
  return Simulation(in, opt).run(initial_state(cfg, in));
}

inline json diagnostics_json(const Diagnostics& d) {
  return {{"max_mass_error", d.max_mass_error},
          {"mass_ok", d.mass_ok},
          {"max_bound_excess", d.max_bound_excess},
          {"bound_ok", d.bound_ok},
          {"max_boundary_field", d.max_boundary_field},
          {"boundary_ok", d.boundary_ok},
          {"initial_contraction", d.initial_contraction},
          {"max_picard_contraction", d.max_picard_contraction},
          {"max_picard_iters", d.max_picard_iters},
          {"substeps", d.substeps},
          {"rejected_steps", d.rejected_steps},
          {"recenterings", d.recenterings}};
}

inline void check_invariants(const Diagnostics& d, Outcome& o, const Context& ctx) {
  if (!d.mass_ok) o.fail("mass law violated (max rel. error " + format_double(d.max_mass_error) + ")");
  if (!d.bound_ok) o.fail("a-priori W^{k,inf} bound violated (excess " + format_double(d.max_bound_excess) + ")");
  if (!d.boundary_ok)
    ctx.warn("field near the box edge reached " + format_double(d.max_boundary_field) +
             " (floor 1e-10); consider a larger half_width");
}

inline Outcome run_simulate(const RunConfig& cfg, const Context& ctx) {
  Outcome o;
  const auto res = simulate(cfg);
  write_trajectory_csv(ctx.out / "trajectory.csv", res.trajectory);
  for (std::size_t k = 0; k < res.snapshots.size(); ++k)
    write_field_csv(ctx.out / ("snapshot_" + std::to_string(k) + ".csv"), res.snapshots[k]);
  o.diagnostics = diagnostics_json(res.diagnostics);
  check_invariants(res.diagnostics, o, ctx);
  return o;
}

// ---- sweep ------------------------------------------------------------------

inline SweepOptions sweep_options(const RunConfig& cfg, unsigned threads) {
  SweepOptions opt;
  opt.T = cfg.experiment.T;
  opt.output_stride = cfg.experiment.output_stride;
  opt.kick = cfg.experiment.kick;
  opt.threads = threads;
  return opt;
}

inline Outcome run_sweep(const RunConfig& cfg, const Context& ctx) {
  Outcome o;
  const auto pts = bifurcation_sweep(cfg.setup(), cfg.experiment.eta_grid,
                                     sweep_options(cfg, ctx.threads));
  CsvWriter w(ctx.out / "bifurcation.csv", {"eta", "eta_star", "v_predicted", "v_measured",
                                            "below_threshold", "exempt", "agree", "error"});
  for (const auto& p : pts)
    w.row({p.eta, p.eta_star, p.v_predicted, p.v_measured, p.below_threshold, p.exempt, p.agree,
           p.error});
  if (!dichotomy_holds(pts)) o.fail("bifurcation dichotomy violated");
  return o;
}

// ---- stability ------------------------------------------------------------------

inline void write_fit(CsvWriter& w, const std::string& name, const DecayFit& f) {
  w.row({name, f.delta, f.prefactor, f.t_begin, f.t_end, f.r_squared, f.points, f.conclusive,
         f.reason});
}

inline std::vector<std::string> fit_header() {
  return {"quantity", "delta", "prefactor", "t_begin", "t_end",
          "r_squared", "points", "conclusive", "reason"};
}

inline Outcome run_stability(const RunConfig& cfg, const Context& ctx) {
  Outcome o;
  const auto& e = cfg.experiment;
  if (e.stability == "pulse") {
    const auto r = pulse_stability_run(cfg.setup(), cfg.perturbation(), e.T, e.output_stride);
    write_trajectory_csv(ctx.out / "trajectory.csv", r.sim.trajectory);
    CsvWriter ts(ctx.out / "timeseries.csv", {"t", "z_inf", "y_dot"});
    for (std::size_t i = 0; i < r.z_inf.size(); ++i)
      ts.row({r.z_inf[i].first, r.z_inf[i].second, r.y_dot[i].second});
    CsvWriter fits(ctx.out / "fits.csv", fit_header());
    if (r.fit_z) write_fit(fits, "z_inf", *r.fit_z);
    if (r.fit_ydot) write_fit(fits, "y_dot", *r.fit_ydot);
    o.diagnostics = diagnostics_json(r.sim.diagnostics);
    o.diagnostics["v_c"] = r.pulse.v_c;
    o.diagnostics["phase"] = r.phase;
    check_invariants(r.sim.diagnostics, o, ctx);
    return o;
  }
  StationaryStart start = StationaryStart::cold;
  if (e.initial == "shifted") start = StationaryStart::shifted;
  if (e.initial == "perturbed" || e.initial == "kicked") start = StationaryStart::perturbed;
  const auto r = stationary_stability_run(cfg.setup(), start, e.shift, cfg.perturbation(), e.T,
                                          e.output_stride);
  write_trajectory_csv(ctx.out / "trajectory.csv", r.sim.trajectory);
  CsvWriter ts(ctx.out / "timeseries.csv", {"t", "residual_w1"});
  for (const auto& [t, v] : r.residual_w1) ts.row({t, v});
  CsvWriter fits(ctx.out / "fits.csv", fit_header());
  write_fit(fits, "residual_w1", r.fit);
  o.diagnostics = diagnostics_json(r.sim.diagnostics);
  o.diagnostics["x_bar"] = r.x_bar;
  o.diagnostics["settled"] = r.settled;
  o.diagnostics["final_residual"] = r.final_residual;
  if (!r.advisory.empty()) ctx.warn(r.advisory);
  check_invariants(r.sim.diagnostics, o, ctx);
  return o;
}

// ---- dispatch ------------------------------------------------------------------

/// Runs `command` (or experiment.type for "run"), writes artifacts and the manifest.
inline Outcome run_command(std::string command, RunConfig cfg, const Context& ctx) {
  if (command == "run") command = cfg.experiment.type;
  if (!experiment_types().count(command)) throw ConfigError("unknown subcommand '" + command + "'");
  cfg.experiment.type = command;
  std::filesystem::create_directories(ctx.out);
  ctx.note("running " + command + " -> " + ctx.out.string());

  Outcome o;
  if (command == "oracle") o = run_oracle(cfg, ctx);
  else if (command == "threshold") o = run_threshold(cfg, ctx);
  else if (command == "stationary") o = run_stationary(cfg, ctx);
  else if (command == "pulse") o = run_pulse(cfg, ctx);
  else if (command == "simulate") o = run_simulate(cfg, ctx);
  else if (command == "sweep") o = run_sweep(cfg, ctx);
  else if (command == "stability") o = run_stability(cfg, ctx);

  Manifest m;
  m.command = command;
  m.config = effective(cfg);
  for (const auto& entry : std::filesystem::directory_iterator(ctx.out))
    if (entry.path().extension() == ".csv") m.artifacts.push_back(entry.path().filename().string());
  std::sort(m.artifacts.begin(), m.artifacts.end());
  m.diagnostics = o.diagnostics;
  m.status = o.status == kExitOk ? "ok" : "assertion_failure";
  if (!o.failures.empty()) m.diagnostics["failures"] = o.failures;
  m.write(ctx.out);
  for (const auto& f : o.failures) ctx.warn(f);
  return o;
}

}  // namespace pulselab::app
