#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pulselab/kernel.hpp"
#include "pulselab/params.hpp"
#include "pulselab/quadrature.hpp"
#include "pulselab/spectral.hpp"
#include "pulselab/trajectory.hpp"

// Time integration of
//   alpha s_t + s - beta^2 s_xx = alpha gamma g(x - x_c),   x_c' = -eta s_x(t, x_c).
//
// The field lives in Fourier space. Over a step the source path is linear in
// time, and for a linear path the Duhamel integral of every mode is evaluated
// in closed form, so the stiff symbol (1 + beta^2 xi^2)/alpha is never
// discretized. The position is advanced by the trapezoidal (2-stage Lobatto
// collocation) rule, solved by Picard iteration on the endpoint: freeze the
// path, propagate the field, update the position, repeat.
//
// Modes above the grid band are slaved to the source: their relaxation time
// is below 1/(beta^2 K^2), so they follow the moving source adiabatically.
// Their contribution to s_x(x_c) is -v T(v) with
//   T(v) = (1/pi) int_K^inf alpha^2 gamma g^ xi^2 / ((1 + beta^2 xi^2)^2 + alpha^2 v^2 xi^2),
// which turns the position update into v (1 - eta T(v)) = -eta s_x,resolved(x_c).

namespace pulselab {

class PicardFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepConfig {
  double dt{1e-3};
  double picard_tol{1e-12};
  int picard_max_iters{30};
  /// 0: evaluate the trigonometric interpolant of s_x exactly at x_c;
  /// k > 0: barycentric interpolation of order k on the sampled s_x.
  int interpolation_order{0};
  bool subgrid_closure{true};

  void validate() const {
    if (!(dt > 0.0)) throw ParameterError("dt > 0");
    if (!(picard_tol > 0.0)) throw ParameterError("picard_tol > 0");
    if (picard_max_iters < 2) throw ParameterError("picard_max_iters >= 2");
    if (interpolation_order < 0 || interpolation_order > 16)
      throw ParameterError("0 <= interpolation_order <= 16");
  }

  bool operator==(const StepConfig&) const = default;
};

struct SimState {
  double t{0.0};
  Field field;
  double x_c{0.0};     ///< position in the current (re-centred) frame
  double v_c{0.0};     ///< -eta s_x(t, x_c), including the sub-grid part
  double offset{0.0};  ///< accumulated re-centring shift; lab position = x_c + offset

  double lab_position() const { return x_c + offset; }
};

struct StepStats {
  int iterations{0};
  double contraction{0.0};  ///< largest ratio of successive Picard corrections
};

class Integrator {
 public:
  using Complex = std::complex<double>;

  Integrator(ModelParams params, SourceKernel kernel, SpectralGrid grid, StepConfig cfg = {})
      : p_(params), g_(std::move(kernel)), grid_(std::move(grid)), cfg_(cfg) {
    p_.validate();
    cfg_.validate();
    const std::size_t modes = grid_.modes();
    rate_.resize(modes);
    forcing_.resize(modes);
    for (std::size_t j = 0; j < modes; ++j) {
      const double xi = grid_.xi(j);
      rate_[j] = (1.0 + p_.beta * p_.beta * xi * xi) / p_.alpha;
      forcing_[j] = (j + 1 < modes) ? p_.gamma * g_.fourier(xi) : 0.0;
    }
    em1_ = decay_factors(cfg_.dt);
    build_closure();
  }

  const ModelParams& params() const { return p_; }
  const SourceKernel& kernel() const { return g_; }
  const SpectralGrid& grid() const { return grid_; }
  const StepConfig& config() const { return cfg_; }

  // ---- initial data -------------------------------------------------------

  /// Band-limited stationary state centred at `center`.
  Field stationary_field(double center = 0.0) const { return pulse_field(0.0, center); }

  /// Band-limited traveling profile with speed v centred at `center`.
  Field pulse_field(double v, double center = 0.0) const {
    Field f(grid_);
    auto& c = f.coefficients();
    for (std::size_t j = 0; j + 1 < c.size(); ++j) {
      const double xi = grid_.xi(j);
      c[j] = p_.alpha * forcing_[j] /
             Complex(1.0 + p_.beta * p_.beta * xi * xi, -p_.alpha * v * xi) *
             std::polar(1.0, -xi * center);
    }
    c[0] = c[0].real();
    return f;
  }

  SimState make_state(Field field, double x_c, double t = 0.0) const {
    if (!(field.grid() == grid_)) throw std::invalid_argument("state field on a different grid");
    field.band_limit();
    SimState s{t, std::move(field), x_c, 0.0, 0.0};
    s.v_c = velocity(s.field, x_c);
    return s;
  }

  // ---- gradient and velocity ---------------------------------------------

  /// s_x of the resolved field at x.
  double gradient_at(const Field& f, double x) const {
    const double L = grid_.half_width();
    if (x < -L || x > L) throw std::out_of_range("gradient_at: x outside [-L, L]; recenter first");
    if (cfg_.interpolation_order == 0) return f.derivative_at(x);
    return interpolate_derivative(f, x, cfg_.interpolation_order);
  }

  /// Sub-grid tail T(v); zero when the kernel is resolved by the grid.
  double closure_tail(double v) const {
    double acc = 0.0;
    const double av2 = p_.alpha * p_.alpha * v * v;
    for (std::size_t k = 0; k < tail_xi_.size(); ++k) {
      const double q = tail_q_[k];
      acc += tail_w_[k] / (q * q + av2 * tail_xi_[k] * tail_xi_[k]);
    }
    return acc;
  }

  /// x_c' = -eta s_x(x_c) with the sub-grid correction.
  double velocity(const Field& f, double x) const {
    const double v_resolved = -p_.eta * gradient_at(f, x);
    if (!cfg_.subgrid_closure || tail_xi_.empty() || p_.eta == 0.0) return v_resolved;
    double v = v_resolved / (1.0 - p_.eta * closure_tail(0.0));
    for (int it = 0; it < 50; ++it) {
      const double next = v_resolved / (1.0 - p_.eta * closure_tail(v));
      const bool done = std::abs(next - v) <= 1e-15 * (1.0 + std::abs(v));
      v = next;
      if (done) break;
    }
    return v;
  }

  // ---- propagation --------------------------------------------------------

  /// Exact Duhamel update over [t, t + dt] for a source following the
  /// piecewise-linear path through `path` (equispaced in time, path.size() >= 2).
  Field propagate_field(const Field& f, double dt, std::span<const double> path) const {
    if (path.size() < 2) throw std::invalid_argument("propagate_field: need >= 2 path samples");
    const std::size_t segments = path.size() - 1;
    const double h = dt / double(segments);
    const std::vector<double> local =
        (dt == cfg_.dt * double(segments)) ? std::vector<double>{} : decay_factors(h);
    const std::vector<double>& em1 = local.empty() ? em1_ : local;
    Field out = f;
    for (std::size_t k = 0; k < segments; ++k)
      linear_segment(out.coefficients(), em1, h, path[k], (path[k + 1] - path[k]) / h);
    return out;
  }

  // ---- stepping -----------------------------------------------------------

  SimState step(const SimState& s, StepStats* stats = nullptr) const {
    return step_with(s, cfg_.dt, stats);
  }

  /// One trapezoidal step of size dt (the configured dt uses cached factors).
  SimState step_with(const SimState& s, double dt, StepStats* stats = nullptr) const {
    const double x0 = s.x_c, v0 = s.v_c;
    const std::vector<double> local = (dt == cfg_.dt) ? std::vector<double>{} : decay_factors(dt);
    const std::vector<double>& em1 = local.empty() ? em1_ : local;
    double x1 = x0 + dt * v0;
    double prev_delta = std::numeric_limits<double>::infinity();
    StepStats st;
    for (int it = 1; it <= cfg_.picard_max_iters; ++it) {
      Field f1 = s.field;
      linear_segment(f1.coefficients(), em1, dt, x0, (x1 - x0) / dt);
      const double v1 = velocity(f1, x1);
      const double x1_next = x0 + 0.5 * dt * (v0 + v1);
      const double delta = std::abs(x1_next - x1);
      if (it > 1 && prev_delta > 0.0) st.contraction = std::max(st.contraction, delta / prev_delta);
      st.iterations = it;
      if (delta <= cfg_.picard_tol) {
        if (stats) *stats = st;
        return SimState{s.t + dt, std::move(f1), x1, v1, s.offset};
      }
      prev_delta = delta;
      x1 = x1_next;
    }
    throw PicardFailure("Picard iteration did not converge in " +
                        std::to_string(cfg_.picard_max_iters) + " iterations (dt = " +
                        std::to_string(dt) + ")");
  }

  /// Shifts the field by the grid-aligned displacement nearest x_c.
  SimState recenter(const SimState& s) const {
    const double dx = grid_.dx();
    const double cells = std::round(s.x_c / dx);
    if (cells == 0.0) return s;
    SimState out = s;
    const double shift = cells * dx;
    auto& c = out.field.coefficients();
    const auto n = static_cast<long long>(grid_.size());
    const auto k = static_cast<long long>(cells);
    for (std::size_t j = 0; j < c.size(); ++j) {
      // exp(i xi_j shift) with xi_j shift = 2 pi j k / N, reduced exactly.
      const long long r = ((static_cast<long long>(j) * k) % n + n) % n;
      c[j] *= std::polar(1.0, 2.0 * std::numbers::pi * double(r) / double(n));
    }
    out.x_c = s.x_c - shift;
    out.offset = s.offset + shift;
    return out;
  }

  /// sup |d^m s| for m = 0..k over the grid.
  std::vector<double> wkinf_norms(const Field& f, int k) const {
    if (k < 0) throw std::invalid_argument("wkinf_norms: k >= 0");
    if (k > g_.smoothness_order)
      throw std::invalid_argument("wkinf_norms: k exceeds the kernel smoothness order");
    std::vector<double> out;
    for (int m = 0; m <= k; ++m) out.push_back(f.sup_norm(m));
    return out;
  }

  /// Lipschitz constant of the frozen-field trapezoid update, (dt/2) eta sup|s''|.
  double contraction_estimate(const Field& f, double dt) const {
    return 0.5 * dt * p_.eta * f.sup_norm(2);
  }

  /// eta T(0): the fraction of the wave-speed integral carried by unresolved modes.
  double closure_weight() const { return p_.eta * closure_tail(0.0); }

 private:
  std::vector<double> decay_factors(double h) const {
    std::vector<double> em1(rate_.size());
    for (std::size_t j = 0; j < rate_.size(); ++j) em1[j] = std::expm1(-rate_[j] * h);
    return em1;
  }

  // c_j <- e^{-a h} c_j + F_j e^{-i xi X0} (e^{-i xi V h} - e^{-a h}) / (a - i xi V)
  void linear_segment(std::vector<Complex>& c, const std::vector<double>& em1, double h,
                      double x_start, double velocity) const {
    const std::size_t nyq = c.size() - 1;
    c[0] = (1.0 + em1[0]) * c[0].real() - forcing_[0] * em1[0] / rate_[0];
    const double xi1 = grid_.xi(1);
    const Complex step_pos = std::polar(1.0, -xi1 * x_start);
    const Complex step_rot = std::polar(1.0, -xi1 * velocity * h);
    Complex pos = 1.0, rot = 1.0;
    for (std::size_t j = 1; j < nyq; ++j) {
      const double xi = grid_.xi(j);
      if (j % 64 == 0) {
        pos = std::polar(1.0, -xi * x_start);
        rot = std::polar(1.0, -xi * velocity * h);
      } else {
        pos *= step_pos;
        rot *= step_rot;
      }
      const Complex num = (rot - 1.0) - em1[j];
      const Complex den(rate_[j], -xi * velocity);
      c[j] = (1.0 + em1[j]) * c[j] + forcing_[j] * pos * num / den;
    }
    c[nyq] = 0.0;
  }

  void build_closure() {
    tail_xi_.clear();
    tail_q_.clear();
    tail_w_.clear();
    if (g_.is_zero() || p_.gamma == 0.0) return;
    const double lo = grid_.band_edge();
    const double hi = g_.fourier_cutoff(1e-16);
    const auto rule = FixedRule::geometric(lo, hi);
    const double a2g = p_.alpha * p_.alpha * p_.gamma;
    auto add = [&](double xi, double w) {
      tail_xi_.push_back(xi);
      tail_q_.push_back(1.0 + p_.beta * p_.beta * xi * xi);
      tail_w_.push_back(w * a2g * g_.fourier(xi) * xi * xi / std::numbers::pi);
    };
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) add(rule.nodes[k], rule.weights[k]);
    // The resolved sum is a Riemann sum ending half a cell past the last mode,
    // which falls short of the integral over [0, K] by (h^2/24) F'(K).
    const double h = grid_.xi(1), delta = h / 8.0;
    add(lo + delta, h * h / (48.0 * delta));
    add(lo - delta, -h * h / (48.0 * delta));
    if (cfg_.subgrid_closure && p_.eta * closure_tail(0.0) >= 0.5)
      throw ParameterError("grid too coarse: unresolved modes carry eta*T(0) = " +
                           std::to_string(p_.eta * closure_tail(0.0)) + " >= 0.5");
  }

  ModelParams p_;
  SourceKernel g_;
  SpectralGrid grid_;
  StepConfig cfg_;
  std::vector<double> rate_;
  std::vector<double> forcing_;
  std::vector<double> em1_;
  std::vector<double> tail_xi_, tail_q_, tail_w_;
};

// ---- driver -----------------------------------------------------------------

struct SimulationOptions {
  double T{10.0};
  std::size_t output_stride{100};
  std::vector<double> snapshot_times;
  /// |field| floor for the boundary band |x| in [0.9 L, L].
  double boundary_floor{1e-10};
  double mass_tol{1e-6};
  double bound_slack{1e-6};
  int bound_order{1};
};

struct Diagnostics {
  double max_mass_error{0.0};        ///< relative to 1 + |s_tot(0)|
  double max_bound_excess{-std::numeric_limits<double>::infinity()};
  double max_boundary_field{0.0};
  double initial_contraction{0.0};
  double max_picard_contraction{0.0};
  int max_picard_iters{0};
  int substeps{1};
  std::size_t rejected_steps{0};
  std::size_t recenterings{0};
  bool mass_ok{true};
  bool bound_ok{true};
  bool boundary_ok{true};
};

struct SimulationResult {
  Trajectory trajectory;
  std::vector<FieldSamples> snapshots;
  SimState final_state;
  Diagnostics diagnostics;
};

class Simulation {
 public:
  using Observer = std::function<void(const SimState&)>;

  Simulation(const Integrator& integrator, SimulationOptions opt)
      : in_(integrator), opt_(std::move(opt)) {}

  SimulationResult run(SimState state, const Observer& on_output = {}) const {
    SimulationResult res{{}, {}, state, {}};
    auto& diag = res.diagnostics;
    const auto& p = in_.params();
    const double dt = in_.config().dt;
    const auto steps = static_cast<std::size_t>(std::llround(opt_.T / dt));
    const double t0 = state.t;
    const double mass0 = state.field.integral();
    const auto g_norms = kernel_sup_norms(in_.kernel());
    const auto s0_norms = in_.wkinf_norms(state.field, opt_.bound_order);

    diag.initial_contraction = in_.contraction_estimate(state.field, dt);
    while (in_.contraction_estimate(state.field, dt / diag.substeps) >= 0.5 &&
           diag.substeps < 1024)
      diag.substeps *= 2;

    std::vector<double> snaps = opt_.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;

    auto record = [&](const SimState& s) {
      const double tau = s.t - t0;
      const double decay = std::exp(-tau / p.alpha);
      const double expected = decay * mass0 + (1.0 - decay) * p.alpha * p.gamma * in_.kernel().mass;
      const double mass_err = std::abs(s.field.integral() - expected) / (1.0 + std::abs(mass0));
      diag.max_mass_error = std::max(diag.max_mass_error, mass_err);
      if (mass_err > opt_.mass_tol) diag.mass_ok = false;

      const auto norms = in_.wkinf_norms(s.field, opt_.bound_order);
      for (std::size_t m = 0; m < norms.size(); ++m) {
        const double bound = decay * s0_norms[m] +
                             (1.0 - decay) * p.alpha * p.gamma * (m < 3 ? g_norms[m] : 0.0);
        const double excess = norms[m] - bound;
        diag.max_bound_excess = std::max(diag.max_bound_excess, excess);
        if (m < 3 && excess > opt_.bound_slack) diag.bound_ok = false;
      }

      const auto samples = s.field.samples();
      const double L = in_.grid().half_width();
      for (std::size_t m = 0; m < samples.size(); ++m)
        if (std::abs(in_.grid().x(m)) >= 0.9 * L)
          diag.max_boundary_field = std::max(diag.max_boundary_field, std::abs(samples[m]));
      if (diag.max_boundary_field > opt_.boundary_floor) diag.boundary_ok = false;

      TrajectoryRow row;
      row.t = s.t;
      row.x_c = s.lab_position();
      row.v_c = s.v_c;
      row.s_tot = s.field.integral();
      row.norm_inf = norms[0];
      row.norm_d1 = norms.size() > 1 ? norms[1] : s.field.sup_norm(1);
      res.trajectory.push_back(row);
      if (on_output) on_output(s);
    };

    auto snapshot_if_due = [&](const SimState& s) {
      while (next_snap < snaps.size() && snaps[next_snap] <= s.t + 0.5 * dt) {
        FieldSamples fs;
        fs.t = s.t;
        fs.s = s.field.samples();
        fs.x = in_.grid().nodes();
        for (auto& x : fs.x) x += s.offset;
        res.snapshots.push_back(std::move(fs));
        ++next_snap;
      }
    };

    const double L = in_.grid().half_width();
    record(state);
    snapshot_if_due(state);
    for (std::size_t n = 1; n <= steps; ++n) {
      state = advance(state, dt, diag.substeps, diag, 0);
      state.t = t0 + double(n) * dt;
      if (std::abs(state.x_c) > 0.5 * L) {
        state = in_.recenter(state);
        ++diag.recenterings;
      }
      if (n % opt_.output_stride == 0 || n == steps) record(state);
      snapshot_if_due(state);
    }
    res.final_state = std::move(state);
    return res;
  }

 private:
  SimState advance(const SimState& s, double dt, int substeps, Diagnostics& diag, int depth) const {
    SimState cur = s;
    const double h = dt / substeps;
    for (int k = 0; k < substeps; ++k) {
      try {
        StepStats st;
        cur = in_.step_with(cur, h, &st);
        diag.max_picard_iters = std::max(diag.max_picard_iters, st.iterations);
        diag.max_picard_contraction = std::max(diag.max_picard_contraction, st.contraction);
      } catch (const PicardFailure&) {
        if (depth >= 8) throw;
        ++diag.rejected_steps;
        cur = advance(cur, h, 2, diag, depth + 1);
      }
    }
    return cur;
  }

  const Integrator& in_;
  SimulationOptions opt_;
};

}  // namespace pulselab
