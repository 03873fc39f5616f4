#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "pulselab/experiments.hpp"

// Strict JSON run configuration, CSV writing and run manifests.

#ifndef PULSELAB_VERSION
#define PULSELAB_VERSION "0.1.0"
#endif

namespace pulselab {

using json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string type{"simulate"};
  double T{10.0};
  std::size_t output_stride{100};
  std::vector<double> snapshot_times{};
  /// cold | stationary | pulse | kicked | shifted | perturbed
  std::string initial{"cold"};
  double shift{0.3};
  double kick{1e-3};
  /// pulse | stationary
  std::string stability{"pulse"};
  PerturbationSpec perturbation{};
  std::vector<double> eta_grid{2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0};
  std::vector<double> epsilons{1.0, 0.1, 0.01, 0.001};
  std::vector<double> betas{1.0, 2.0, 10.0};
  double profile_extent{10.0};
  std::size_t profile_points{201};

  bool operator==(const ExperimentConfig&) const = default;
};

struct RunConfig {
  ModelParams model{1.0, 1.0, 1.0, 5.0, 1e-3};
  /// 0 selects max(40, 20 / min(1, beta)).
  double half_width{0.0};
  std::size_t n_points{2048};
  StepConfig step{};
  ExperimentConfig experiment{};
  std::string output{"out"};
  std::uint64_t seed{0};

  bool operator==(const RunConfig&) const = default;

  double effective_half_width() const {
    return half_width > 0.0 ? half_width : default_half_width(model.beta);
  }

  SimulationSetup setup() const {
    return {model, gaussian_kernel(model.epsilon), effective_half_width(), n_points, step};
  }

  PerturbationSpec perturbation() const {
    PerturbationSpec p = experiment.perturbation;
    p.seed = seed;
    return p;
  }
};

inline const std::set<std::string>& experiment_types() {
  static const std::set<std::string> t{"stationary", "pulse",     "threshold", "simulate",
                                       "sweep",      "stability", "oracle"};
  return t;
}

namespace detail {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config: '" + where() + "' must be an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) throw ConfigError("config: unknown key '" + key(k) + "'");
  }

  bool has(const char* k) const { return j_.contains(k); }
  Reader child(const char* k) const { return Reader(j_.at(k), key(k)); }

  void number(const char* k, double& out) const {
    if (!has(k)) return;
    const auto& v = j_.at(k);
    if (!v.is_number()) throw type_error(k, "a number");
    out = v.get<double>();
  }
  template <class Int>
  void integer(const char* k, Int& out) const {
    if (!has(k)) return;
    const auto& v = j_.at(k);
    if (!v.is_number_integer()) throw type_error(k, "an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (v.is_number_unsigned()) {
        out = v.get<Int>();
        return;
      }
      if (v.get<long long>() < 0) throw ConfigError("config: " + key(k) + " >= 0");
    }
    out = v.get<Int>();
  }
  void boolean(const char* k, bool& out) const {
    if (!has(k)) return;
    if (!j_.at(k).is_boolean()) throw type_error(k, "a boolean");
    out = j_.at(k).get<bool>();
  }
  void string(const char* k, std::string& out) const {
    if (!has(k)) return;
    if (!j_.at(k).is_string()) throw type_error(k, "a string");
    out = j_.at(k).get<std::string>();
  }
  void numbers(const char* k, std::vector<double>& out) const {
    if (!has(k)) return;
    const auto& v = j_.at(k);
    if (!v.is_array()) throw type_error(k, "an array of numbers");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number()) throw type_error(k, "an array of numbers");
      out.push_back(e.get<double>());
    }
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }
  ConfigError type_error(const char* k, const char* what) const {
    return ConfigError("config: '" + key(k) + "' must be " + what);
  }

  const json& j_;
  std::string path_;
};

inline void require(bool ok, const std::string& constraint) {
  if (!ok) throw ConfigError("config: constraint violated: " + constraint);
}

}  // namespace detail

/// Checks every constraint; messages name the key and the violated constraint.
inline void validate(const RunConfig& c) {
  try {
    c.model.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config: constraint violated: model.") + e.what());
  }
  try {
    c.step.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config: constraint violated: step.") + e.what());
  }
  try {
    c.experiment.perturbation.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config: constraint violated: experiment.") + e.what());
  }
  using detail::require;
  require(c.half_width >= 0.0, "grid.half_width >= 0 (0 selects the default)");
  require(c.n_points >= 16 && (c.n_points & (c.n_points - 1)) == 0,
          "grid.n_points is a power of two >= 16");
  const auto& e = c.experiment;
  require(experiment_types().count(e.type) == 1,
          "experiment.type in {stationary, pulse, threshold, simulate, sweep, stability, oracle}");
  require(e.T > 0.0, "experiment.T > 0");
  require(e.output_stride >= 1, "experiment.output_stride >= 1");
  for (double t : e.snapshot_times)
    require(t >= 0.0 && t <= e.T, "experiment.snapshot_times in [0, T]");
  static const std::set<std::string> starts{"cold",    "stationary", "pulse",
                                            "kicked",  "shifted",    "perturbed"};
  require(starts.count(e.initial) == 1,
          "experiment.initial in {cold, stationary, pulse, kicked, shifted, perturbed}");
  require(e.stability == "pulse" || e.stability == "stationary",
          "experiment.stability in {pulse, stationary}");
  require(std::isfinite(e.shift), "experiment.shift finite");
  require(std::isfinite(e.kick), "experiment.kick finite");
  for (double v : e.eta_grid) require(v >= 0.0, "experiment.eta_grid entries >= 0");
  for (double v : e.epsilons) require(v > 0.0, "experiment.epsilons entries > 0");
  for (double v : e.betas) require(v > 0.0, "experiment.betas entries > 0");
  require(e.profile_extent > 0.0, "experiment.profile_extent > 0");
  require(e.profile_points >= 2, "experiment.profile_points >= 2");
  require(!c.output.empty(), "output non-empty");
}

inline RunConfig config_from_json(const json& root) {
  RunConfig c;
  detail::Reader r(root, "");
  r.allow({"model", "grid", "step", "experiment", "output", "seed"});
  if (r.has("model")) {
    auto m = r.child("model");
    m.allow({"alpha", "beta", "gamma", "eta", "epsilon"});
    m.number("alpha", c.model.alpha);
    m.number("beta", c.model.beta);
    m.number("gamma", c.model.gamma);
    m.number("eta", c.model.eta);
    m.number("epsilon", c.model.epsilon);
  }
  if (r.has("grid")) {
    auto g = r.child("grid");
    g.allow({"half_width", "n_points"});
    g.number("half_width", c.half_width);
    g.integer("n_points", c.n_points);
  }
  if (r.has("step")) {
    auto s = r.child("step");
    s.allow({"dt", "picard_tol", "picard_max_iters", "interpolation_order", "subgrid_closure"});
    s.number("dt", c.step.dt);
    s.number("picard_tol", c.step.picard_tol);
    s.integer("picard_max_iters", c.step.picard_max_iters);
    s.integer("interpolation_order", c.step.interpolation_order);
    s.boolean("subgrid_closure", c.step.subgrid_closure);
  }
  if (r.has("experiment")) {
    auto e = r.child("experiment");
    auto& x = c.experiment;
    e.allow({"type", "T", "output_stride", "snapshot_times", "initial", "shift", "kick",
             "stability", "perturbation", "eta_grid", "epsilons", "betas", "profile_extent",
             "profile_points"});
    e.string("type", x.type);
    e.number("T", x.T);
    e.integer("output_stride", x.output_stride);
    e.numbers("snapshot_times", x.snapshot_times);
    e.string("initial", x.initial);
    e.number("shift", x.shift);
    e.number("kick", x.kick);
    e.string("stability", x.stability);
    if (e.has("perturbation")) {
      auto p = e.child("perturbation");
      p.allow({"shape", "amplitude", "width", "offset", "budget"});
      std::string shape = to_string(x.perturbation.shape);
      p.string("shape", shape);
      try {
        x.perturbation.shape = perturbation_shape_from(shape);
      } catch (const ParameterError& err) {
        throw ConfigError(std::string("config: constraint violated: experiment.") + err.what());
      }
      p.number("amplitude", x.perturbation.amplitude);
      p.number("width", x.perturbation.width);
      p.number("offset", x.perturbation.offset);
      p.number("budget", x.perturbation.budget);
    }
    e.numbers("eta_grid", x.eta_grid);
    e.numbers("epsilons", x.epsilons);
    e.numbers("betas", x.betas);
    e.number("profile_extent", x.profile_extent);
    e.integer("profile_points", x.profile_points);
  }
  r.string("output", c.output);
  r.integer("seed", c.seed);
  validate(c);
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

/// The effective configuration, every field explicit (half_width resolved).
inline json to_json(const RunConfig& c) {
  const auto& e = c.experiment;
  const auto& p = e.perturbation;
  json j;
  j["model"] = {{"alpha", c.model.alpha},
                {"beta", c.model.beta},
                {"gamma", c.model.gamma},
                {"eta", c.model.eta},
                {"epsilon", c.model.epsilon}};
  j["grid"] = {{"half_width", c.effective_half_width()}, {"n_points", c.n_points}};
  j["step"] = {{"dt", c.step.dt},
               {"picard_tol", c.step.picard_tol},
               {"picard_max_iters", c.step.picard_max_iters},
               {"interpolation_order", c.step.interpolation_order},
               {"subgrid_closure", c.step.subgrid_closure}};
  j["experiment"] = {{"type", e.type},
                     {"T", e.T},
                     {"output_stride", e.output_stride},
                     {"snapshot_times", e.snapshot_times},
                     {"initial", e.initial},
                     {"shift", e.shift},
                     {"kick", e.kick},
                     {"stability", e.stability},
                     {"perturbation",
                      {{"shape", to_string(p.shape)},
                       {"amplitude", p.amplitude},
                       {"width", p.width},
                       {"offset", p.offset},
                       {"budget", p.budget}}},
                     {"eta_grid", e.eta_grid},
                     {"epsilons", e.epsilons},
                     {"betas", e.betas},
                     {"profile_extent", e.profile_extent},
                     {"profile_points", e.profile_points}};
  j["output"] = c.output;
  j["seed"] = c.seed;
  return j;
}

/// Same configuration with half_width resolved, as it appears in a manifest.
inline RunConfig effective(RunConfig c) {
  c.half_width = c.effective_half_width();
  return c;
}

// ---- CSV --------------------------------------------------------------------

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  using Cell = std::variant<double, long long, std::size_t, bool, std::string>;

  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
    write_line(header);
  }

  void row(std::initializer_list<Cell> cells) {
    std::vector<std::string> text;
    for (const auto& c : cells) text.push_back(to_text(c));
    write_line(text);
  }

  const std::filesystem::path& path() const { return path_; }

  static std::string to_text(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>)
            return format_double(v);
          else if constexpr (std::is_same_v<T, bool>)
            return v ? "true" : "false";
          else if constexpr (std::is_same_v<T, std::string>)
            return v;
          else
            return std::to_string(v);
        },
        c);
  }

 private:
  void write_line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  CsvWriter w(path, {"t", "x_c", "v_c", "s_tot", "norm_inf", "norm_w1"});
  for (const auto& r : traj) w.row({r.t, r.x_c, r.v_c, r.s_tot, r.norm_inf, r.norm_w1()});
}

inline void write_field_csv(const std::filesystem::path& path, const FieldSamples& f) {
  CsvWriter w(path, {"x", "s"});
  for (std::size_t i = 0; i < f.x.size(); ++i) w.row({f.x[i], f.s[i]});
}

// ---- manifest -----------------------------------------------------------------

struct Manifest {
  std::string command;
  RunConfig config;
  std::vector<std::string> artifacts;
  json diagnostics = json::object();
  std::string status{"ok"};

  json to_json_value() const {
    json j;
    j["code_version"] = PULSELAB_VERSION;
    j["command"] = command;
    j["status"] = status;
    j["config"] = to_json(config);
    j["tolerances"] = {{"velocity_root", analytic::kVelocityTol},
                       {"fourier_tail", analytic::kFourierTailTol},
                       {"picard_tol", config.step.picard_tol},
                       {"mass_law_rel", 1e-6},
                       {"a_priori_slack", 1e-6},
                       {"boundary_floor", 1e-10},
                       {"fit_clip", kFitClip},
                       {"fit_r2_conclusive", kConclusiveR2}};
    j["seed"] = config.seed;
    j["artifacts"] = artifacts;
    j["diagnostics"] = diagnostics;
    return j;
  }

  void write(const std::filesystem::path& dir) const {
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest in '" + dir.string() + "'");
    out << to_json_value().dump(2) << '\n';
  }
};

/// Parses the config block of a manifest file.
inline RunConfig config_from_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("manifest: cannot open '" + path.string() + "'");
  const json j = json::parse(in);
  return config_from_json(j.at("config"));
}

}  // namespace pulselab
