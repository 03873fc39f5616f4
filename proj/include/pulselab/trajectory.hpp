#pragma once

#include <vector>

#include "pulselab/params.hpp"

namespace pulselab {

struct TrajectoryRow {
  double t{0.0};
  double x_c{0.0};
  double v_c{0.0};
  double s_tot{0.0};
  double norm_inf{0.0};
  double norm_d1{0.0};  ///< sup |d/dx s|; the W^{1,inf} norm is norm_inf + norm_d1

  double norm_w1() const { return norm_inf + norm_d1; }
};

using Trajectory = std::vector<TrajectoryRow>;

/// Point samples of a field at one instant.
struct FieldSamples {
  double t{0.0};
  std::vector<double> x;
  std::vector<double> s;
};

namespace detail {

struct TrajectoryScales {
  double t, x, v, s_tot, s, ds;
};

// Factors taking rescaled quantities to physical ones.
inline TrajectoryScales physical_scales(const ScalingExponents& ex) {
  return {ex.pow(ex.b),           ex.pow(-ex.d),         ex.pow(-ex.d - ex.b),
          ex.pow(-ex.a + ex.c),   ex.pow(-ex.a),         ex.pow(-ex.a - ex.c)};
}

inline TrajectoryRow scale_row(const TrajectoryRow& r, const TrajectoryScales& k,
                               bool inverse) {
  auto f = [inverse](double v, double s) { return inverse ? v / s : v * s; };
  return {f(r.t, k.t),         f(r.x_c, k.x),           f(r.v_c, k.v),
          f(r.s_tot, k.s_tot), f(r.norm_inf, k.s),      f(r.norm_d1, k.ds)};
}

}  // namespace detail

/// Maps a trajectory of the normalized model back to physical variables:
/// t = lambda^b t_r, x_c(t) = lambda^{-d} x_cl(lambda^{-b} t), s = lambda^{-a} s_l.
inline Trajectory unscale_trajectory(const Trajectory& rescaled,
                                     const ScalingExponents& ex) {
  const auto k = detail::physical_scales(ex);
  Trajectory out;
  out.reserve(rescaled.size());
  for (const auto& r : rescaled) out.push_back(detail::scale_row(r, k, false));
  return out;
}

/// Inverse of unscale_trajectory.
inline Trajectory rescale_trajectory(const Trajectory& physical,
                                     const ScalingExponents& ex) {
  const auto k = detail::physical_scales(ex);
  Trajectory out;
  out.reserve(physical.size());
  for (const auto& r : physical) out.push_back(detail::scale_row(r, k, true));
  return out;
}

inline FieldSamples unscale_field(const FieldSamples& rescaled,
                                  const ScalingExponents& ex) {
  const auto k = detail::physical_scales(ex);
  FieldSamples out{rescaled.t * k.t, rescaled.x, rescaled.s};
  for (auto& x : out.x) x *= ex.pow(ex.c);
  for (auto& s : out.s) s *= k.s;
  return out;
}

inline FieldSamples rescale_field(const FieldSamples& physical,
                                  const ScalingExponents& ex) {
  const auto k = detail::physical_scales(ex);
  FieldSamples out{physical.t / k.t, physical.x, physical.s};
  for (auto& x : out.x) x /= ex.pow(ex.c);
  for (auto& s : out.s) s /= k.s;
  return out;
}

}  // namespace pulselab
