// Start from the stationary profile with a small odd kick and watch a pulse emerge.
#include <cstdio>

#include "pulselab.hpp"

int main(int argc, char** argv) {
  using namespace pulselab;
  const double eta = argc > 1 ? std::stod(argv[1]) : 5.0;

  SimulationSetup setup;
  setup.params = ModelParams::unit(eta, 1e-3);
  setup.kernel = gaussian_kernel(1e-3);
  const auto in = setup.integrator();

  Field s0 = in.stationary_field();
  PerturbationSpec kick;
  kick.shape = PerturbationShape::gradient;
  kick.amplitude = 1e-3;
  s0 += perturbation_field(in, kick, s0);

  SimulationOptions opt;
  opt.T = 40.0;
  opt.output_stride = 5000;
  const auto res = Simulation(in, opt).run(in.make_state(s0, 0.0));
  for (const auto& r : res.trajectory) std::printf("t=%5.1f  x_c=%+10.5f  v_c=%+.5f\n", r.t, r.x_c, r.v_c);

  const auto pulse = pulse_velocity(setup.params, setup.kernel);
  std::printf("predicted |v| = %.6f\n", pulse ? pulse->v_c : 0.0);
}
