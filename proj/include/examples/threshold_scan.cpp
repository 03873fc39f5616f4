// Critical stiffness and pulse speed as the source narrows.
#include <cstdio>

#include "pulselab.hpp"

int main() {
  using namespace pulselab;
  std::printf("%10s %14s %14s\n", "epsilon", "eta*", "v(eta=5)");
  for (double eps : {1.0, 0.1, 1e-2, 1e-3}) {
    const auto g = gaussian_kernel(eps);
    const auto p = ModelParams::unit(5.0, eps);
    const double eta_star = critical_stiffness(p, g).eta_star;
    const auto pulse = pulse_velocity(p, g);
    std::printf("%10.0e %14.8f %14.8f\n", eps, eta_star, pulse ? pulse->v_c : 0.0);
  }
}
