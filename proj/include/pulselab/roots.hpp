#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include <boost/math/tools/roots.hpp>

namespace pulselab {

class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RootResult {
  double root{0.0};
  double lo{0.0};
  double hi{0.0};
  int expansions{0};
};

/// Root of a function decreasing from f(lo) > 0: doubles the upper end until
/// f(hi) < 0, then bisects to |hi - lo| <= tol.
template <class F>
RootResult bisect_decreasing(F&& f, double lo, double hi0, double tol = 1e-10,
                             int max_expansions = 200) {
  RootResult r;
  double hi = hi0;
  double f_hi = f(hi);
  while (!(f_hi < 0.0)) {
    if (!std::isfinite(f_hi) || ++r.expansions > max_expansions)
      throw BracketError("no sign change up to v = " + std::to_string(hi) +
                         " (f = " + std::to_string(f_hi) + ")");
    lo = hi;
    hi *= 2.0;
    f_hi = f(hi);
  }
  auto done = [tol](double a, double b) { return std::abs(b - a) <= tol; };
  boost::uintmax_t iters = 400;
  auto [a, b] = boost::math::tools::bisect(f, lo, hi, done, iters);
  r.lo = a;
  r.hi = b;
  r.root = 0.5 * (a + b);
  return r;
}

}  // namespace pulselab
