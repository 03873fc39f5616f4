#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "pulselab/barycentric.hpp"
#include "pulselab/fft.hpp"

namespace pulselab {

/// Periodic box [-L, L) with N = 2^k equispaced nodes x_m = -L + m dx and
/// frequencies xi_j = pi j / L.
class SpectralGrid {
 public:
  SpectralGrid(double half_width, std::size_t n_points) : L_(half_width), N_(n_points) {
    if (!(half_width > 0.0)) throw std::invalid_argument("grid: half_width > 0");
    if (n_points < 16 || (n_points & (n_points - 1)) != 0)
      throw std::invalid_argument("grid: n_points must be a power of two >= 16");
    fft_ = RealFft::of_size(N_);
  }

  double half_width() const { return L_; }
  std::size_t size() const { return N_; }
  std::size_t modes() const { return N_ / 2 + 1; }
  double dx() const { return 2.0 * L_ / double(N_); }
  double x(std::size_t m) const { return -L_ + double(m) * dx(); }
  double xi(std::size_t j) const { return std::numbers::pi * double(j) / L_; }
  /// Edge of the band represented by modes |j| < N/2.
  double band_edge() const { return xi(N_ / 2) - 0.5 * xi(1); }
  const RealFft& fft() const { return *fft_; }

  std::vector<double> nodes() const {
    std::vector<double> v(N_);
    for (std::size_t m = 0; m < N_; ++m) v[m] = x(m);
    return v;
  }

  bool operator==(const SpectralGrid& o) const { return L_ == o.L_ && N_ == o.N_; }

 private:
  double L_;
  std::size_t N_;
  std::shared_ptr<const RealFft> fft_;
};

/// Real periodic field stored by its coefficients c_j ~ f^(xi_j) (continuous
/// transform normalization), j = 0..N/2, so that
///   f(x) = (1/2L) sum_{|j| < N/2} c_j exp(i xi_j x).
class Field {
 public:
  using Complex = std::complex<double>;

  explicit Field(SpectralGrid grid) : grid_(std::move(grid)), c_(grid_.modes()) {}

  static Field from_samples(const SpectralGrid& grid, const std::vector<double>& s) {
    if (s.size() != grid.size()) throw std::invalid_argument("field: sample count mismatch");
    Field f(grid);
    grid.fft().forward(s, f.c_);
    const double dx = grid.dx();
    for (std::size_t j = 0; j < f.c_.size(); ++j) f.c_[j] *= (j % 2 == 0 ? dx : -dx);
    return f;
  }

  static Field from_function(const SpectralGrid& grid, const std::function<double(double)>& f) {
    std::vector<double> s(grid.size());
    for (std::size_t m = 0; m < s.size(); ++m) s[m] = f(grid.x(m));
    return from_samples(grid, s);
  }

  /// Coefficients given by a continuous transform evaluated at xi_j.
  static Field from_transform(const SpectralGrid& grid,
                              const std::function<Complex(double)>& transform) {
    Field f(grid);
    for (std::size_t j = 0; j + 1 < f.c_.size(); ++j) f.c_[j] = transform(grid.xi(j));
    f.c_[0] = f.c_[0].real();
    return f;
  }

  const SpectralGrid& grid() const { return grid_; }
  std::vector<Complex>& coefficients() { return c_; }
  const std::vector<Complex>& coefficients() const { return c_; }

  /// Samples of d^m f / dx^m at the grid nodes (Nyquist dropped for m odd).
  std::vector<double> samples(int derivative = 0) const {
    std::vector<Complex> spec(c_.size());
    const double inv_dx = 1.0 / grid_.dx();
    const std::size_t nyq = c_.size() - 1;
    for (std::size_t j = 0; j < c_.size(); ++j) {
      Complex v = c_[j] * (j % 2 == 0 ? inv_dx : -inv_dx);
      if (derivative > 0) {
        if (j == nyq && derivative % 2 == 1) {
          v = 0.0;
        } else {
          v *= std::pow(Complex(0.0, grid_.xi(j)), derivative);
        }
      }
      spec[j] = v;
    }
    std::vector<double> out(grid_.size());
    grid_.fft().inverse(spec, out);
    const double inv_n = 1.0 / double(grid_.size());
    for (auto& v : out) v *= inv_n;
    return out;
  }

  /// Trigonometric interpolant (or its first derivative) at an arbitrary x.
  double value_at(double x) const { return evaluate(x, 0); }
  double derivative_at(double x) const { return evaluate(x, 1); }

  /// int_{-L}^{L} f dx.
  double integral() const { return c_[0].real(); }

  double sup_norm(int derivative = 0) const {
    const auto s = samples(derivative);
    double m = 0.0;
    for (double v : s) m = std::max(m, std::abs(v));
    return m;
  }

  Field& operator+=(const Field& o) {
    for (std::size_t j = 0; j < c_.size(); ++j) c_[j] += o.c_[j];
    return *this;
  }
  Field& operator-=(const Field& o) {
    for (std::size_t j = 0; j < c_.size(); ++j) c_[j] -= o.c_[j];
    return *this;
  }
  Field& operator*=(double a) {
    for (auto& v : c_) v *= a;
    return *this;
  }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator+(Field a, const Field& b) { return a += b; }

  /// f(x) -> f(x - shift).
  void translate(double shift) {
    for (std::size_t j = 0; j < c_.size(); ++j)
      c_[j] *= std::polar(1.0, -grid_.xi(j) * shift);
  }

  /// f(x) -> f(2 center - x).
  void reflect(double center = 0.0) {
    for (std::size_t j = 0; j < c_.size(); ++j)
      c_[j] = std::conj(c_[j]) * std::polar(1.0, -2.0 * grid_.xi(j) * center);
  }

  /// Drops the Nyquist coefficient; the integrator works on |j| < N/2.
  void band_limit() { c_.back() = 0.0; }

 private:
  double evaluate(double x, int derivative) const {
    const Complex step = std::polar(1.0, grid_.xi(1) * x);
    Complex phase = 1.0;
    double acc = derivative == 0 ? 0.5 * c_[0].real() : 0.0;
    const std::size_t nyq = c_.size() - 1;
    for (std::size_t j = 1; j < nyq; ++j) {
      // Re-anchor to bound the drift of the running product.
      phase = (j % 64 == 0) ? std::polar(1.0, grid_.xi(j) * x) : phase * step;
      const Complex term = c_[j] * phase;
      acc += derivative == 0 ? term.real() : -grid_.xi(j) * term.imag();
    }
    if (derivative == 0) acc += 0.5 * (c_[nyq] * std::cos(grid_.xi(nyq) * x)).real();
    return acc / grid_.half_width();
  }

  SpectralGrid grid_;
  std::vector<Complex> c_;
};

/// Barycentric interpolation of the sampled derivative field: order+1 nodes
/// centred on x (periodic wrap).
inline double interpolate_derivative(const Field& f, double x, int order) {
  const auto& g = f.grid();
  const double L = g.half_width();
  if (x < -L || x > L)
    throw std::out_of_range("interpolate_derivative: x outside [-L, L]");
  const auto ds = f.samples(1);
  const double h = g.dx();
  const long n = long(g.size());
  const long first = long(std::floor((x + L) / h)) - order / 2;
  std::vector<double> vals(order + 1);
  for (int k = 0; k <= order; ++k) vals[k] = ds[std::size_t(((first + k) % n + n) % n)];
  return EquispacedBarycentric(order)(vals, -L + double(first) * h, h, x);
}

}  // namespace pulselab
