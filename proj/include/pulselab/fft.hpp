#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace pulselab {

/// Real <-> half-complex transform of fixed length. Planning goes through a
/// process-wide lock (FFTW planning is not thread-safe); execution uses the
/// new-array interface and may run concurrently.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    if (n < 4) throw std::invalid_argument("FFT length must be >= 4");
    std::vector<double> r(n);
    std::vector<std::complex<double>> c(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(int(n), r.data(), reinterpret_cast<fftw_complex*>(c.data()),
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
    inverse_ = fftw_plan_dft_c2r_1d(int(n), reinterpret_cast<fftw_complex*>(c.data()), r.data(),
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }

  /// out[j] = sum_m in[m] exp(-2 pi i j m / n), j = 0..n/2.
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const {
    std::vector<double> buf(in.begin(), in.end());
    fftw_execute_dft_r2c(forward_, buf.data(), reinterpret_cast<fftw_complex*>(out.data()));
  }

  /// Unnormalized inverse: out[m] = sum_j in[j] exp(+2 pi i j m / n) over the
  /// Hermitian extension.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
    std::vector<std::complex<double>> buf(in.begin(), in.end());
    fftw_execute_dft_c2r(inverse_, reinterpret_cast<fftw_complex*>(buf.data()), out.data());
  }

  /// Shared instance per length.
  static std::shared_ptr<const RealFft> of_size(std::size_t n) {
    static std::mutex cache_mutex;
    static std::map<std::size_t, std::weak_ptr<const RealFft>> cache;
    std::lock_guard lock(cache_mutex);
    if (auto sp = cache[n].lock()) return sp;
    auto sp = std::make_shared<const RealFft>(n);
    cache[n] = sp;
    return sp;
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  std::size_t n_;
  fftw_plan forward_{};
  fftw_plan inverse_{};
};

}  // namespace pulselab
