#ifndef PAULI_FFT_HPP
#define PAULI_FFT_HPP

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

namespace pauli::detail {

// Unnormalized in-place complex DFT of power-of-two length, backed by FFTW.
// Plans are created once per length under a lock (FFTW planning is not
// thread-safe) and executed through the new-array interface, which is.
// FFTW_ESTIMATE keeps the chosen algorithm, and therefore the rounding,
// identical from run to run. Buffers with SIMD alignment use the vectorized
// plan; anything else goes through an FFTW_UNALIGNED plan.
class Fft {
 public:
  enum class Direction { Forward, Backward };

  static void transform(std::span<std::complex<double>> data, Direction dir) {
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    const bool aligned = fftw_alignment_of(reinterpret_cast<double*>(ptr)) == 0;
    const Plans& p = plans_for(data.size(), aligned);
    fftw_execute_dft(dir == Direction::Forward ? p.forward : p.backward, ptr, ptr);
  }

 private:
  struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
  };

  static const Plans& plans_for(std::size_t n, bool aligned) {
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, bool>, Plans> cache;
    std::lock_guard lock(mutex);
    const auto key = std::make_pair(n, aligned);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto* buf = fftw_alloc_complex(n);
    const unsigned flags = aligned ? FFTW_ESTIMATE : FFTW_ESTIMATE | FFTW_UNALIGNED;
    const int len = static_cast<int>(n);
    Plans p;
    p.forward = fftw_plan_dft_1d(len, buf, buf, FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft_1d(len, buf, buf, FFTW_BACKWARD, flags);
    fftw_free(buf);
    return cache.emplace(key, p).first->second;
  }
};

inline void fft_forward(std::span<std::complex<double>> data) {
  Fft::transform(data, Fft::Direction::Forward);
}

inline void fft_backward(std::span<std::complex<double>> data) {
  Fft::transform(data, Fft::Direction::Backward);
}

}  // namespace pauli::detail

#endif  // PAULI_FFT_HPP
