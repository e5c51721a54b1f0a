#pragma once

#include <complex>
#include <vector>

#include "rfnet/tensor.hpp"

namespace rfnet::num {

using cplx = std::complex<double>;

// In-place iterative radix-2 FFT; n must be a power of two.
// Forward kernel is e^{-j 2 pi k n / N}; inverse flips the sign (no 1/N).
void fft_pow2(std::vector<cplx>& a, bool inverse);

// Naive O(n^2) DFT, any length. Same kernel conventions as fft_pow2.
std::vector<cplx> dft_naive(const std::vector<cplx>& a, bool inverse);

// Dispatch: radix-2 when the length is a power of two, naive DFT otherwise.
std::vector<cplx> dft_any(std::vector<cplx> a, bool inverse);

inline bool is_pow2(int n) { return n >= 1 && (n & (n - 1)) == 0; }

// Per-bin magnitudes of the K-point DFT along slow time, applied to every
// (fast-time, pair) column of a K x L x Nr tensor. Output shape equals input.
template <class T>
TensorT<T> fft_magnitude_slow_time(const TensorT<T>& x) {
    require(x.rank() == 3, "fft_magnitude_slow_time: K x L x Nr tensor expected");
    int K = x.dim(0), L = x.dim(1), Nr = x.dim(2);
    require(K >= 1, "fft_magnitude_slow_time: K >= 1 required");
    TensorT<T> out(x.shape);
    std::vector<cplx> col(static_cast<std::size_t>(K));
    for (int l = 0; l < L; ++l) {
        for (int r = 0; r < Nr; ++r) {
            for (int k = 0; k < K; ++k) col[static_cast<std::size_t>(k)] = cplx(static_cast<double>(x.at(k, l, r)), 0.0);
            auto spec = dft_any(col, false);
            for (int k = 0; k < K; ++k) out.at(k, l, r) = static_cast<T>(std::abs(spec[static_cast<std::size_t>(k)]));
        }
    }
    return out;
}

}  // namespace rfnet::num
