// cbss/fft.hpp

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef CBSS_FFT_HPP_
#define CBSS_FFT_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

#include "cbss/common.hpp"

namespace cbss {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 transform. forward: X[k] = sum_n x[n] exp(-j 2 pi k n / N)
// (unnormalized); inverse applies the conjugate kernel and divides by N.
inline void fft_inplace(std::vector<Cplx>& x, bool inverse) {
  const std::size_t n = x.size();
  if (n <= 1) return;
  if (!is_power_of_two(n)) throw std::invalid_argument("fft: length must be a power of two");
  // Bit reversal.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    Real ang = 2.0 * kPi / static_cast<Real>(len) * (inverse ? 1.0 : -1.0);
    Cplx wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      Cplx w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        Cplx u = x[i + k];
        Cplx v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    Real inv_n = 1.0 / static_cast<Real>(n);
    for (auto& v : x) v *= inv_n;
  }
}

inline std::vector<Cplx> fft(std::vector<Cplx> x) {
  fft_inplace(x, false);
  return x;
}

inline std::vector<Cplx> ifft(std::vector<Cplx> x) {
  fft_inplace(x, true);
  return x;
}

inline std::vector<Cplx> fft_real(const std::vector<Real>& x, std::size_t n) {
  std::vector<Cplx> buf(n, Cplx(0.0, 0.0));
  for (std::size_t i = 0; i < x.size() && i < n; ++i) buf[i] = Cplx(x[i], 0.0);
  fft_inplace(buf, false);
  return buf;
}

// Linear convolution of real sequences (FFT when it pays off).
inline std::vector<Real> convolve(const std::vector<Real>& a, const std::vector<Real>& b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  if (a.size() * b.size() <= 4096) {
    std::vector<Real> out(out_len, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      Real ai = a[i];
      if (ai == 0.0) continue;
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += ai * b[j];
    }
    return out;
  }
  std::size_t n = 1;
  while (n < out_len) n <<= 1;
  std::vector<Cplx> fa = fft_real(a, n);
  std::vector<Cplx> fb = fft_real(b, n);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  fft_inplace(fa, true);
  std::vector<Real> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = fa[i].real();
  return out;
}

// Cross-correlation c[l] = sum_n a[n] * b[n - l] for l = 0..max_lag-1.
inline std::vector<Real> cross_correlation(const std::vector<Real>& a,
                                           const std::vector<Real>& b,
                                           std::size_t max_lag) {
  std::vector<Real> rev(b.rbegin(), b.rend());
  std::vector<Real> full = convolve(a, rev);
  // full[k] = sum_n a[n] b[n - (k - (len_b - 1))]
  std::vector<Real> out(max_lag, 0.0);
  const std::size_t off = b.size() - 1;
  for (std::size_t l = 0; l < max_lag; ++l)
    if (off + l < full.size()) out[l] = full[off + l];
  return out;
}

}  // namespace cbss

#endif  // CBSS_FFT_HPP_
