// cbss/oracle.hpp

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

// Supervised benchmarks: relative impulse responses identified by least
// squares in the time domain (linear convolution, "TD") and per-bin relative
// transfer functions (circular convolution, "FD"), both fitted from the true
// source images and turned into null-steering 2x2 demixers [1, -a] that
// cancel the modeled interferer while leaving the target's reference-mic
// image intact.

#ifndef CBSS_ORACLE_HPP_
#define CBSS_ORACLE_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

#include "cbss/common.hpp"
#include "cbss/fd_demixer.hpp"
#include "cbss/fft.hpp"
#include "cbss/linalg.hpp"
#include "cbss/signal.hpp"
#include "cbss/stft.hpp"

namespace cbss {

// Least-squares FIR g minimizing ||other - g * ref||^2 + ridge ||g||^2 via the
// Toeplitz normal equations (autocorrelation method, Levinson solve).
inline std::vector<Real> fit_td_relative_ir(const std::vector<Real>& image_ref,
                                            const std::vector<Real>& image_other,
                                            std::size_t filter_len, Real ridge) {
  if (filter_len == 0) throw std::invalid_argument("fit_td_relative_ir: zero length");
  if (image_ref.size() != image_other.size() || image_ref.size() < filter_len)
    throw std::invalid_argument("fit_td_relative_ir: images must match and cover the filter");
  if (ridge < 0.0) throw std::invalid_argument("fit_td_relative_ir: negative ridge");

  std::vector<Real> auto_corr = cross_correlation(image_ref, image_ref, filter_len);
  std::vector<Real> rhs = cross_correlation(image_other, image_ref, filter_len);
  auto_corr[0] += ridge;
  if (!(std::abs(auto_corr[0]) > 0.0))
    throw SingularMatrixError("fit_td_relative_ir: zero-energy reference image");
  return levinson_solve(auto_corr, rhs);
}

struct FdRtf {
  std::vector<Cplx> a;             // per-bin relative transfer factors
  std::vector<bool> floored_bins;  // flagged bins where the reference was silent
  bool any_floored = false;
};

// a(k) = sum_n X_other conj(X_ref) / max(sum_n |X_ref|^2, floor).
inline FdRtf fit_fd_rtf(const TimeFrequencyTensor& ref, const TimeFrequencyTensor& other,
                        std::size_t ref_channel = 0, std::size_t other_channel = 0,
                        Real floor_rel = 1e-12) {
  const std::size_t K = ref.bins();
  const std::size_t N = ref.frames();
  if (N == 0 || other.frames() != N || other.bins() != K)
    throw std::invalid_argument("fit_fd_rtf: tensor shape mismatch");
  // Absolute floor scaled to the average bin energy.
  Real total = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t n = 0; n < N; ++n) total += std::norm(ref.coeff[ref_channel][k][n]);
  Real floor_abs = std::max(floor_rel * total / static_cast<Real>(K), 1e-300);

  FdRtf out;
  out.a.resize(K);
  out.floored_bins.assign(K, false);
  for (std::size_t k = 0; k < K; ++k) {
    Cplx num(0.0, 0.0);
    Real den = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      num += other.coeff[other_channel][k][n] * std::conj(ref.coeff[ref_channel][k][n]);
      den += std::norm(ref.coeff[ref_channel][k][n]);
    }
    if (den < floor_abs) {
      out.floored_bins[k] = true;
      out.any_floored = true;
      den = floor_abs;
    }
    out.a[k] = num / den;
  }
  return out;
}

// Relative model of one source: how its image at the non-reference mic
// follows from its image at the reference mic.
struct RelativeTransferModel {
  bool time_domain = true;
  std::vector<Real> g;  // TD variant
  FdRtf rtf;            // FD variant
  std::size_t source = 0;
};

// Null-steering time-domain demixer for the determined 2x2 scenario:
// output q keeps mic q and subtracts the other source's modeled image,
//   y_1 = x_1 - g_2 * x_2,  y_2 = x_2 - g_1 * x_1,
// where g_q maps source q's image at its "own" mic to the other mic.
struct TdOracleDemixer {
  std::vector<Real> g_cancel_src2;  // applied to mic 2, subtracted from mic 1
  std::vector<Real> g_cancel_src1;  // applied to mic 1, subtracted from mic 2
};

inline std::vector<std::vector<Real>> apply_td_oracle(const TdOracleDemixer& d,
                                                      const MultichannelSignal& x) {
  if (x.channels() != 2) throw UnsupportedScenarioError("TD oracle: needs exactly 2 mics");
  const std::size_t T = x.length();
  std::vector<std::vector<Real>> y(2, std::vector<Real>(T, 0.0));
  std::vector<Real> c1 = convolve(x.samples[1], d.g_cancel_src2);
  std::vector<Real> c2 = convolve(x.samples[0], d.g_cancel_src1);
  for (std::size_t n = 0; n < T; ++n) {
    y[0][n] = x.samples[0][n] - (n < c1.size() ? c1[n] : 0.0);
    y[1][n] = x.samples[1][n] - (n < c2.size() ? c2[n] : 0.0);
  }
  return y;
}

// Per-bin null-steering rows [1, -a] for the FD variant.
inline FrequencyDomainDemixer build_fd_oracle(const FdRtf& rtf_src1_to_mic2,
                                              const FdRtf& rtf_src2_to_mic1) {
  const std::size_t K = rtf_src1_to_mic2.a.size();
  if (rtf_src2_to_mic1.a.size() != K)
    throw std::invalid_argument("build_fd_oracle: bin count mismatch");
  FrequencyDomainDemixer d = FrequencyDomainDemixer::identity(K, 2);
  for (std::size_t k = 0; k < K; ++k) {
    d.bins[k](0, 1) = -rtf_src2_to_mic1.a[k];
    d.bins[k](1, 0) = -rtf_src1_to_mic2.a[k];
  }
  return d;
}

}  // namespace cbss

#endif  // CBSS_ORACLE_HPP_
