// cbss/fd_demixer.hpp

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

// Per-bin complex P x P demixing systems and the two equivalent layouts of
// the stacked demixing matrix: bin-major (block diagonal, one P x P block per
// bin) and channel-block (P x P grid of K x K diagonal blocks). The layouts
// are row/column permutations of each other, so all coefficients and the
// log-determinant sum are identical in both.

#ifndef CBSS_FD_DEMIXER_HPP_
#define CBSS_FD_DEMIXER_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "cbss/common.hpp"
#include "cbss/linalg.hpp"
#include "cbss/stft.hpp"

namespace cbss {

enum class DemixerLayout { kBinMajor, kChannelBlock };

struct FrequencyDomainDemixer {
  std::vector<MatC> bins;  // bins[k] is P x P; y(k,n) = bins[k] * x(k,n)
  DemixerLayout layout = DemixerLayout::kBinMajor;

  std::size_t num_bins() const { return bins.size(); }
  std::size_t channels() const { return bins.empty() ? 0 : bins[0].rows(); }

  static FrequencyDomainDemixer identity(std::size_t k, std::size_t p) {
    FrequencyDomainDemixer d;
    d.bins.assign(k, MatC::identity(p));
    return d;
  }
};

// Lossless layout flip; coefficients are untouched, only the interpretation
// of the stacked matrix changes.
inline FrequencyDomainDemixer relayout_iva(const FrequencyDomainDemixer& d,
                                           DemixerLayout target) {
  FrequencyDomainDemixer out = d;
  out.layout = target;
  return out;
}

// Dense stacked matrix in the requested layout (test/identity use; KP x KP).
inline MatC stacked_dense(const FrequencyDomainDemixer& d, DemixerLayout layout) {
  const std::size_t K = d.num_bins();
  const std::size_t P = d.channels();
  MatC big(K * P, K * P);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t q = 0; q < P; ++q)
      for (std::size_t p = 0; p < P; ++p) {
        Cplx v = d.bins[k](q, p);
        if (layout == DemixerLayout::kBinMajor)
          big(k * P + q, k * P + p) = v;
        else
          big(q * K + k, p * K + k) = v;
      }
  return big;
}

// Sum over bins of log|det W(k)|; throws naming the offending bin.
inline Real log_det_sum_per_bin(const FrequencyDomainDemixer& d) {
  Real acc = 0.0;
  for (std::size_t k = 0; k < d.num_bins(); ++k) {
    MatC m = d.bins[k];
    std::vector<std::size_t> perm;
    int parity;
    if (!lu_factor(m, perm, parity))
      throw SingularMatrixError("singular demixing matrix at bin " + std::to_string(k));
    for (std::size_t i = 0; i < m.rows(); ++i) acc += std::log(std::abs(m(i, i)));
  }
  return acc;
}

// Same quantity evaluated through the dense stacked matrix of the demixer's
// current layout (independent route; used by the layout-invariance checks).
inline Real log_det_sum_stacked(const FrequencyDomainDemixer& d) {
  return log_abs_det(stacked_dense(d, d.layout), "stacked demixing matrix");
}

// y(k, n) = W(k) x(k, n) for every bin and frame.
inline TimeFrequencyTensor apply_fd_demixer(const FrequencyDomainDemixer& d,
                                            const TimeFrequencyTensor& x) {
  const std::size_t P = x.channels();
  const std::size_t K = x.bins();
  const std::size_t N = x.frames();
  if (d.num_bins() != K || d.channels() != P)
    throw std::invalid_argument("apply_fd_demixer: dimension mismatch");
  TimeFrequencyTensor y = x;
  for (std::size_t k = 0; k < K; ++k) {
    const MatC& w = d.bins[k];
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t q = 0; q < P; ++q) {
        Cplx acc(0.0, 0.0);
        for (std::size_t p = 0; p < P; ++p) acc += w(q, p) * x.coeff[p][k][n];
        y.coeff[q][k][n] = acc;
      }
    }
  }
  return y;
}

// Minimum distortion principle: W'(k) = diag(W(k)^{-1}) W(k), rescaling each
// output to its image at the corresponding microphone. Rows of the per-bin
// global system W'H stay scalar multiples of the rows of WH.
inline FrequencyDomainDemixer minimum_distortion_rescale(const FrequencyDomainDemixer& d) {
  FrequencyDomainDemixer out = d;
  for (std::size_t k = 0; k < d.num_bins(); ++k) {
    MatC inv;
    try {
      inv = inverse(d.bins[k], "demixing matrix");
    } catch (const SingularMatrixError&) {
      throw SingularMatrixError("minimum_distortion_rescale: singular bin " +
                                std::to_string(k));
    }
    const std::size_t P = d.channels();
    for (std::size_t q = 0; q < P; ++q) {
      Cplx scale = inv(q, q);
      for (std::size_t p = 0; p < P; ++p) out.bins[k](q, p) = scale * d.bins[k](q, p);
    }
  }
  return out;
}

}  // namespace cbss

#endif  // CBSS_FD_DEMIXER_HPP_
