// cbss/covariance.hpp

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

// Per-block PD x PD output correlation matrices with D lags per channel:
// the second-order statistics of the SOS cost.

#ifndef CBSS_COVARIANCE_HPP_
#define CBSS_COVARIANCE_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

#include "cbss/common.hpp"
#include "cbss/linalg.hpp"

namespace cbss {

struct BlockCovarianceSet {
  std::vector<MatR> blocks;  // one PD x PD symmetric matrix per signal block
  std::size_t channels = 0;  // P
  std::size_t lags = 0;      // D

  std::size_t num_blocks() const { return blocks.size(); }
};

// Zero all channel-off-diagonal D x D sub-blocks.
inline MatR bdiag(const MatR& r, std::size_t channels, std::size_t lags) {
  MatR out(r.rows(), r.cols());
  for (std::size_t q = 0; q < channels; ++q)
    for (std::size_t i = 0; i < lags; ++i)
      for (std::size_t j = 0; j < lags; ++j)
        out(q * lags + i, q * lags + j) = r(q * lags + i, q * lags + j);
  return out;
}

// Biased (1/T_block) outer-product estimate over one block of output samples.
// blocks[m][q] holds T_block samples of channel q; the D lags of each channel
// form the sub-blocks (samples before the block count as zero).
inline BlockCovarianceSet estimate_block_covariances(
    const std::vector<std::vector<std::vector<Real>>>& y_blocks, std::size_t lags) {
  if (lags == 0) throw std::invalid_argument("estimate_block_covariances: zero lags");
  BlockCovarianceSet set;
  set.lags = lags;
  for (const auto& block : y_blocks) {
    const std::size_t P = block.size();
    if (P == 0) throw std::invalid_argument("estimate_block_covariances: empty block");
    const std::size_t T = block[0].size();
    if (T < lags)
      throw std::invalid_argument("estimate_block_covariances: block shorter than lag count");
    if (set.channels == 0) set.channels = P;
    MatR r(P * lags, P * lags);
    std::vector<Real> v(P * lags);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t q = 0; q < P; ++q)
        for (std::size_t d = 0; d < lags; ++d)
          v[q * lags + d] = (t >= d) ? block[q][t - d] : 0.0;
      for (std::size_t i = 0; i < P * lags; ++i) {
        if (v[i] == 0.0) continue;
        for (std::size_t j = 0; j <= i; ++j) r(i, j) += v[i] * v[j];
      }
    }
    const Real inv_t = 1.0 / static_cast<Real>(T);
    for (std::size_t i = 0; i < P * lags; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        r(i, j) *= inv_t;
        r(j, i) = r(i, j);
      }
    set.blocks.push_back(std::move(r));
  }
  return set;
}

// Cholesky with trace-scaled ridge fallback; flags when regularization fired.
// Keeps log det finite through the early, possibly degenerate iterations.
inline MatR regularized_cholesky(const MatR& r, bool* regularized = nullptr) {
  MatR l;
  if (cholesky(r, l)) {
    if (regularized) *regularized = false;
    return l;
  }
  Real tr = 0.0;
  for (std::size_t i = 0; i < r.rows(); ++i) tr += r(i, i);
  Real delta = 1e-9 * tr / static_cast<Real>(r.rows());
  if (!(delta > 0.0)) delta = 1e-12;
  MatR reg = r;
  for (int attempt = 0; attempt < 40; ++attempt) {
    for (std::size_t i = 0; i < r.rows(); ++i) reg(i, i) = r(i, i) + delta;
    if (cholesky(reg, l)) {
      if (regularized) *regularized = true;
      return l;
    }
    delta *= 10.0;
  }
  throw SingularMatrixError("regularized_cholesky: covariance not positive definite");
}

}  // namespace cbss

#endif  // CBSS_COVARIANCE_HPP_
