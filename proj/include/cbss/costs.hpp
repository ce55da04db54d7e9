// cbss/costs.hpp

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

// The cost functions of the unified framework. All of them decompose into a
// source-model term and a log-determinant term:
//
//   J_FD-ICA(k) = -(1/N) sum_n sum_q log p(y_q(k,n)) - 2 log|det W(k)|
//   J_IVA       =  sum_q (1/N) sum_n -log p(y_vec_q(n)) - 2 sum_k log|det W(k)|
//   J_TRI       = (1/N) sum_m sum_q E_sample[-log p(y_q(m))]
//                                   - log|det (U^{1_D 0})^T W|
//   J_TRI-FD    =  same source term through the windowed DFT path,
//                  log det through the DFT-diagonalized blocks
//   J_SOS       =  sum_m { log det bdiag R(m) - log det R(m) }
//
// The broadband log-det term carries a single factor (real-valued change of
// variables) where the STFT-domain costs carry a factor 2 (complex-valued
// change of variables); both enter the totals with a minus sign, which is
// what the Kullback-Leibler expansion yields and what makes the reduction
// chain FD-ICA c IVA c TRINICON hold numerically.

#ifndef CBSS_COSTS_HPP_
#define CBSS_COSTS_HPP_

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cbss/common.hpp"
#include "cbss/covariance.hpp"
#include "cbss/fd_demixer.hpp"
#include "cbss/linalg.hpp"
#include "cbss/prior.hpp"
#include "cbss/signal.hpp"
#include "cbss/stft.hpp"
#include "cbss/toeplitz.hpp"

namespace cbss {

struct CostBreakdown {
  Real source_term = 0.0;
  Real log_det_term = 0.0;  // enters total as written (already signed)
  Real total = 0.0;
};

// ---------------------------------------------------------------------------
// FD-ICA, one frequency bin.

// x_bin[p][n]: observations of bin k. W is the P x P demixing matrix there.
inline CostBreakdown fdica_cost(const MatC& w,
                                const std::vector<std::vector<Cplx>>& x_bin,
                                const SourcePrior& prior) {
  const std::size_t P = w.rows();
  if (x_bin.size() != P) throw std::invalid_argument("fdica_cost: channel mismatch");
  const std::size_t N = x_bin[0].size();
  if (N == 0) throw std::invalid_argument("fdica_cost: needs at least one frame");

  Real src = 0.0;
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t q = 0; q < P; ++q) {
      Cplx y(0.0, 0.0);
      for (std::size_t p = 0; p < P; ++p) y += w(q, p) * x_bin[p][n];
      src += laplace_neg_log(std::abs(y), prior.floor);
    }
  src /= static_cast<Real>(N);

  CostBreakdown out;
  out.source_term = src;
  out.log_det_term = -2.0 * log_abs_det(w, "FD-ICA demixing matrix");
  out.total = out.source_term + out.log_det_term;
  return out;
}

// ---------------------------------------------------------------------------
// IVA over all bins. The source term couples the bins of one output channel
// through the spherical prior; with the factorized (univariate) prior the
// cost splits into the per-bin FD-ICA costs exactly.

namespace detail {

inline Real iva_source_from_outputs(
    const std::vector<std::vector<std::vector<Cplx>>>& y,  // [q][k][n]
    const SourcePrior& prior) {
  const std::size_t P = y.size();
  const std::size_t K = y[0].size();
  const std::size_t N = y[0][0].size();
  Real src = 0.0;
  for (std::size_t q = 0; q < P; ++q) {
    Real acc = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      if (prior.kind == PriorKind::kUnivariateLaplace) {
        for (std::size_t k = 0; k < K; ++k)
          acc += laplace_neg_log(std::abs(y[q][k][n]), prior.floor);
      } else {
        Real r2 = 0.0;
        for (std::size_t k = 0; k < K; ++k) r2 += std::norm(y[q][k][n]);
        acc += laplace_neg_log(std::sqrt(r2), prior.floor);
      }
    }
    src += acc / static_cast<Real>(N);
  }
  return src;
}

}  // namespace detail

// Evaluation follows the demixer's layout tag: bin-major goes through the
// per-bin matrices, channel-block goes through the dense stacked matrix
// (an independent route; the two agree to machine precision).
inline CostBreakdown iva_cost(const FrequencyDomainDemixer& d,
                              const TimeFrequencyTensor& x,
                              const SourcePrior& prior) {
  const std::size_t P = x.channels();
  const std::size_t K = x.bins();
  const std::size_t N = x.frames();
  if (d.num_bins() != K || d.channels() != P)
    throw std::invalid_argument("iva_cost: dimension mismatch");
  if (N == 0) throw std::invalid_argument("iva_cost: needs at least one frame");

  std::vector<std::vector<std::vector<Cplx>>> y(
      P, std::vector<std::vector<Cplx>>(K, std::vector<Cplx>(N)));
  Real logdet = 0.0;

  if (d.layout == DemixerLayout::kBinMajor) {
    for (std::size_t k = 0; k < K; ++k) {
      const MatC& w = d.bins[k];
      for (std::size_t n = 0; n < N; ++n)
        for (std::size_t q = 0; q < P; ++q) {
          Cplx acc(0.0, 0.0);
          for (std::size_t p = 0; p < P; ++p) acc += w(q, p) * x.coeff[p][k][n];
          y[q][k][n] = acc;
        }
    }
    logdet = log_det_sum_per_bin(d);
  } else {
    // Channel-block route: stacked dense multiply and one big determinant.
    const MatC big = stacked_dense(d, DemixerLayout::kChannelBlock);
    std::vector<Cplx> xv(K * P), yv;
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t p = 0; p < P; ++p)
        for (std::size_t k = 0; k < K; ++k) xv[p * K + k] = x.coeff[p][k][n];
      yv = big * xv;
      for (std::size_t q = 0; q < P; ++q)
        for (std::size_t k = 0; k < K; ++k) y[q][k][n] = yv[q * K + k];
    }
    logdet = log_abs_det(big, "stacked IVA demixing matrix");
  }

  CostBreakdown out;
  out.source_term = detail::iva_source_from_outputs(y, prior);
  out.log_det_term = -2.0 * logdet;
  out.total = out.source_term + out.log_det_term;
  return out;
}

// ---------------------------------------------------------------------------
// TRINICON, offline weighting: N = floor(T / R) signal blocks; block m is
// anchored at sample t_m = (m+1) R - 1 and the output block holds the D most
// recent output samples [y(t_m), ..., y(t_m - D + 1)]. The sample expectation
// is the mean of per-sample negative log-likelihoods within the block. The
// Gaussian prior uses the block's plug-in per-sample variance (lag structure
// is handled by the SOS path, not here).

namespace detail {

inline std::vector<std::vector<Real>> gather_block(const MultichannelSignal& x,
                                                   long anchor, std::size_t samples) {
  std::vector<std::vector<Real>> block(x.channels(), std::vector<Real>(samples, 0.0));
  const long T = static_cast<long>(x.length());
  for (std::size_t p = 0; p < x.channels(); ++p)
    for (std::size_t i = 0; i < samples; ++i) {
      long t = anchor - static_cast<long>(i);
      if (t >= 0 && t < T) block[p][i] = x.samples[p][t];
    }
  return block;
}

inline Real block_sample_nll(const std::vector<Real>& yq, const SourcePrior& prior) {
  const std::size_t D = yq.size();
  Real acc = 0.0;
  if (prior.kind == PriorKind::kBlockGaussian) {
    Real var = 0.0;
    for (Real v : yq) var += v * v;
    var = var / static_cast<Real>(D);
    if (var < prior.floor * prior.floor) var = prior.floor * prior.floor;
    for (Real v : yq) acc += 0.5 * std::log(2.0 * kPi * var) + v * v / (2.0 * var);
  } else {
    for (Real v : yq) acc += laplace_neg_log(std::abs(v), prior.floor);
  }
  return acc / static_cast<Real>(D);
}

}  // namespace detail

inline std::size_t trinicon_block_count(std::size_t signal_length, std::size_t block_shift) {
  return signal_length / block_shift;
}

inline CostBreakdown trinicon_td_cost(const TimeDomainDemixer& dm,
                                      const MultichannelSignal& x,
                                      const SourcePrior& prior) {
  dm.validate();
  const std::size_t L = dm.filter_length();
  const std::size_t R = dm.block_shift;
  if (R == 0) throw std::invalid_argument("trinicon_td_cost: zero block shift");
  const std::size_t N = trinicon_block_count(x.length(), R);
  if (N == 0) throw std::invalid_argument("trinicon_td_cost: signal shorter than one block");

  Real src = 0.0;
  for (std::size_t m = 0; m < N; ++m) {
    const long anchor = static_cast<long>((m + 1) * R) - 1;
    auto xb = detail::gather_block(x, anchor, 2 * L);
    auto yb = apply_toeplitz_block(dm, xb);
    for (std::size_t q = 0; q < dm.channels(); ++q)
      src += detail::block_sample_nll(yb[q], prior);
  }
  src /= static_cast<Real>(N);

  CostBreakdown out;
  out.source_term = src;
  out.log_det_term = -truncated_toeplitz_log_det(dm);
  out.total = out.source_term + out.log_det_term;
  return out;
}

// log|det (I_P (x) U F) Wfd (I_P (x) F^{-1} U^T)|: block (p, q) is the top-left
// D x D corner of the circulant rebuilt from the diagonal entries (inverse
// DFT), so this route never touches the time-domain filters.
inline Real trinicon_fd_log_det(
    const std::vector<std::vector<std::vector<Cplx>>>& w_fd, std::size_t d) {
  const std::size_t P = w_fd.size();
  const std::size_t R = w_fd[0][0].size();
  MatC big(P * d, P * d);
  std::vector<Cplx> col(R);
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t q = 0; q < P; ++q) {
      col.assign(w_fd[p][q].begin(), w_fd[p][q].end());
      fft_inplace(col, true);  // first column of the circulant
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) big(p * d + i, q * d + j) = col[(i + R - j) % R];
    }
  return log_abs_det(big, "windowed DFT-domain demixing matrix");
}

inline CostBreakdown trinicon_fd_cost(
    const std::vector<std::vector<std::vector<Cplx>>>& w_fd, std::size_t filter_len,
    std::size_t d, std::size_t block_shift, const MultichannelSignal& x,
    const SourcePrior& prior) {
  const std::size_t P = w_fd.size();
  if (P == 0 || x.channels() != P)
    throw std::invalid_argument("trinicon_fd_cost: channel mismatch");
  const std::size_t R_fft = w_fd[0][0].size();
  if (R_fft < 2 * filter_len) throw std::invalid_argument("trinicon_fd_cost: need R >= 2L");
  const std::size_t N = trinicon_block_count(x.length(), block_shift);
  if (N == 0) throw std::invalid_argument("trinicon_fd_cost: signal shorter than one block");

  Real src = 0.0;
  for (std::size_t m = 0; m < N; ++m) {
    const long anchor = static_cast<long>((m + 1) * block_shift) - 1;
    auto xb = detail::gather_block(x, anchor, 2 * filter_len);
    auto yb = apply_fd_linear(w_fd, xb, d);
    for (std::size_t q = 0; q < P; ++q) src += detail::block_sample_nll(yb[q], prior);
  }
  src /= static_cast<Real>(N);

  CostBreakdown out;
  out.source_term = src;
  out.log_det_term = -trinicon_fd_log_det(w_fd, d);
  out.total = out.source_term + out.log_det_term;
  return out;
}

// ---------------------------------------------------------------------------
// SOS cost: approximate joint block diagonalization. Every summand is
// nonnegative (Fischer's inequality) and vanishes iff R(m) is block diagonal.

struct SosCost {
  Real total = 0.0;
  std::vector<Real> summands;
  bool regularized = false;
};

inline SosCost sos_cost_from_covariances(const BlockCovarianceSet& cov) {
  SosCost out;
  for (const MatR& r : cov.blocks) {
    bool reg_full = false, reg_b = false;
    MatR lf = regularized_cholesky(r, &reg_full);
    MatR lb = regularized_cholesky(bdiag(r, cov.channels, cov.lags), &reg_b);
    Real s = cholesky_log_det(lb) - cholesky_log_det(lf);
    out.summands.push_back(s);
    out.total += s;
    out.regularized = out.regularized || reg_full || reg_b;
  }
  return out;
}

// Splits the demixed outputs into floor(T / block_len) contiguous blocks and
// evaluates the SOS cost on their lagged covariances.
inline std::vector<std::vector<std::vector<Real>>> split_blocks(
    const std::vector<std::vector<Real>>& y, std::size_t block_len) {
  const std::size_t P = y.size();
  const std::size_t T = y[0].size();
  const std::size_t N = T / block_len;
  std::vector<std::vector<std::vector<Real>>> blocks(
      N, std::vector<std::vector<Real>>(P, std::vector<Real>(block_len)));
  for (std::size_t m = 0; m < N; ++m)
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t t = 0; t < block_len; ++t) blocks[m][p][t] = y[p][m * block_len + t];
  return blocks;
}

inline SosCost sos_cost(const TimeDomainDemixer& dm, const MultichannelSignal& x) {
  dm.validate();
  if (dm.block_shift == 0) throw std::invalid_argument("sos_cost: zero block shift");
  auto y = apply_td_demixer(dm, x.samples);
  auto blocks = split_blocks(y, dm.block_shift);
  if (blocks.empty()) throw std::invalid_argument("sos_cost: signal shorter than one block");
  return sos_cost_from_covariances(estimate_block_covariances(blocks, dm.block_length_d));
}

// Block-Gaussian KL evaluation with plug-in covariances: per block
//   (PD/2) log(2 pi e) + 2 ( sum_q E[-log N(y_q; 0, R_q)] - E[-log N(y; 0, R)] )
// computed through genuine Gaussian negative log-likelihood sample averages
// over the block's lagged vectors. The NLL bracket equals
// log det bdiag R - log det R, so the value exceeds the SOS cost by exactly
// (PD/2) log(2 pi e) per block.
inline Real gaussian_kl_cost(const std::vector<std::vector<std::vector<Real>>>& y_blocks,
                             std::size_t lags) {
  BlockCovarianceSet cov = estimate_block_covariances(y_blocks, lags);
  const std::size_t P = cov.channels;
  const std::size_t D = cov.lags;
  const std::size_t dim = P * D;
  Real total = 0.0;
  for (std::size_t m = 0; m < cov.num_blocks(); ++m) {
    const MatR& r = cov.blocks[m];
    MatR l_full = regularized_cholesky(r);
    std::vector<MatR> l_q(P);
    for (std::size_t q = 0; q < P; ++q) {
      MatR rq(D, D);
      for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j < D; ++j) rq(i, j) = r(q * D + i, q * D + j);
      l_q[q] = regularized_cholesky(rq);
    }
    const auto& block = y_blocks[m];
    const std::size_t T = block[0].size();
    Real nll_joint = 0.0, nll_marg = 0.0;
    std::vector<Real> v(dim), vq(D);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t q = 0; q < P; ++q)
        for (std::size_t d = 0; d < D; ++d)
          v[q * D + d] = (t >= d) ? block[q][t - d] : 0.0;
      std::vector<Real> s = cholesky_solve(l_full, v);
      Real quad = 0.0;
      for (std::size_t i = 0; i < dim; ++i) quad += v[i] * s[i];
      nll_joint += 0.5 * (static_cast<Real>(dim) * std::log(2.0 * kPi) +
                          cholesky_log_det(l_full) + quad);
      for (std::size_t q = 0; q < P; ++q) {
        for (std::size_t d = 0; d < D; ++d) vq[d] = v[q * D + d];
        std::vector<Real> sq = cholesky_solve(l_q[q], vq);
        Real quad_q = 0.0;
        for (std::size_t d = 0; d < D; ++d) quad_q += vq[d] * sq[d];
        nll_marg += 0.5 * (static_cast<Real>(D) * std::log(2.0 * kPi) +
                           cholesky_log_det(l_q[q]) + quad_q);
      }
    }
    nll_joint /= static_cast<Real>(T);
    nll_marg /= static_cast<Real>(T);
    total += 0.5 * static_cast<Real>(dim) * std::log(2.0 * kPi * std::exp(1.0)) +
             2.0 * (nll_marg - nll_joint);
  }
  return total;
}

}  // namespace cbss

#endif  // CBSS_COSTS_HPP_
