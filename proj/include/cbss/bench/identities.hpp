// cbss/bench/identities.hpp

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

// Numerical verification of the analytical identities connecting the three
// algorithm families: the determinant equality of the extended demixing
// matrix, DFT diagonalization of circulants, time-domain vs STFT-domain
// broadband cost equality, layout invariance of the stacked demixing matrix,
// the per-bin factorization of the coupled cost, and nonnegativity of the
// joint block-diagonalization summands.

#ifndef CBSS_BENCH_IDENTITIES_HPP_
#define CBSS_BENCH_IDENTITIES_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cbss/common.hpp"
#include "cbss/costs.hpp"
#include "cbss/covariance.hpp"
#include "cbss/fd_demixer.hpp"
#include "cbss/linalg.hpp"
#include "cbss/rng.hpp"
#include "cbss/toeplitz.hpp"

namespace cbss::bench {

struct IdentityResult {
  std::string name;
  Real max_deviation = 0.0;
  Real tolerance = 0.0;
  std::size_t trials = 0;
  bool pass() const { return max_deviation <= tolerance; }
};

struct IdentityTolerances {
  Real determinant = 1e-9;
  Real circulant = 1e-10;
  Real td_fd = 1e-8;
  Real layout = 1e-12;
  Real reduction = 1e-12;
  Real sos = 1e-10;
};

namespace id_detail {

inline TimeDomainDemixer random_demixer(Rng& rng, std::size_t p, std::size_t l,
                                        std::size_t d, std::size_t shift) {
  TimeDomainDemixer dm;
  dm.w.assign(p, std::vector<std::vector<Real>>(p, std::vector<Real>(l)));
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b)
      for (std::size_t i = 0; i < l; ++i)
        dm.w[a][b][i] = rng.normal() * 0.7 + (a == b && i == 0 ? 1.0 : 0.0);
  dm.block_length_d = d;
  dm.block_shift = shift;
  return dm;
}

inline FrequencyDomainDemixer random_fd_demixer(Rng& rng, std::size_t k, std::size_t p) {
  FrequencyDomainDemixer d = FrequencyDomainDemixer::identity(k, p);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) d.bins[i](a, b) += 0.5 * rng.cnormal();
  return d;
}

inline TimeFrequencyTensor random_tensor(Rng& rng, std::size_t p, std::size_t k,
                                         std::size_t n) {
  TimeFrequencyTensor t;
  t.coeff.assign(p, std::vector<std::vector<Cplx>>(k, std::vector<Cplx>(n)));
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < k; ++b)
      for (std::size_t c = 0; c < n; ++c) t.coeff[a][b][c] = rng.cnormal();
  t.config.one_sided = false;
  t.config.fft_length = k > 1 ? k : 2;
  return t;
}

}  // namespace id_detail

// (1) log|det W_tilde| equals log|det (U^{1_D 0})^T W|.
inline IdentityResult identity_determinant(std::size_t trials, Real tol,
                                           std::uint64_t seed = 12345) {
  Rng rng(seed);
  IdentityResult res{"determinant-equality", 0.0, tol, trials};
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t p = 2 + rng.next_u64() % 2;       // {2, 3}
    std::size_t l = 2 + rng.next_u64() % 4;       // {2..5}
    std::size_t d = 1 + rng.next_u64() % l;       // {1..L}
    auto dm = id_detail::random_demixer(rng, p, l, d, d);
    Real lhs = log_abs_det(extended_demixer(dm), "extended demixer");
    Real rhs = truncated_toeplitz_log_det(dm);
    Real dev = std::abs(lhs - rhs) / std::max<Real>(1.0, std::abs(lhs));
    res.max_deviation = std::max(res.max_deviation, dev);
  }
  return res;
}

// (2) F C F^{-1} is diagonal and matches the filter's transform.
inline IdentityResult identity_circulant(std::size_t trials, Real tol,
                                         std::uint64_t seed = 23456) {
  Rng rng(seed);
  IdentityResult res{"circulant-diagonalization", 0.0, tol, trials};
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t r = std::size_t(1) << (2 + rng.next_u64() % 4);  // {4, 8, 16, 32}
    std::size_t l = 1 + rng.next_u64() % (r / 2);
    std::vector<Real> w(l);
    for (Real& v : w) v = rng.normal();
    DftMatrixHandle f(r);
    MatC dense_f = f.dense();
    MatC prod = dense_f * to_complex(circulant_dense(circulant_first_column(w, r))) *
                dense_f.adjoint();
    std::vector<Cplx> lambda = dft_diagonalize(w, r);
    Real dev = 0.0;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j)
        dev = std::max(dev, i == j ? std::abs(prod(i, j) - lambda[i])
                                   : std::abs(prod(i, j)));
    res.max_deviation = std::max(res.max_deviation, dev);
  }
  return res;
}

// (3) The broadband cost evaluated in the time domain and through the
// windowed DFT path agree.
inline IdentityResult identity_td_fd(std::size_t trials, Real tol,
                                     std::uint64_t seed = 34567) {
  Rng rng(seed);
  IdentityResult res{"td-fd-cost-equality", 0.0, tol, trials};
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t p = 2;
    std::size_t l = 2 + rng.next_u64() % 4;
    std::size_t d = 1 + rng.next_u64() % l;
    std::size_t shift = d + rng.next_u64() % (2 * l);
    auto dm = id_detail::random_demixer(rng, p, l, d, shift);
    std::size_t r_fft = 4;
    while (r_fft < 2 * l) r_fft <<= 1;
    if (rng.next_u64() % 2) r_fft <<= 1;  // also exercise R > 2L

    MultichannelSignal x(p, shift * 5 + 3, 16000);
    for (std::size_t ch = 0; ch < p; ++ch)
      for (Real& v : x.samples[ch]) v = rng.laplace();

    SourcePrior prior = SourcePrior::univariate_laplace();
    CostBreakdown td = trinicon_td_cost(dm, x, prior);
    CostBreakdown fd =
        trinicon_fd_cost(dft_diagonalize_bank(dm, r_fft), l, d, shift, x, prior);
    Real dev = std::abs(td.total - fd.total) / std::max<Real>(1.0, std::abs(td.total));
    res.max_deviation = std::max(res.max_deviation, dev);
  }
  return res;
}

// (4) Bin-major and channel-block evaluations of the coupled cost agree.
inline IdentityResult identity_layout(std::size_t trials, Real tol,
                                      std::uint64_t seed = 45678) {
  Rng rng(seed);
  IdentityResult res{"iva-layout-invariance", 0.0, tol, trials};
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t p = 2 + rng.next_u64() % 2;
    std::size_t k = 2 + rng.next_u64() % 7;  // {2..8}
    std::size_t n = 4 + rng.next_u64() % 8;
    auto d = id_detail::random_fd_demixer(rng, k, p);
    auto x = id_detail::random_tensor(rng, p, k, n);
    SourcePrior prior = SourcePrior::spherical_laplace();
    Real bin_major = iva_cost(d, x, prior).total;
    Real chan_block =
        iva_cost(relayout_iva(d, DemixerLayout::kChannelBlock), x, prior).total;
    res.max_deviation = std::max(res.max_deviation, std::abs(bin_major - chan_block));
  }
  return res;
}

// (5) With the factorized prior the coupled cost equals the per-bin sum.
inline IdentityResult identity_reduction(std::size_t trials, Real tol,
                                         std::uint64_t seed = 56789) {
  Rng rng(seed);
  IdentityResult res{"fdica-iva-reduction", 0.0, tol, trials};
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t p = 2 + rng.next_u64() % 2;
    std::size_t k = 2 + rng.next_u64() % 7;
    std::size_t n = 4 + rng.next_u64() % 8;
    auto d = id_detail::random_fd_demixer(rng, k, p);
    auto x = id_detail::random_tensor(rng, p, k, n);
    Real coupled = iva_cost(d, x, SourcePrior::univariate_laplace()).total;
    Real per_bin = 0.0;
    for (std::size_t kk = 0; kk < k; ++kk) {
      std::vector<std::vector<Cplx>> x_bin(p);
      for (std::size_t ch = 0; ch < p; ++ch) x_bin[ch] = x.coeff[ch][kk];
      per_bin += fdica_cost(d.bins[kk], x_bin, SourcePrior::univariate_laplace()).total;
    }
    res.max_deviation = std::max(res.max_deviation, std::abs(coupled - per_bin));
  }
  return res;
}

// (6) Every SOS summand is nonnegative; the Gaussian KL evaluation sits
// exactly (PD/2) log(2 pi e) per block above the SOS cost.
inline IdentityResult identity_sos(std::size_t trials, Real tol,
                                   std::uint64_t seed = 67890) {
  Rng rng(seed);
  IdentityResult res{"sos-nonnegativity", 0.0, tol, trials};
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t p = 2 + rng.next_u64() % 2;
    std::size_t d = 1 + rng.next_u64() % 3;
    std::size_t n_blocks = 2 + rng.next_u64() % 3;
    std::size_t block_len = d + 8 + rng.next_u64() % 24;
    std::vector<std::vector<std::vector<Real>>> blocks(
        n_blocks, std::vector<std::vector<Real>>(p, std::vector<Real>(block_len)));
    for (auto& block : blocks)
      for (auto& ch : block)
        for (Real& v : ch) v = rng.normal();
    // Correlate the channels so the off-diagonal blocks are substantial.
    for (auto& block : blocks)
      for (std::size_t q = 1; q < p; ++q)
        for (std::size_t i = 0; i < block_len; ++i)
          block[q][i] = 0.6 * block[q][i] + 0.4 * block[0][i];

    BlockCovarianceSet cov = estimate_block_covariances(blocks, d);
    SosCost sos = sos_cost_from_covariances(cov);
    for (Real s : sos.summands)
      res.max_deviation = std::max(res.max_deviation, -s);  // must be >= -tol

    // Second sub-check under the same identity: the Gaussian KL evaluation
    // minus the SOS cost equals N (PD/2) log(2 pi e). Its tolerance is 100x
    // the summand tolerance (1e-8 at defaults); the deviation is scaled so a
    // single PASS/FAIL line covers both.
    Real kl = gaussian_kl_cost(blocks, d);
    Real expected_gap = static_cast<Real>(n_blocks) *
                        (static_cast<Real>(p * d) / 2.0) *
                        std::log(2.0 * kPi * std::exp(1.0));
    Real gap_dev = std::abs((kl - sos.total) - expected_gap);
    res.max_deviation = std::max(res.max_deviation, gap_dev / 100.0);
  }
  return res;
}

inline std::vector<IdentityResult> run_all_identities(
    std::size_t trials_override = 0, const IdentityTolerances& tol = IdentityTolerances{}) {
  auto n = [&](std::size_t dflt) { return trials_override ? trials_override : dflt; };
  return {
      identity_determinant(n(200), tol.determinant),
      identity_circulant(n(100), tol.circulant),
      identity_td_fd(n(50), tol.td_fd),
      identity_layout(n(50), tol.layout),
      identity_reduction(n(50), tol.reduction),
      identity_sos(n(100), tol.sos),
  };
}

}  // namespace cbss::bench

#endif  // CBSS_BENCH_IDENTITIES_HPP_
