// cbss/bss_eval.hpp

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

// BSS-eval style decomposition of each estimate into
//   s_target : LS projection onto proj_len delayed copies of the assigned
//              reference image,
//   e_interf : projection onto the joint delay-span of all references minus
//              s_target,
//   e_artif  : the remainder,
// with SDR = ||s_t||^2 / ||e_i + e_a||^2, SIR = ||s_t||^2 / ||e_i||^2 and
// SAR = ||s_t + e_i||^2 / ||e_a||^2 in dB. Ratios are capped at +200 dB so
// reports stay finite. The estimate->reference assignment is the bijection
// maximizing mean SIR. References are source images at a reference
// microphone.

#ifndef CBSS_BSS_EVAL_HPP_
#define CBSS_BSS_EVAL_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "cbss/common.hpp"
#include "cbss/fft.hpp"
#include "cbss/linalg.hpp"

namespace cbss {

struct BssEvalChannel {
  Real sdr_db = 0.0;
  Real sir_db = 0.0;
  Real sar_db = 0.0;
  std::size_t assigned_reference = 0;
  Real target_energy = 0.0;
  Real interf_energy = 0.0;
  Real artifact_energy = 0.0;
};

struct SeparationReport {
  std::vector<BssEvalChannel> channels;    // one per estimate channel
  std::vector<std::size_t> permutation;    // estimate q -> reference
};

// Optional capture of the decomposition signals for the chosen assignment.
struct DecompositionDetail {
  std::vector<std::vector<Real>> s_target;
  std::vector<std::vector<Real>> e_interf;
  std::vector<std::vector<Real>> e_artif;
};

namespace bss_detail {

inline Real energy(const std::vector<Real>& v) {
  Real e = 0.0;
  for (Real x : v) e += x * x;
  return e;
}

inline Real ratio_db(Real num, Real den) {
  if (!(num > 0.0)) return -200.0;
  if (den <= num * 1e-18) return 200.0;  // residual at rounding level
  Real v = 10.0 * std::log10(num / den);
  return std::clamp(v, -200.0, 200.0);
}

// sum_n a(n) b(n + m) for m = -(max_lag-1) .. (max_lag-1), index shifted.
inline std::vector<Real> corr_both(const std::vector<Real>& a, const std::vector<Real>& b,
                                   std::size_t max_lag) {
  std::vector<Real> rev(a.rbegin(), a.rend());
  std::vector<Real> full = convolve(rev, b);  // full[k] = sum a(n) b(k - (Ta-1) + n)
  std::vector<Real> out(2 * max_lag - 1, 0.0);
  const long center = static_cast<long>(a.size()) - 1;
  for (long m = -(static_cast<long>(max_lag) - 1); m < static_cast<long>(max_lag); ++m) {
    long idx = center + m;
    if (idx >= 0 && idx < static_cast<long>(full.size()))
      out[m + max_lag - 1] = full[idx];
  }
  return out;
}

// y(n) += coef[d] x(n - d), over the overlap of acc and the shifted x.
inline void add_filtered(std::vector<Real>& acc, const std::vector<Real>& x,
                         const Real* coef, std::size_t taps) {
  for (std::size_t d = 0; d < taps; ++d) {
    Real c = coef[d];
    if (c == 0.0) continue;
    const std::size_t stop = std::min(acc.size(), x.size() + d);
    for (std::size_t n = d; n < stop; ++n) acc[n] += c * x[n - d];
  }
}

}  // namespace bss_detail

inline SeparationReport bss_eval(const std::vector<std::vector<Real>>& estimates,
                                 const std::vector<std::vector<Real>>& references,
                                 std::size_t proj_len = 512,
                                 DecompositionDetail* detail = nullptr) {
  using namespace bss_detail;
  if (proj_len == 0) throw std::invalid_argument("bss_eval: proj_len must be >= 1");
  const std::size_t E = estimates.size();
  const std::size_t S = references.size();
  if (E == 0 || S == 0) throw std::invalid_argument("bss_eval: empty inputs");
  std::size_t T = estimates[0].size();
  for (const auto& v : estimates) T = std::min(T, v.size());
  for (const auto& v : references) T = std::min(T, v.size());
  if (T <= proj_len) throw std::invalid_argument("bss_eval: signals shorter than proj_len");

  // All least-squares fits use the zero-padded correlations, i.e. the exact
  // normal equations on the extended support [0, T + proj_len); signals and
  // energies are materialized on that same support so the decomposition is
  // exactly orthogonal and additive.
  const std::size_t T_ext = T + proj_len;
  std::vector<std::vector<Real>> ref(S), est(E);
  for (std::size_t j = 0; j < S; ++j) {
    ref[j].assign(references[j].begin(), references[j].begin() + T);
    if (!(energy(ref[j]) > 0.0))
      throw std::invalid_argument("bss_eval: zero-energy reference");
  }
  for (std::size_t q = 0; q < E; ++q) {
    est[q].assign(estimates[q].begin(), estimates[q].begin() + T);
    est[q].resize(T_ext, 0.0);
  }

  // Joint Gram matrix over the delay-span of all references.
  const std::size_t dim = S * proj_len;
  MatR gram(dim, dim);
  std::vector<std::vector<std::vector<Real>>> cc(S, std::vector<std::vector<Real>>(S));
  for (std::size_t j = 0; j < S; ++j)
    for (std::size_t j2 = 0; j2 < S; ++j2) cc[j][j2] = corr_both(ref[j], ref[j2], proj_len);
  for (std::size_t j = 0; j < S; ++j)
    for (std::size_t d = 0; d < proj_len; ++d)
      for (std::size_t j2 = 0; j2 < S; ++j2)
        for (std::size_t d2 = 0; d2 < proj_len; ++d2) {
          // sum_n ref_j(n-d) ref_j2(n-d2) = cc[j][j2] at lag (d - d2)
          long m = static_cast<long>(d) - static_cast<long>(d2);
          gram(j * proj_len + d, j2 * proj_len + d2) = cc[j][j2][m + proj_len - 1];
        }
  // Plain Cholesky first; degenerate reference sets get an escalating ridge.
  MatR chol;
  if (!cholesky(gram, chol)) {
    Real diag_mean = 0.0;
    for (std::size_t i = 0; i < dim; ++i) diag_mean += gram(i, i);
    diag_mean /= static_cast<Real>(dim);
    Real ridge = 1e-12 * diag_mean;
    MatR reg = gram;
    bool ok = false;
    for (int attempt = 0; attempt < 20 && !ok; ++attempt, ridge *= 10.0) {
      for (std::size_t i = 0; i < dim; ++i) reg(i, i) = gram(i, i) + ridge;
      ok = cholesky(reg, chol);
    }
    if (!ok)
      throw SingularMatrixError("bss_eval: joint reference Gram not positive definite");
  }

  // Per-reference autocorrelation for the target-only projections.
  std::vector<std::vector<Real>> auto_r(S);
  for (std::size_t j = 0; j < S; ++j) auto_r[j] = cross_correlation(ref[j], ref[j], proj_len);

  // Target-only Toeplitz solves with a fallback ridge for degenerate refs.
  auto solve_target = [&](std::size_t j, const std::vector<Real>& rhs_vec) {
    try {
      return levinson_solve(auto_r[j], rhs_vec);
    } catch (const SingularMatrixError&) {
      std::vector<Real> r = auto_r[j];
      Real ridge = 1e-12 * auto_r[j][0];
      for (int attempt = 0; attempt < 20; ++attempt, ridge *= 10.0) {
        r[0] = auto_r[j][0] + ridge;
        try {
          return levinson_solve(r, rhs_vec);
        } catch (const SingularMatrixError&) {
        }
      }
      throw;
    }
  };

  // Decompose every estimate against every candidate target.
  struct Decomp {
    std::vector<Real> s_joint;
    Real e_art = 0.0;
  };
  std::vector<Decomp> joint(E);
  // target_energy[q][j], interf_energy[q][j]
  std::vector<std::vector<Real>> et(E, std::vector<Real>(S, 0.0));
  std::vector<std::vector<Real>> ei(E, std::vector<Real>(S, 0.0));

  for (std::size_t q = 0; q < E; ++q) {
    std::vector<Real> rhs(dim);
    for (std::size_t j = 0; j < S; ++j) {
      std::vector<Real> c = cross_correlation(est[q], ref[j], proj_len);
      for (std::size_t d = 0; d < proj_len; ++d) rhs[j * proj_len + d] = c[d];
    }
    std::vector<Real> coef = cholesky_solve(chol, rhs);
    std::vector<Real> s_joint(T_ext, 0.0);
    for (std::size_t j = 0; j < S; ++j)
      add_filtered(s_joint, ref[j], coef.data() + j * proj_len, proj_len);
    std::vector<Real> e_art(T_ext);
    for (std::size_t n = 0; n < T_ext; ++n) e_art[n] = est[q][n] - s_joint[n];
    joint[q].e_art = energy(e_art);
    joint[q].s_joint = std::move(s_joint);

    for (std::size_t j = 0; j < S; ++j) {
      std::vector<Real> c = cross_correlation(est[q], ref[j], proj_len);
      std::vector<Real> g = solve_target(j, c);
      std::vector<Real> s_t(T_ext, 0.0);
      add_filtered(s_t, ref[j], g.data(), proj_len);
      et[q][j] = energy(s_t);
      std::vector<Real> e_i(T_ext);
      for (std::size_t n = 0; n < T_ext; ++n) e_i[n] = joint[q].s_joint[n] - s_t[n];
      ei[q][j] = energy(e_i);
    }
  }

  // Assignment maximizing mean SIR over all bijections (P is small).
  std::vector<std::size_t> best_perm(E);
  std::iota(best_perm.begin(), best_perm.end(), 0);
  if (E == S && E > 1) {
    std::vector<std::size_t> perm(E);
    std::iota(perm.begin(), perm.end(), 0);
    Real best_score = -1e300;
    std::vector<std::size_t> p = perm;
    do {
      Real score = 0.0;
      for (std::size_t q = 0; q < E; ++q) score += ratio_db(et[q][p[q]], ei[q][p[q]]);
      if (score > best_score) {
        best_score = score;
        best_perm = p;
      }
    } while (std::next_permutation(p.begin(), p.end()));
  } else {
    for (std::size_t q = 0; q < E; ++q) {
      Real best_score = -1e300;
      for (std::size_t j = 0; j < S; ++j) {
        Real s = ratio_db(et[q][j], ei[q][j]);
        if (s > best_score) {
          best_score = s;
          best_perm[q] = j;
        }
      }
    }
  }

  SeparationReport rep;
  rep.permutation = best_perm;
  rep.channels.resize(E);
  if (detail) {
    detail->s_target.assign(E, {});
    detail->e_interf.assign(E, {});
    detail->e_artif.assign(E, {});
  }
  for (std::size_t q = 0; q < E; ++q) {
    const std::size_t j = best_perm[q];
    BssEvalChannel& ch = rep.channels[q];
    ch.assigned_reference = j;
    ch.target_energy = et[q][j];
    ch.interf_energy = ei[q][j];
    ch.artifact_energy = joint[q].e_art;
    ch.sdr_db = ratio_db(et[q][j], ei[q][j] + joint[q].e_art);
    ch.sir_db = ratio_db(et[q][j], ei[q][j]);
    ch.sar_db = ratio_db(energy(joint[q].s_joint), joint[q].e_art);
    if (detail) {
      std::vector<Real> c = cross_correlation(est[q], ref[j], proj_len);
      std::vector<Real> g = solve_target(j, c);
      std::vector<Real> s_t(T_ext, 0.0);
      add_filtered(s_t, ref[j], g.data(), proj_len);
      std::vector<Real> e_i(T_ext), e_a(T_ext);
      for (std::size_t n = 0; n < T_ext; ++n) {
        e_i[n] = joint[q].s_joint[n] - s_t[n];
        e_a[n] = est[q][n] - joint[q].s_joint[n];
      }
      detail->s_target[q] = std::move(s_t);
      detail->e_interf[q] = std::move(e_i);
      detail->e_artif[q] = std::move(e_a);
    }
  }
  return rep;
}

}  // namespace cbss

#endif  // CBSS_BSS_EVAL_HPP_
