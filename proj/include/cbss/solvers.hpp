// cbss/solvers.hpp

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

// Iterative optimizers for the three algorithm families. All solvers start
// from the identity demixer, are deterministic given (input, config), record
// the cost once per accepted iteration (trace = initial cost + one entry per
// iteration performed), and return the best demixer seen when an update
// diverges instead of a NaN system.

#ifndef CBSS_SOLVERS_HPP_
#define CBSS_SOLVERS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "cbss/common.hpp"
#include "cbss/costs.hpp"
#include "cbss/covariance.hpp"
#include "cbss/fd_demixer.hpp"
#include "cbss/gradients.hpp"
#include "cbss/prior.hpp"
#include "cbss/toeplitz.hpp"

namespace cbss {

enum class Termination { kMaxIterations, kTolerance, kDivergence };

inline const char* termination_name(Termination t) {
  switch (t) {
    case Termination::kMaxIterations: return "max-iter";
    case Termination::kTolerance: return "tolerance";
    case Termination::kDivergence: return "divergence";
  }
  return "?";
}

struct SolverConfig {
  std::size_t iterations = 100;
  Real step_size = 0.1;
  std::uint64_t seed = 0;
  Real tolerance = 0.0;  // stop when relative cost decrease falls below this
  SourcePrior prior = SourcePrior::spherical_laplace();
  bool trace = true;

  static SolverConfig gradiva_defaults() {
    SolverConfig c;
    c.iterations = 1000;
    c.step_size = 0.1;
    return c;
  }
  static SolverConfig auxiva_defaults() {
    SolverConfig c;
    c.iterations = 100;
    return c;
  }
  static SolverConfig trinicon_defaults() {
    SolverConfig c;
    c.iterations = 1000;
    c.step_size = 0.005;
    return c;
  }
  static SolverConfig fdica_defaults() {
    SolverConfig c;
    c.iterations = 1000;
    c.step_size = 0.1;
    c.prior = SourcePrior::univariate_laplace();
    return c;
  }
};

struct FdSolverReport {
  FrequencyDomainDemixer demixer;
  std::vector<Real> cost_trace;
  std::size_t iterations_performed = 0;
  Termination termination = Termination::kMaxIterations;
  std::vector<std::string> warnings;
};

struct TdSolverReport {
  TimeDomainDemixer demixer;
  std::vector<Real> cost_trace;
  std::size_t iterations_performed = 0;
  Termination termination = Termination::kMaxIterations;
  std::vector<std::string> warnings;
};

namespace detail {

inline bool finite(Real v) { return std::isfinite(v); }

// The STFT-domain solvers normalize the observations so the coupled norms
// r_q(n) have unit scale (mean coefficient power = number of bins). The
// demixing problem is invariant to this diagonal scaling, but the gradient
// step sizes and the stationary row scales are not; normalizing makes the
// documented step sizes meaningful for any input level.
inline TimeFrequencyTensor normalize_scale(const TimeFrequencyTensor& x, Real* scale_out) {
  Real pow = 0.0;
  std::size_t count = 0;
  for (const auto& ch : x.coeff)
    for (const auto& bin : ch)
      for (Cplx v : bin) {
        pow += std::norm(v);
        ++count;
      }
  Real mean = count ? pow / static_cast<Real>(count) : 0.0;
  Real target = static_cast<Real>(x.bins());
  Real s = mean > 0.0 ? std::sqrt(target / mean) : 1.0;
  if (scale_out) *scale_out = s;
  TimeFrequencyTensor y = x;
  for (auto& ch : y.coeff)
    for (auto& bin : ch)
      for (Cplx& v : bin) v *= s;
  return y;
}

template <typename Report, typename Demixer>
bool accept_iteration(Report& rep, Demixer& best, Real& best_cost, const Demixer& current,
                      Real cost, Real tolerance) {
  if (!finite(cost)) {
    rep.termination = Termination::kDivergence;
    rep.warnings.push_back("divergence detected; returning best demixer seen");
    return false;
  }
  Real prev = rep.cost_trace.back();
  rep.cost_trace.push_back(cost);
  ++rep.iterations_performed;
  if (cost < best_cost) {
    best_cost = cost;
    best = current;
  }
  if (tolerance > 0.0) {
    Real denom = std::max<Real>(std::abs(prev), 1e-12);
    if ((prev - cost) / denom < tolerance) {
      rep.termination = Termination::kTolerance;
      return false;
    }
  }
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Natural-gradient IVA:  W(k) <- W(k) + mu (I - E[phi(y) y^H]) W(k).

inline FdSolverReport run_gradiva(const TimeFrequencyTensor& x_raw, const SolverConfig& cfg) {
  const std::size_t P = x_raw.channels();
  if (x_raw.frames() < P) throw std::invalid_argument("run_gradiva: needs at least P frames");
  Real scale = 1.0;
  TimeFrequencyTensor x = detail::normalize_scale(x_raw, &scale);
  FdSolverReport rep;
  rep.demixer = FrequencyDomainDemixer::identity(x.bins(), P);
  FrequencyDomainDemixer w = rep.demixer;

  Real best_cost = iva_cost(w, x, cfg.prior).total;
  rep.cost_trace.push_back(best_cost);

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    std::vector<MatC> dir = natural_gradient_direction(w, x, cfg.prior);
    FrequencyDomainDemixer next = w;
    for (std::size_t k = 0; k < next.num_bins(); ++k)
      next.bins[k] = next.bins[k] + dir[k] * Cplx(cfg.step_size, 0.0);
    Real cost;
    try {
      cost = iva_cost(next, x, cfg.prior).total;
    } catch (const SingularMatrixError&) {
      cost = std::numeric_limits<Real>::quiet_NaN();
    }
    if (!detail::accept_iteration(rep, rep.demixer, best_cost, next, cost, cfg.tolerance))
      break;
    w = next;
  }
  if (rep.termination == Termination::kMaxIterations && rep.iterations_performed == cfg.iterations)
    rep.demixer = w;  // full run: report the final iterate (equals best in practice)
  // Fold the input normalization into the demixer so it applies to the
  // caller's unscaled observations.
  for (auto& m : rep.demixer.bins) m = m * Cplx(scale, 0.0);
  return rep;
}

// ---------------------------------------------------------------------------
// auxIVA (majorize-minimize, iterative projection). One iteration sweeps
// sources (outer) and bins (inner, ascending):
//   V_q(k) = E[ x x^H / max(r_q, eps) ]
//   u      = (W(k) V_q(k))^{-1} e_q
//   row_q(W(k)) <- u^H scaled so that u^H V_q u = 2,
// the exact minimizer of the majorized cost with the factor-2 log-det term,
// which makes the cost trace non-increasing per sweep.

inline FdSolverReport run_auxiva(const TimeFrequencyTensor& x_raw, const SolverConfig& cfg) {
  const std::size_t P = x_raw.channels();
  const std::size_t K = x_raw.bins();
  const std::size_t N = x_raw.frames();
  if (N < P) throw std::invalid_argument("run_auxiva: needs at least P frames");
  Real scale = 1.0;
  TimeFrequencyTensor x = detail::normalize_scale(x_raw, &scale);

  FdSolverReport rep;
  rep.demixer = FrequencyDomainDemixer::identity(K, P);
  FrequencyDomainDemixer w = rep.demixer;
  Real best_cost = iva_cost(w, x, cfg.prior).total;
  rep.cost_trace.push_back(best_cost);
  bool warned_singular = false;

  std::vector<Real> r(N);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    for (std::size_t q = 0; q < P; ++q) {
      // Coupling norms of source q under the current demixer.
      for (std::size_t n = 0; n < N; ++n) {
        Real acc = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          Cplx y(0.0, 0.0);
          for (std::size_t p = 0; p < P; ++p) y += w.bins[k](q, p) * x.coeff[p][k][n];
          acc += std::norm(y);
        }
        r[n] = std::max(std::sqrt(acc), cfg.prior.floor);
      }
      for (std::size_t k = 0; k < K; ++k) {
        MatC v(P, P);
        for (std::size_t n = 0; n < N; ++n) {
          Real wgt = 1.0 / (r[n] * static_cast<Real>(N));
          for (std::size_t a = 0; a < P; ++a)
            for (std::size_t b = 0; b < P; ++b)
              v(a, b) += x.coeff[a][k][n] * std::conj(x.coeff[b][k][n]) * wgt;
        }
        MatC wv = w.bins[k] * v;
        std::vector<Cplx> e(P, Cplx(0.0, 0.0));
        e[q] = Cplx(1.0, 0.0);
        std::vector<Cplx> u;
        try {
          u = solve(wv, e, "auxIVA system");
        } catch (const SingularMatrixError&) {
          // delta-regularize V and retry once.
          Real tr = 0.0;
          for (std::size_t a = 0; a < P; ++a) tr += std::abs(v(a, a));
          Real delta = std::max<Real>(1e-9 * tr / P, 1e-30);
          for (std::size_t a = 0; a < P; ++a) v(a, a) += delta;
          wv = w.bins[k] * v;
          u = solve(wv, e, "auxIVA regularized system");
          if (!warned_singular) {
            rep.warnings.push_back("singular weighted covariance regularized at bin " +
                                   std::to_string(k));
            warned_singular = true;
          }
        }
        // u^H V u is real positive for Hermitian positive definite V.
        Cplx quad(0.0, 0.0);
        for (std::size_t a = 0; a < P; ++a)
          for (std::size_t b = 0; b < P; ++b) quad += std::conj(u[a]) * v(a, b) * u[b];
        Real scale = std::sqrt(2.0 / std::max(quad.real(), 1e-300));
        for (std::size_t p = 0; p < P; ++p)
          w.bins[k](q, p) = std::conj(u[p]) * scale;  // row q = u^H
      }
    }
    Real cost;
    try {
      cost = iva_cost(w, x, cfg.prior).total;
    } catch (const SingularMatrixError&) {
      cost = std::numeric_limits<Real>::quiet_NaN();
    }
    if (!detail::accept_iteration(rep, rep.demixer, best_cost, w, cost, cfg.tolerance))
      break;
  }
  if (rep.termination == Termination::kMaxIterations && rep.iterations_performed == cfg.iterations)
    rep.demixer = w;
  for (auto& m : rep.demixer.bins) m = m * Cplx(scale, 0.0);
  return rep;
}

// ---------------------------------------------------------------------------
// FD-ICA: independent per-bin natural-gradient ICA followed by a greedy
// permutation alignment that matches magnitude envelopes of adjacent bins,
// propagating upward from the lowest bin. Per-bin permutations leave the
// FD-ICA cost unchanged.

struct FdicaReport {
  FdSolverReport solver;
  // alignment[k][q] = source index (row of the unaligned demixer) that ends
  // up at output q of bin k.
  std::vector<std::vector<std::size_t>> alignment;
};

namespace detail {

inline Real envelope_correlation(const std::vector<Real>& a, const std::vector<Real>& b) {
  const std::size_t n = a.size();
  Real ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  Real mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  Real num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  Real den = std::sqrt(da * db);
  return den > 0.0 ? num / den : 0.0;
}

inline void all_permutations(std::size_t p, std::vector<std::vector<std::size_t>>& out) {
  std::vector<std::size_t> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  do {
    out.push_back(idx);
  } while (std::next_permutation(idx.begin(), idx.end()));
}

}  // namespace detail

inline FdicaReport run_fdica(const TimeFrequencyTensor& x, const SolverConfig& cfg) {
  SolverConfig per_bin = cfg;
  per_bin.prior = SourcePrior::univariate_laplace(cfg.prior.floor);
  FdicaReport rep;
  rep.solver = run_gradiva(x, per_bin);  // univariate prior decouples the bins

  const std::size_t P = x.channels();
  const std::size_t K = x.bins();
  const std::size_t N = x.frames();
  FrequencyDomainDemixer& w = rep.solver.demixer;

  // Magnitude envelopes of the unaligned outputs.
  std::vector<std::vector<std::vector<Real>>> env(
      K, std::vector<std::vector<Real>>(P, std::vector<Real>(N)));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t q = 0; q < P; ++q) {
        Cplx y(0.0, 0.0);
        for (std::size_t p = 0; p < P; ++p) y += w.bins[k](q, p) * x.coeff[p][k][n];
        env[k][q][n] = std::abs(y);
      }

  std::vector<std::vector<std::size_t>> perms;
  detail::all_permutations(P, perms);

  rep.alignment.assign(K, std::vector<std::size_t>(P));
  std::iota(rep.alignment[0].begin(), rep.alignment[0].end(), 0);
  std::vector<std::vector<Real>> ref = env[0];
  for (std::size_t k = 1; k < K; ++k) {
    Real best = -1e300;
    std::size_t best_perm = 0;
    for (std::size_t pi = 0; pi < perms.size(); ++pi) {
      Real score = 0.0;
      for (std::size_t q = 0; q < P; ++q)
        score += detail::envelope_correlation(env[k][perms[pi][q]], ref[q]);
      if (score > best) {
        best = score;
        best_perm = pi;
      }
    }
    rep.alignment[k] = perms[best_perm];
    for (std::size_t q = 0; q < P; ++q) ref[q] = env[k][rep.alignment[k][q]];
  }

  // Apply the alignment: output q of bin k takes row alignment[k][q].
  for (std::size_t k = 1; k < K; ++k) {
    MatC aligned(P, P);
    for (std::size_t q = 0; q < P; ++q)
      for (std::size_t p = 0; p < P; ++p) aligned(q, p) = w.bins[k](rep.alignment[k][q], p);
    w.bins[k] = aligned;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// SOS-TRINICON: nonholonomic natural-gradient descent on the joint
// block-diagonalization cost. The unconstrained update
//   dW = (1/N) sum_m W (R(m) - bdiag R(m)) (bdiag R(m))^{-1}
// is projected back onto the Toeplitz parameterization (length-L filters) by
// averaging along the D diagonals of each 2L x D block, so the iterate never
// leaves the FIR manifold. dW vanishes at block-diagonal statistics
// irrespective of the output scaling (the nonholonomic property).

// Update direction in filter coordinates for given block covariances.
inline std::vector<std::vector<std::vector<Real>>> trinicon_sos_update(
    const TimeDomainDemixer& dm, const BlockCovarianceSet& cov, bool* regularized = nullptr) {
  const std::size_t P = dm.channels();
  const std::size_t L = dm.filter_length();
  const std::size_t D = dm.block_length_d;
  const std::size_t dim = P * D;
  if (cov.channels != P || cov.lags != D)
    throw std::invalid_argument("trinicon_sos_update: covariance shape mismatch");

  MatR m_total(dim, dim);
  bool reg_any = false;
  for (const MatR& r : cov.blocks) {
    MatR bd = bdiag(r, P, D);
    bool reg = false;
    MatR l = regularized_cholesky(bd, &reg);
    reg_any = reg_any || reg;
    // (R - bdiag R) (bdiag R)^{-1}, solved block-column-wise.
    MatR off = r - bd;
    std::vector<Real> col(D);
    for (std::size_t qc = 0; qc < P; ++qc) {
      // Extract the Cholesky factor of the (qc, qc) sub-block from l.
      MatR lq(D, D);
      for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j <= i; ++j) lq(i, j) = l(qc * D + i, qc * D + j);
      // Column block qc of off * inv(bdiag R) only involves the qc sub-block;
      // symmetric solve per row.
      for (std::size_t rr = 0; rr < dim; ++rr) {
        for (std::size_t d = 0; d < D; ++d) col[d] = off(rr, qc * D + d);
        std::vector<Real> z = cholesky_solve(lq, col);
        for (std::size_t d = 0; d < D; ++d) m_total(rr, qc * D + d) += z[d];
      }
    }
  }
  const Real inv_n = 1.0 / static_cast<Real>(cov.num_blocks());
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) m_total(i, j) *= inv_n;
  if (regularized) *regularized = reg_any;

  // dW = W * M in dense block form, then diagonal-average back to filters.
  std::vector<std::vector<std::vector<Real>>> delta(
      P, std::vector<std::vector<Real>>(P, std::vector<Real>(L, 0.0)));
  for (std::size_t p = 0; p < P; ++p) {
    // Dense row block of W: [W_p1 ... W_pP] (2L x PD).
    MatR row_block(2 * L, dim);
    for (std::size_t q = 0; q < P; ++q)
      for (std::size_t j = 0; j < D; ++j)
        for (std::size_t l = 0; l < L; ++l) row_block(l + j, q * D + j) = dm.w[p][q][l];
    MatR prod = row_block * m_total;  // 2L x PD
    for (std::size_t q = 0; q < P; ++q)
      for (std::size_t l = 0; l < L; ++l) {
        Real acc = 0.0;
        for (std::size_t j = 0; j < D; ++j) acc += prod(l + j, q * D + j);
        delta[p][q][l] = acc / static_cast<Real>(D);
      }
  }
  return delta;
}

inline TdSolverReport run_trinicon_sos(const MultichannelSignal& x, std::size_t filter_len,
                                       std::size_t block_len_d, std::size_t block_shift,
                                       const SolverConfig& cfg) {
  const std::size_t P = x.channels();
  if (trinicon_block_count(x.length(), block_shift) < 2)
    throw std::invalid_argument("run_trinicon_sos: signal shorter than two blocks");

  TdSolverReport rep;
  TimeDomainDemixer w = TimeDomainDemixer::identity(P, filter_len, block_len_d, block_shift);
  // Center-tap identity start: keeps room for noncausal relative taps.
  if (filter_len > 1) {
    for (std::size_t p = 0; p < P; ++p) {
      w.w[p][p][0] = 0.0;
      w.w[p][p][filter_len / 2] = 1.0;
    }
  }
  rep.demixer = w;

  auto evaluate = [&](const TimeDomainDemixer& dm) { return sos_cost(dm, x); };

  SosCost c0 = evaluate(w);
  Real best_cost = c0.total;
  rep.cost_trace.push_back(c0.total);
  bool warned_reg = c0.regularized;
  if (warned_reg) rep.warnings.push_back("covariance regularization applied");

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    auto y = apply_td_demixer(w, x.samples);
    auto blocks = split_blocks(y, block_shift);
    BlockCovarianceSet cov = estimate_block_covariances(blocks, block_len_d);
    bool reg = false;
    auto delta = trinicon_sos_update(w, cov, &reg);
    if (reg && !warned_reg) {
      rep.warnings.push_back("covariance regularization applied");
      warned_reg = true;
    }
    TimeDomainDemixer next = w;
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t q = 0; q < P; ++q)
        for (std::size_t l = 0; l < filter_len; ++l)
          next.w[p][q][l] -= cfg.step_size * delta[p][q][l];
    Real cost;
    try {
      cost = evaluate(next).total;
    } catch (const SingularMatrixError&) {
      cost = std::numeric_limits<Real>::quiet_NaN();
    }
    if (!detail::accept_iteration(rep, rep.demixer, best_cost, next, cost, cfg.tolerance))
      break;
    w = next;
  }
  if (rep.termination == Termination::kMaxIterations && rep.iterations_performed == cfg.iterations)
    rep.demixer = w;
  return rep;
}

}  // namespace cbss

#endif  // CBSS_SOLVERS_HPP_
