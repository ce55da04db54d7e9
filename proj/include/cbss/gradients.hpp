// cbss/gradients.hpp

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

// Analytic gradients of the STFT-domain costs. Complex entries are packed as
// grad = dJ/dRe(W_qp) + j dJ/dIm(W_qp), i.e. twice the conjugate Wirtinger
// derivative, so real/imag central differences check the entries directly.
// With the spherical-Laplace score phi_q(k,n) = y_q(k,n) / max(r_q(n), eps):
//
//   grad(k) = E[phi(y)(k) x(k)^H] - 2 W(k)^{-H}
//
// The natural-gradient update direction used by the solvers is the classic
//   (I - E[phi(y)(k) y(k)^H]) W(k),
// whose fixed point is E[phi y^H] = I per bin.

#ifndef CBSS_GRADIENTS_HPP_
#define CBSS_GRADIENTS_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

#include "cbss/common.hpp"
#include "cbss/fd_demixer.hpp"
#include "cbss/linalg.hpp"
#include "cbss/prior.hpp"
#include "cbss/stft.hpp"

namespace cbss {

namespace detail {

// Demixed outputs y[q][k][n] plus the coupling norms r[q][n].
inline void demix_outputs(const FrequencyDomainDemixer& d, const TimeFrequencyTensor& x,
                          std::vector<std::vector<std::vector<Cplx>>>& y,
                          std::vector<std::vector<Real>>& r) {
  const std::size_t P = x.channels(), K = x.bins(), N = x.frames();
  y.assign(P, std::vector<std::vector<Cplx>>(K, std::vector<Cplx>(N)));
  r.assign(P, std::vector<Real>(N, 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    const MatC& w = d.bins[k];
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t q = 0; q < P; ++q) {
        Cplx acc(0.0, 0.0);
        for (std::size_t p = 0; p < P; ++p) acc += w(q, p) * x.coeff[p][k][n];
        y[q][k][n] = acc;
        r[q][n] += std::norm(acc);
      }
  }
  for (std::size_t q = 0; q < P; ++q)
    for (std::size_t n = 0; n < N; ++n) r[q][n] = std::sqrt(r[q][n]);
}

}  // namespace detail

// Per-bin gradient of iva_cost (spherical prior) or of the sum of per-bin
// FD-ICA costs (univariate prior; the score then uses r = |y| per bin).
inline std::vector<MatC> iva_grad(const FrequencyDomainDemixer& d,
                                  const TimeFrequencyTensor& x,
                                  const SourcePrior& prior) {
  const std::size_t P = x.channels(), K = x.bins(), N = x.frames();
  std::vector<std::vector<std::vector<Cplx>>> y;
  std::vector<std::vector<Real>> r;
  detail::demix_outputs(d, x, y, r);

  std::vector<MatC> grad(K);
  for (std::size_t k = 0; k < K; ++k) {
    MatC g(P, P);
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t q = 0; q < P; ++q) {
        Real rq = prior.kind == PriorKind::kUnivariateLaplace ? std::abs(y[q][k][n])
                                                              : r[q][n];
        Cplx phi = laplace_score(y[q][k][n], rq, prior.floor);
        for (std::size_t p = 0; p < P; ++p) g(q, p) += phi * std::conj(x.coeff[p][k][n]);
      }
    const Real inv_n = 1.0 / static_cast<Real>(N);
    MatC w_inv_h = inverse(d.bins[k], "demixing matrix").adjoint();
    for (std::size_t q = 0; q < P; ++q)
      for (std::size_t p = 0; p < P; ++p) g(q, p) = g(q, p) * inv_n - 2.0 * w_inv_h(q, p);
    grad[k] = std::move(g);
  }
  return grad;
}

inline std::vector<MatC> fdica_grad(const FrequencyDomainDemixer& d,
                                    const TimeFrequencyTensor& x, Real floor = 1e-8) {
  return iva_grad(d, x, SourcePrior::univariate_laplace(floor));
}

// Natural-gradient update directions (I - E[phi y^H]) W(k) per bin.
inline std::vector<MatC> natural_gradient_direction(const FrequencyDomainDemixer& d,
                                                    const TimeFrequencyTensor& x,
                                                    const SourcePrior& prior) {
  const std::size_t P = x.channels(), K = x.bins(), N = x.frames();
  std::vector<std::vector<std::vector<Cplx>>> y;
  std::vector<std::vector<Real>> r;
  detail::demix_outputs(d, x, y, r);

  std::vector<MatC> dir(K);
  for (std::size_t k = 0; k < K; ++k) {
    MatC m = MatC::identity(P);
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t q = 0; q < P; ++q) {
        Real rq = prior.kind == PriorKind::kUnivariateLaplace ? std::abs(y[q][k][n])
                                                              : r[q][n];
        Cplx phi = laplace_score(y[q][k][n], rq, prior.floor);
        for (std::size_t p = 0; p < P; ++p)
          m(q, p) -= phi * std::conj(y[p][k][n]) / static_cast<Real>(N);
      }
    dir[k] = m * d.bins[k];
  }
  return dir;
}

}  // namespace cbss

#endif  // CBSS_GRADIENTS_HPP_
