// tests/test_gradients.cpp

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

#include <doctest.h>

#include <cmath>

#include "cbss/costs.hpp"
#include "cbss/gradients.hpp"
#include "cbss/rng.hpp"
#include "cbss/solvers.hpp"

using namespace cbss;

TEST_SUITE_BEGIN("gradients");

namespace {

FrequencyDomainDemixer random_fd(Rng& rng, std::size_t k, std::size_t p) {
  FrequencyDomainDemixer d = FrequencyDomainDemixer::identity(k, p);
  for (auto& w : d.bins)
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) w(a, b) += 0.5 * rng.cnormal();
  return d;
}

TimeFrequencyTensor random_tensor(Rng& rng, std::size_t p, std::size_t k, std::size_t n) {
  TimeFrequencyTensor t;
  t.coeff.assign(p, std::vector<std::vector<Cplx>>(k, std::vector<Cplx>(n)));
  for (auto& ch : t.coeff)
    for (auto& bin : ch)
      for (Cplx& v : bin) v = rng.cnormal();
  t.config.one_sided = false;
  t.config.fft_length = k > 1 ? k : 2;
  return t;
}

// Central finite differences of the cost over real and imaginary parts,
// packed like the analytic gradient (dJ/dRe + j dJ/dIm).
std::vector<MatC> fd_gradient(const FrequencyDomainDemixer& d, const TimeFrequencyTensor& x,
                              const SourcePrior& prior, Real h) {
  const std::size_t K = d.num_bins(), P = d.channels();
  std::vector<MatC> g(K, MatC(P, P));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t a = 0; a < P; ++a)
      for (std::size_t b = 0; b < P; ++b) {
        FrequencyDomainDemixer plus = d, minus = d;
        plus.bins[k](a, b) += Cplx(h, 0.0);
        minus.bins[k](a, b) -= Cplx(h, 0.0);
        Real d_re = (iva_cost(plus, x, prior).total - iva_cost(minus, x, prior).total) /
                    (2.0 * h);
        plus = d;
        minus = d;
        plus.bins[k](a, b) += Cplx(0.0, h);
        minus.bins[k](a, b) -= Cplx(0.0, h);
        Real d_im = (iva_cost(plus, x, prior).total - iva_cost(minus, x, prior).total) /
                    (2.0 * h);
        g[k](a, b) = Cplx(d_re, d_im);
      }
  return g;
}

Real grad_rel_error(const std::vector<MatC>& a, const std::vector<MatC>& b) {
  Real num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < a[k].rows(); ++i)
      for (std::size_t j = 0; j < a[k].cols(); ++j) {
        num += std::norm(a[k](i, j) - b[k](i, j));
        den += std::norm(b[k](i, j));
      }
  return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace

TEST_CASE("iva gradient matches central differences, spherical prior") {
  Rng rng(3);
  for (int t = 0; t < 8; ++t) {
    const std::size_t P = 2, K = 3, N = 6;
    auto d = random_fd(rng, K, P);
    auto x = random_tensor(rng, P, K, N);
    SourcePrior prior = SourcePrior::spherical_laplace();
    auto analytic = iva_grad(d, x, prior);
    auto numeric = fd_gradient(d, x, prior, 1e-6);
    CHECK(grad_rel_error(analytic, numeric) < 1e-5);
  }
}

TEST_CASE("fdica gradient matches central differences, univariate prior") {
  Rng rng(5);
  for (int t = 0; t < 5; ++t) {
    const std::size_t P = 2, K = 2, N = 8;
    auto d = random_fd(rng, K, P);
    auto x = random_tensor(rng, P, K, N);
    SourcePrior prior = SourcePrior::univariate_laplace();
    auto analytic = fdica_grad(d, x);
    auto numeric = fd_gradient(d, x, prior, 1e-6);
    CHECK(grad_rel_error(analytic, numeric) < 1e-5);
  }
}

TEST_CASE("gradient vanishes at the converged one-bin stationary point") {
  // auxIVA's fixed point solves the stationarity system of the coupled cost
  // row by row; after convergence the analytic gradient must vanish.
  Rng rng(7);
  const std::size_t P = 2, K = 1, N = 200;
  TimeFrequencyTensor x = random_tensor(rng, P, K, N);
  SolverConfig cfg = SolverConfig::auxiva_defaults();
  cfg.iterations = 400;
  FdSolverReport rep = run_auxiva(x, cfg);
  auto g = iva_grad(rep.demixer, x, SourcePrior::spherical_laplace());
  Real norm = 0.0;
  for (std::size_t i = 0; i < P; ++i)
    for (std::size_t j = 0; j < P; ++j) norm += std::norm(g[0](i, j));
  CHECK(std::sqrt(norm) < 1e-8);
}

TEST_CASE("zero data: source gradient vanishes, log-det gradient is -2 W^-H") {
  Rng rng(9);
  const std::size_t P = 2, K = 2, N = 5;
  auto d = random_fd(rng, K, P);
  TimeFrequencyTensor x;
  x.coeff.assign(P, std::vector<std::vector<Cplx>>(K, std::vector<Cplx>(N, Cplx(0.0, 0.0))));
  x.config.one_sided = false;
  x.config.fft_length = K;
  auto g = iva_grad(d, x, SourcePrior::spherical_laplace());
  for (std::size_t k = 0; k < K; ++k) {
    MatC expect = inverse(d.bins[k]).adjoint() * Cplx(-2.0, 0.0);
    for (std::size_t i = 0; i < P; ++i)
      for (std::size_t j = 0; j < P; ++j) CHECK(std::abs(g[k](i, j) - expect(i, j)) < 1e-12);
  }
}

TEST_CASE("natural-gradient direction vanishes iff E[phi y^H] = I") {
  Rng rng(11);
  const std::size_t P = 2, K = 2, N = 50;
  auto d = random_fd(rng, K, P);
  auto x = random_tensor(rng, P, K, N);
  auto dir = natural_gradient_direction(d, x, SourcePrior::spherical_laplace());
  // Recompute E[phi y^H] explicitly and verify dir = (I - E) W.
  for (std::size_t k = 0; k < K; ++k) {
    MatC e(P, P);
    std::vector<std::vector<Cplx>> y(P, std::vector<Cplx>(N));
    std::vector<Real> r(N, 0.0);
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t q = 0; q < P; ++q) {
        Cplx acc(0.0, 0.0);
        for (std::size_t p = 0; p < P; ++p) acc += d.bins[k](q, p) * x.coeff[p][k][n];
        y[q][n] = acc;
      }
    for (std::size_t n = 0; n < N; ++n) {
      Real r2 = 0.0;
      for (std::size_t q = 0; q < P; ++q) {
        // Coupled norm across both bins of this demixer.
        Cplx other(0.0, 0.0);
        for (std::size_t p = 0; p < P; ++p)
          other += d.bins[1 - k](q, p) * x.coeff[p][1 - k][n];
        r2 = std::norm(y[q][n]) + std::norm(other);
        Real rq = std::max(std::sqrt(r2), 1e-8);
        for (std::size_t p = 0; p < P; ++p)
          e(q, p) += (y[q][n] / rq) * std::conj(y[p][n]) / static_cast<Real>(N);
      }
    }
    MatC expect = (MatC::identity(P) - e) * d.bins[k];
    for (std::size_t i = 0; i < P; ++i)
      for (std::size_t j = 0; j < P; ++j) CHECK(std::abs(dir[k](i, j) - expect(i, j)) < 1e-10);
  }
}

TEST_SUITE_END();
