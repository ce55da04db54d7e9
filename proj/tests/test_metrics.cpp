// tests/test_metrics.cpp

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

#include "cbss/bss_eval.hpp"
#include "cbss/fft.hpp"
#include "cbss/rng.hpp"

using namespace cbss;

TEST_SUITE_BEGIN("metrics");

namespace {

Real energy(const std::vector<Real>& v) {
  Real e = 0.0;
  for (Real x : v) e += x * x;
  return e;
}

Real dot(const std::vector<Real>& a, const std::vector<Real>& b) {
  Real s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// AR-colored Laplacian pair; an optional silent tail keeps filtered copies
// of the references inside the truncated recording.
std::vector<std::vector<Real>> two_references(Rng& rng, std::size_t t,
                                              std::size_t silent_tail = 0) {
  std::vector<std::vector<Real>> refs(2, std::vector<Real>(t));
  Real prev0 = 0.0, prev1 = 0.0;
  for (std::size_t n = 0; n + silent_tail < t; ++n) {
    prev0 = 0.5 * prev0 + rng.laplace();
    prev1 = -0.3 * prev1 + rng.laplace();
    refs[0][n] = prev0;
    refs[1][n] = prev1;
  }
  return refs;
}

// Test-side orthogonalization of a noise vector against the joint delay span
// of the references (dense normal equations, independent of the library's
// projection path).
std::vector<Real> orthogonalize(const std::vector<Real>& noise,
                                const std::vector<std::vector<Real>>& refs,
                                std::size_t proj_len) {
  const std::size_t S = refs.size();
  const std::size_t T = noise.size();
  const std::size_t dim = S * proj_len;
  // Basis b_{j,d}(n) = refs[j][n - d].
  std::vector<std::vector<Real>> basis(dim, std::vector<Real>(T, 0.0));
  for (std::size_t j = 0; j < S; ++j)
    for (std::size_t d = 0; d < proj_len; ++d)
      for (std::size_t n = d; n < T; ++n) basis[j * proj_len + d][n] = refs[j][n - d];
  // Gram and rhs.
  MatR gram(dim, dim);
  std::vector<Real> rhs(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    rhs[i] = dot(basis[i], noise);
    for (std::size_t j = 0; j <= i; ++j) {
      gram(i, j) = dot(basis[i], basis[j]);
      gram(j, i) = gram(i, j);
    }
  }
  for (std::size_t i = 0; i < dim; ++i) gram(i, i) += 1e-9 * gram(i, i);
  std::vector<Real> coef = solve(gram, rhs);
  std::vector<Real> out = noise;
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t n = 0; n < T; ++n) out[n] -= coef[i] * basis[i][n];
  return out;
}

}  // namespace

TEST_CASE("an exact match caps every ratio at +200 dB") {
  Rng rng(3);
  auto refs = two_references(rng, 4000);
  SeparationReport rep = bss_eval(refs, refs, 128);
  for (const auto& ch : rep.channels) {
    CHECK(ch.sdr_db == 200.0);
    CHECK(ch.sir_db == 200.0);
    CHECK(ch.sar_db == 200.0);
  }
  CHECK(rep.permutation[0] == 0);
  CHECK(rep.permutation[1] == 1);
}

TEST_CASE("-20 dB orthogonal noise: SDR and SAR near 20 dB, SIR capped") {
  Rng rng(5);
  const std::size_t T = 6000, proj = 64;
  auto refs = two_references(rng, T);
  std::vector<Real> noise(T);
  for (Real& v : noise) v = rng.normal();
  noise = orthogonalize(noise, refs, proj);
  Real scale = std::sqrt(0.01 * energy(refs[0]) / energy(noise));
  std::vector<std::vector<Real>> est(2);
  est[0].resize(T);
  for (std::size_t n = 0; n < T; ++n) est[0][n] = refs[0][n] + scale * noise[n];
  est[1] = refs[1];
  SeparationReport rep = bss_eval(est, refs, proj);
  CHECK(rep.channels[0].sdr_db == doctest::Approx(20.0).epsilon(0.025));
  CHECK(rep.channels[0].sar_db == doctest::Approx(20.0).epsilon(0.025));
  CHECK(rep.channels[0].sir_db >= 100.0);
}

TEST_CASE("a pure interferer scores a strongly negative SIR") {
  Rng rng(7);
  const std::size_t T = 5000;
  auto refs = two_references(rng, T);
  std::vector<std::vector<Real>> est{refs[1], refs[1]};
  SeparationReport rep = bss_eval(est, refs, 64);
  Real min_sir = std::min(rep.channels[0].sir_db, rep.channels[1].sir_db);
  CHECK(min_sir < -20.0);
}

TEST_CASE("decomposition is additive and pairwise orthogonal") {
  Rng rng(9);
  const std::size_t T = 5000, proj = 64;
  auto refs = two_references(rng, T);
  std::vector<std::vector<Real>> est(2, std::vector<Real>(T));
  for (std::size_t n = 0; n < T; ++n) {
    est[0][n] = refs[0][n] + 0.2 * refs[1][n] + 0.05 * rng.normal();
    est[1][n] = refs[1][n] - 0.3 * refs[0][n] + 0.05 * rng.normal();
  }
  DecompositionDetail detail;
  SeparationReport rep = bss_eval(est, refs, proj, &detail);
  (void)rep;
  for (std::size_t q = 0; q < 2; ++q) {
    Real max_add = 0.0;
    for (std::size_t n = 0; n < T; ++n) {
      Real sum = detail.s_target[q][n] + detail.e_interf[q][n] + detail.e_artif[q][n];
      max_add = std::max(max_add, std::abs(sum - est[q][n]));
    }
    CHECK(max_add < 1e-10);  // additivity holds by construction
    Real et = energy(detail.s_target[q]);
    Real ei = energy(detail.e_interf[q]);
    Real ea = energy(detail.e_artif[q]);
    Real scale = std::max({et, ei, ea});
    CHECK(std::abs(dot(detail.s_target[q], detail.e_interf[q])) <= 1e-8 * scale);
    CHECK(std::abs(dot(detail.s_target[q], detail.e_artif[q])) <= 1e-8 * scale);
    CHECK(std::abs(dot(detail.e_interf[q], detail.e_artif[q])) <= 1e-8 * scale);
  }
}

TEST_CASE("the projection subspace absorbs strong in-span filtering exactly") {
  // A target-only estimate filtered by any FIR short enough to keep the
  // composite filter inside the projection span stays artifact-free and
  // fully capped.
  Rng rng(11);
  const std::size_t T = 6000, proj = 128;
  auto refs = two_references(rng, T, proj + 64);
  std::vector<Real> g{0.8, -0.3, 0.1, 0.4};
  std::vector<std::vector<Real>> est(2);
  for (std::size_t q = 0; q < 2; ++q) {
    est[q] = convolve(refs[q], g);
    est[q].resize(T);
  }
  SeparationReport before = bss_eval(est, refs, proj);
  std::vector<Real> fir(32);
  for (Real& v : fir) v = 0.4 * rng.normal();
  fir[0] += 1.0;
  std::vector<std::vector<Real>> filtered(2);
  for (std::size_t q = 0; q < 2; ++q) {
    filtered[q] = convolve(est[q], fir);
    filtered[q].resize(T);
  }
  SeparationReport after = bss_eval(filtered, refs, proj);
  for (std::size_t q = 0; q < 2; ++q) {
    CHECK(before.channels[q].sdr_db == 200.0);
    CHECK(after.channels[q].sdr_db == 200.0);
    CHECK(after.channels[q].sar_db == 200.0);
  }
}

TEST_CASE("mild random filtering moves the SDR by less than 0.1 dB") {
  Rng rng(12);
  const std::size_t T = 6000, proj = 128;
  auto refs = two_references(rng, T, proj + 64);
  std::vector<std::vector<Real>> est(2, std::vector<Real>(T));
  for (std::size_t n = 0; n < T; ++n) {
    est[0][n] = refs[0][n] + 0.1 * refs[1][n] + 0.03 * rng.normal();
    est[1][n] = refs[1][n] + 0.15 * refs[0][n] + 0.03 * rng.normal();
  }
  SeparationReport before = bss_eval(est, refs, proj);
  for (int t = 0; t < 5; ++t) {
    std::vector<Real> fir(16);
    for (Real& v : fir) v = 0.003 * rng.normal();
    fir[0] += 1.0;
    std::vector<std::vector<Real>> filtered(2);
    for (std::size_t q = 0; q < 2; ++q) {
      filtered[q] = convolve(est[q], fir);
      filtered[q].resize(T);
    }
    SeparationReport after = bss_eval(filtered, refs, proj);
    for (std::size_t q = 0; q < 2; ++q)
      CHECK(std::abs(after.channels[q].sdr_db - before.channels[q].sdr_db) < 0.1);
  }
}

TEST_CASE("swapping the estimate channels swaps the report, nothing else") {
  Rng rng(13);
  const std::size_t T = 5000;
  auto refs = two_references(rng, T);
  std::vector<std::vector<Real>> est(2, std::vector<Real>(T));
  for (std::size_t n = 0; n < T; ++n) {
    est[0][n] = refs[0][n] + 0.2 * refs[1][n];
    est[1][n] = refs[1][n] + 0.1 * refs[0][n];
  }
  SeparationReport a = bss_eval(est, refs, 64);
  std::swap(est[0], est[1]);
  SeparationReport b = bss_eval(est, refs, 64);
  CHECK(a.channels[0].sir_db == doctest::Approx(b.channels[1].sir_db).epsilon(1e-12));
  CHECK(a.channels[1].sir_db == doctest::Approx(b.channels[0].sir_db).epsilon(1e-12));
  CHECK(a.permutation[0] == b.permutation[1]);
  CHECK(a.permutation[1] == b.permutation[0]);
}

TEST_CASE("zero-energy reference is rejected") {
  Rng rng(15);
  auto refs = two_references(rng, 2000);
  std::vector<std::vector<Real>> est = refs;
  refs[1].assign(refs[1].size(), 0.0);
  CHECK_THROWS_AS(bss_eval(est, refs, 64), std::invalid_argument);
}

TEST_SUITE_END();
