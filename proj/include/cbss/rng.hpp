// cbss/rng.hpp

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

#ifndef CBSS_RNG_HPP_
#define CBSS_RNG_HPP_

#include <cmath>
#include <cstdint>

#include "cbss/common.hpp"

namespace cbss {

// Deterministic generator (splitmix64) with hand-rolled distributions so that
// streams are bit-identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  Real uniform() { return static_cast<Real>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log() argument.
  Real uniform_pos() { return static_cast<Real>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // Standard normal via Box-Muller.
  Real normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    Real u1 = uniform_pos();
    Real u2 = uniform();
    Real r = std::sqrt(-2.0 * std::log(u1));
    Real a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Zero-mean, unit-variance Laplacian (scale 1/sqrt(2)).
  Real laplace() {
    Real u = uniform() - 0.5;
    Real b = 1.0 / std::sqrt(2.0);
    Real mag = -b * std::log(1.0 - 2.0 * std::abs(u));
    return u >= 0 ? mag : -mag;
  }

  Cplx cnormal() { return Cplx(normal(), normal()) / std::sqrt(2.0); }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  Real spare_ = 0.0;
};

}  // namespace cbss

#endif  // CBSS_RNG_HPP_
