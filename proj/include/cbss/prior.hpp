// cbss/prior.hpp

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

#ifndef CBSS_PRIOR_HPP_
#define CBSS_PRIOR_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

#include "cbss/common.hpp"

namespace cbss {

// Source models used by the cost functions. Laplace variants drop their
// normalization constants (they do not depend on the demixer); the norm floor
// keeps scores finite at exactly-zero outputs.
//  - kUnivariateLaplace: -log p = max(|y|, floor) per time-frequency
//    coefficient (FD-ICA; also the factorized special case of IVA).
//  - kSphericalLaplace: -log p = max(||y_vec||_2, floor) per frequency vector
//    (IVA's multivariate coupling across bins).
//  - kBlockGaussian: full zero-mean Gaussian with a given block covariance,
//    constants kept (the SOS reduction needs them).
enum class PriorKind { kUnivariateLaplace, kSphericalLaplace, kBlockGaussian };

struct SourcePrior {
  PriorKind kind = PriorKind::kSphericalLaplace;
  Real floor = 1e-8;

  static SourcePrior univariate_laplace(Real eps = 1e-8) {
    return SourcePrior{PriorKind::kUnivariateLaplace, eps};
  }
  static SourcePrior spherical_laplace(Real eps = 1e-8) {
    return SourcePrior{PriorKind::kSphericalLaplace, eps};
  }
  static SourcePrior block_gaussian(Real eps = 1e-8) {
    return SourcePrior{PriorKind::kBlockGaussian, eps};
  }
};

inline Real laplace_neg_log(Real magnitude, Real floor) {
  return magnitude > floor ? magnitude : floor;
}

// Score of the spherical Laplace prior: phi = y / max(r, floor).
inline Cplx laplace_score(Cplx y, Real r, Real floor) {
  return y / (r > floor ? r : floor);
}

}  // namespace cbss

#endif  // CBSS_PRIOR_HPP_
