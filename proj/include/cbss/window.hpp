// cbss/window.hpp

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

#ifndef CBSS_WINDOW_HPP_
#define CBSS_WINDOW_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "cbss/common.hpp"

namespace cbss {

enum class WindowKind { kRectangular, kHamming, kHann };

inline const char* window_kind_name(WindowKind k) {
  switch (k) {
    case WindowKind::kRectangular: return "rectangular";
    case WindowKind::kHamming: return "hamming";
    case WindowKind::kHann: return "hann";
  }
  return "?";
}

inline WindowKind window_kind_from_name(const std::string& s) {
  if (s == "rectangular" || s == "rect") return WindowKind::kRectangular;
  if (s == "hamming") return WindowKind::kHamming;
  if (s == "hann" || s == "hanning") return WindowKind::kHann;
  throw std::invalid_argument("unknown window kind: " + s);
}

// Symmetric windows, denominator N-1. Values lie in [0, 1].
inline std::vector<Real> make_window(WindowKind kind, std::size_t length) {
  if (length == 0) throw std::invalid_argument("make_window: zero length");
  std::vector<Real> w(length, 1.0);
  if (kind == WindowKind::kRectangular || length == 1) return w;
  const Real denom = static_cast<Real>(length - 1);
  for (std::size_t n = 0; n < length; ++n) {
    Real c = std::cos(2.0 * kPi * static_cast<Real>(n) / denom);
    if (kind == WindowKind::kHamming)
      w[n] = 0.54 - 0.46 * c;
    else
      w[n] = 0.5 - 0.5 * c;
  }
  return w;
}

}  // namespace cbss

#endif  // CBSS_WINDOW_HPP_
