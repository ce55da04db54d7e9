// cbss/common.hpp

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

#ifndef CBSS_COMMON_HPP_
#define CBSS_COMMON_HPP_

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbss {

using Real = double;
using Cplx = std::complex<double>;

inline constexpr Real kPi = 3.14159265358979323846;

// A demixer (or a per-bin/truncated matrix derived from one) that cannot be
// inverted or whose determinant vanishes; signals a degenerate configuration,
// not a recoverable numeric hiccup.
class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or unsupported file contents (WAV, results CSV).
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid analysis/synthesis configuration, e.g. a non-COLA window/hop pair
// when exact reconstruction is demanded.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Scenario shape outside what a component supports (e.g. oracle demixers
// are defined for the determined 2x2 case only).
class UnsupportedScenarioError : public std::runtime_error {
 public:
  explicit UnsupportedScenarioError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cbss

#endif  // CBSS_COMMON_HPP_
