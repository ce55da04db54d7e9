// cbss/signal.hpp

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

#ifndef CBSS_SIGNAL_HPP_
#define CBSS_SIGNAL_HPP_

#include <cstddef>
#include <utility>
#include <vector>

#include "cbss/common.hpp"

namespace cbss {

// P equally long discrete-time channels at a common sample rate. Used for
// sources, microphone observations and separated outputs alike.
struct MultichannelSignal {
  std::vector<std::vector<Real>> samples;  // [channel][time]
  int sample_rate = 0;

  MultichannelSignal() = default;
  MultichannelSignal(std::size_t channels, std::size_t length, int rate)
      : samples(channels, std::vector<Real>(length, 0.0)), sample_rate(rate) {
    validate();
  }
  MultichannelSignal(std::vector<std::vector<Real>> data, int rate)
      : samples(std::move(data)), sample_rate(rate) {
    validate();
  }

  std::size_t channels() const { return samples.size(); }
  std::size_t length() const { return samples.empty() ? 0 : samples[0].size(); }

  void validate() const {
    if (sample_rate <= 0) throw std::invalid_argument("signal: sample_rate must be positive");
    if (samples.empty()) throw std::invalid_argument("signal: needs at least one channel");
    for (const auto& ch : samples)
      if (ch.size() != samples[0].size())
        throw std::invalid_argument("signal: channels must have identical length");
  }
};

}  // namespace cbss

#endif  // CBSS_SIGNAL_HPP_
