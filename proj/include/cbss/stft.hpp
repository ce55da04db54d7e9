// cbss/stft.hpp

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

// STFT analysis and weighted-overlap-add synthesis.
//
// Frame n covers samples [n*hop, n*hop + window_length); the frame count is
// floor(T / hop) with zero padding of the tail. A 10 s / 16 kHz signal with
// hop 1024 therefore yields 156 frames, with hop 2048 it yields 78.
//
// Synthesis divides the overlap-added windowed frames by the accumulated
// squared analysis window, which reconstructs every sample with nonzero
// analysis coverage exactly. Hamming and rectangular windows cover all
// samples; a symmetric Hann window has zero endpoints, so the very first
// sample of a signal is outside its coverage at 50% overlap (documented,
// returned as 0).

#ifndef CBSS_STFT_HPP_
#define CBSS_STFT_HPP_

#include <cstddef>
#include <vector>

#include "cbss/common.hpp"
#include "cbss/fft.hpp"
#include "cbss/signal.hpp"
#include "cbss/window.hpp"

namespace cbss {

struct StftConfig {
  WindowKind window_kind = WindowKind::kHamming;
  std::size_t window_length = 2048;
  std::size_t hop = 1024;
  std::size_t fft_length = 2048;
  bool one_sided = true;

  void validate() const {
    if (window_length == 0) throw std::invalid_argument("stft: zero window length");
    if (hop == 0 || hop > window_length)
      throw std::invalid_argument("stft: hop must be in [1, window_length]");
    if (fft_length < window_length)
      throw std::invalid_argument("stft: fft_length must be >= window_length");
    // Power-of-two transforms only; keeps every DFT on the radix-2 path.
    if (!is_power_of_two(fft_length))
      throw std::invalid_argument("stft: fft_length must be a power of two");
  }

  std::size_t bins() const { return one_sided ? fft_length / 2 + 1 : fft_length; }
};

// Complex STFT coefficients indexed (channel, bin, frame).
struct TimeFrequencyTensor {
  // coeff[channel][bin][frame]
  std::vector<std::vector<std::vector<Cplx>>> coeff;
  StftConfig config;
  std::size_t source_length = 0;  // original time-domain length (pre padding)
  int sample_rate = 0;

  std::size_t channels() const { return coeff.size(); }
  std::size_t bins() const { return coeff.empty() ? 0 : coeff[0].size(); }
  std::size_t frames() const {
    return coeff.empty() || coeff[0].empty() ? 0 : coeff[0][0].size();
  }
};

inline std::size_t stft_frame_count(std::size_t signal_length, const StftConfig& cfg) {
  return signal_length / cfg.hop;
}

inline TimeFrequencyTensor stft(const MultichannelSignal& x, const StftConfig& cfg) {
  cfg.validate();
  x.validate();
  if (x.length() < cfg.hop)
    throw std::invalid_argument("stft: signal shorter than one hop");
  const std::size_t n_frames = stft_frame_count(x.length(), cfg);
  const std::size_t n_bins = cfg.bins();
  const std::vector<Real> win = make_window(cfg.window_kind, cfg.window_length);

  TimeFrequencyTensor out;
  out.config = cfg;
  out.source_length = x.length();
  out.sample_rate = x.sample_rate;
  out.coeff.assign(x.channels(),
                   std::vector<std::vector<Cplx>>(n_bins, std::vector<Cplx>(n_frames)));

  std::vector<Cplx> buf(cfg.fft_length);
  for (std::size_t p = 0; p < x.channels(); ++p) {
    const auto& ch = x.samples[p];
    for (std::size_t n = 0; n < n_frames; ++n) {
      const std::size_t start = n * cfg.hop;
      std::fill(buf.begin(), buf.end(), Cplx(0.0, 0.0));
      for (std::size_t m = 0; m < cfg.window_length; ++m) {
        const std::size_t t = start + m;
        if (t < ch.size()) buf[m] = Cplx(win[m] * ch[t], 0.0);
      }
      fft_inplace(buf, false);
      for (std::size_t k = 0; k < n_bins; ++k) out.coeff[p][k][n] = buf[k];
    }
  }
  return out;
}

namespace detail {
// Rebuild the full two-sided spectrum of one frame from one-sided storage.
inline void expand_frame(const TimeFrequencyTensor& t, std::size_t p, std::size_t n,
                         std::vector<Cplx>& buf) {
  const std::size_t f = t.config.fft_length;
  buf.assign(f, Cplx(0.0, 0.0));
  if (t.config.one_sided) {
    const std::size_t half = f / 2;
    for (std::size_t k = 0; k <= half; ++k) buf[k] = t.coeff[p][k][n];
    for (std::size_t k = half + 1; k < f; ++k) buf[k] = std::conj(t.coeff[p][f - k][n]);
  } else {
    for (std::size_t k = 0; k < f; ++k) buf[k] = t.coeff[p][k][n];
  }
}
}  // namespace detail

// True when every sample index in [0, length) has nonzero accumulated
// analysis-window energy, i.e. exact reconstruction over the full support.
inline bool stft_covers_all_samples(const StftConfig& cfg, std::size_t length) {
  const std::vector<Real> win = make_window(cfg.window_kind, cfg.window_length);
  const std::size_t n_frames = length / cfg.hop;
  std::vector<Real> den(length, 0.0);
  for (std::size_t n = 0; n < n_frames; ++n)
    for (std::size_t m = 0; m < cfg.window_length; ++m) {
      std::size_t t = n * cfg.hop + m;
      if (t < length) den[t] += win[m] * win[m];
    }
  for (Real d : den)
    if (!(d > 1e-12)) return false;
  return true;
}

inline MultichannelSignal istft(const TimeFrequencyTensor& t,
                                bool require_exact = false) {
  const StftConfig& cfg = t.config;
  cfg.validate();
  const std::size_t length = t.source_length;
  const std::size_t n_frames = t.frames();
  if (require_exact && !stft_covers_all_samples(cfg, length))
    throw ConfigError("istft: window/hop pair does not cover every sample");

  const std::vector<Real> win = make_window(cfg.window_kind, cfg.window_length);
  MultichannelSignal y(t.channels(), length, t.sample_rate > 0 ? t.sample_rate : 1);

  std::vector<Real> den(length, 0.0);
  for (std::size_t n = 0; n < n_frames; ++n)
    for (std::size_t m = 0; m < cfg.window_length; ++m) {
      std::size_t s = n * cfg.hop + m;
      if (s < length) den[s] += win[m] * win[m];
    }

  std::vector<Cplx> buf;
  for (std::size_t p = 0; p < t.channels(); ++p) {
    std::vector<Real>& out = y.samples[p];
    for (std::size_t n = 0; n < n_frames; ++n) {
      detail::expand_frame(t, p, n, buf);
      fft_inplace(buf, true);
      for (std::size_t m = 0; m < cfg.window_length; ++m) {
        std::size_t s = n * cfg.hop + m;
        if (s < length) out[s] += win[m] * buf[m].real();
      }
    }
    for (std::size_t s = 0; s < length; ++s) out[s] = den[s] > 1e-12 ? out[s] / den[s] : 0.0;
  }
  return y;
}

}  // namespace cbss

#endif  // CBSS_STFT_HPP_
