// cbss/scene.hpp

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

// Synthetic scenes: room impulse responses with a controllable T60 and
// convolutive mixing of source signals, including the per-(source, mic)
// images needed by the supervised baselines and the evaluation.

#ifndef CBSS_SCENE_HPP_
#define CBSS_SCENE_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cbss/common.hpp"
#include "cbss/fft.hpp"
#include "cbss/rng.hpp"
#include "cbss/signal.hpp"

namespace cbss {

// FIR responses h_qp, source q -> microphone p, all the same length.
struct RirSet {
  // rir[q][p]
  std::vector<std::vector<std::vector<Real>>> rir;
  int sample_rate = 0;

  std::size_t sources() const { return rir.size(); }
  std::size_t mics() const { return rir.empty() ? 0 : rir[0].size(); }
  std::size_t length() const {
    return rir.empty() || rir[0].empty() ? 0 : rir[0][0].size();
  }
};

// Unit direct-path impulse at direct_delay followed by zero-mean Gaussian
// noise whose per-sample variance starts at the direct-path energy and decays
// 60 dB over t60 seconds. Deterministic given the seed.
inline std::vector<Real> synth_rir(Real t60, int sample_rate, std::size_t length,
                                   std::size_t direct_delay, std::uint64_t seed) {
  if (!(t60 > 0.0)) throw std::invalid_argument("synth_rir: t60 must be positive");
  if (sample_rate <= 0) throw std::invalid_argument("synth_rir: bad sample rate");
  if (length == 0) throw std::invalid_argument("synth_rir: zero length");
  if (direct_delay >= length)
    throw std::invalid_argument("synth_rir: direct_delay must be < length");
  std::vector<Real> h(length, 0.0);
  h[direct_delay] = 1.0;
  Rng rng(seed);
  const Real decay_per_sample = -3.0 * std::log(10.0) / (t60 * sample_rate);
  for (std::size_t n = direct_delay + 1; n < length; ++n) {
    Real env = std::exp(decay_per_sample * static_cast<Real>(n - direct_delay));
    h[n] = env * rng.normal();
  }
  return h;
}

struct SourceSpec {
  // "ar_laplace": i.i.d. Laplacian through a low-order all-pole filter
  //   (supergaussian, spectrally colored, stationary).
  // "am_noise": amplitude-modulated Gaussian noise (nonstationary, for the
  //   second-order methods).
  // "speech_like": the AR-Laplacian process under a slow syllable-rate
  //   amplitude envelope. A stationary supergaussian process windowed over
  //   thousands of samples has near-Gaussian frame statistics; the envelope
  //   keeps the short-time power varying the way the coupled-norm source
  //   models expect.
  // "wav:<path>" handled by the bench layer.
  std::string kind = "ar_laplace";
  Real ar_pole = 0.55;     // pole radius of the coloring filter
  Real am_period_s = 0.5;  // modulation period for am_noise
};

inline std::vector<Real> synth_source(const SourceSpec& spec, std::size_t length,
                                      int sample_rate, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Real> s(length, 0.0);
  if (spec.kind == "ar_laplace") {
    Real prev = 0.0;
    for (std::size_t n = 0; n < length; ++n) {
      prev = spec.ar_pole * prev + rng.laplace();
      s[n] = prev;
    }
  } else if (spec.kind == "am_noise") {
    const Real w = 2.0 * kPi / (spec.am_period_s * sample_rate);
    // Phase offset drawn per signal so different seeds modulate differently.
    const Real phase = 2.0 * kPi * rng.uniform();
    for (std::size_t n = 0; n < length; ++n) {
      Real env = 0.55 + 0.45 * std::sin(w * static_cast<Real>(n) + phase);
      s[n] = env * rng.normal();
    }
  } else if (spec.kind == "speech_like") {
    // Two incommensurate syllable-rate modulators with random phases.
    const Real f1 = (1.7 + 1.2 * rng.uniform()) / sample_rate;
    const Real f2 = (3.1 + 1.6 * rng.uniform()) / sample_rate;
    const Real p1 = 2.0 * kPi * rng.uniform();
    const Real p2 = 2.0 * kPi * rng.uniform();
    Real prev = 0.0;
    for (std::size_t n = 0; n < length; ++n) {
      prev = spec.ar_pole * prev + rng.laplace();
      Real env = 0.15 + 0.85 * std::abs(std::sin(2.0 * kPi * f1 * n + p1) *
                                        std::sin(2.0 * kPi * f2 * n + p2));
      s[n] = env * prev;
    }
  } else {
    throw std::invalid_argument("synth_source: unknown kind " + spec.kind);
  }
  // Unit RMS so mixtures are comparable across kinds and seeds.
  Real e = 0.0;
  for (Real v : s) e += v * v;
  if (e > 0.0) {
    Real g = 1.0 / std::sqrt(e / static_cast<Real>(length));
    for (Real& v : s) v *= g;
  }
  return s;
}

struct MixtureResult {
  MultichannelSignal microphones;
  // images[q][p] = contribution of source q at microphone p, same length as
  // the sources.
  std::vector<std::vector<std::vector<Real>>> images;
};

// x_p(n) = sum_q sum_k h_qp(k) s_q(n-k), truncated to the source length.
inline MixtureResult convolve_mix(const MultichannelSignal& sources, const RirSet& rirs) {
  sources.validate();
  if (sources.channels() != rirs.sources())
    throw std::invalid_argument("convolve_mix: source count does not match RIR set");
  if (rirs.mics() == 0 || rirs.length() == 0)
    throw std::invalid_argument("convolve_mix: empty RIR set");
  const std::size_t T = sources.length();
  const std::size_t P = rirs.mics();
  const std::size_t Q = rirs.sources();

  MixtureResult out;
  out.microphones = MultichannelSignal(P, T, sources.sample_rate);
  out.images.assign(Q, std::vector<std::vector<Real>>(P));
  for (std::size_t q = 0; q < Q; ++q) {
    for (std::size_t p = 0; p < P; ++p) {
      std::vector<Real> full = convolve(sources.samples[q], rirs.rir[q][p]);
      full.resize(T);
      for (std::size_t n = 0; n < T; ++n) out.microphones.samples[p][n] += full[n];
      out.images[q][p] = std::move(full);
    }
  }
  return out;
}

// Convenience: a P x P RIR set with per-pair direct delays; delay_offset[q][p]
// is added to base_delay to emulate inter-channel geometry.
inline RirSet make_rir_set(Real t60, int sample_rate, std::size_t length,
                           std::size_t base_delay,
                           const std::vector<std::vector<int>>& delay_offset,
                           std::uint64_t seed) {
  const std::size_t Q = delay_offset.size();
  RirSet set;
  set.sample_rate = sample_rate;
  set.rir.assign(Q, {});
  for (std::size_t q = 0; q < Q; ++q) {
    const std::size_t P = delay_offset[q].size();
    set.rir[q].resize(P);
    for (std::size_t p = 0; p < P; ++p) {
      long d = static_cast<long>(base_delay) + delay_offset[q][p];
      if (d < 0) d = 0;
      set.rir[q][p] = synth_rir(t60, sample_rate, length, static_cast<std::size_t>(d),
                                seed * 1000003ULL + q * 131ULL + p);
    }
  }
  return set;
}

}  // namespace cbss

#endif  // CBSS_SCENE_HPP_
