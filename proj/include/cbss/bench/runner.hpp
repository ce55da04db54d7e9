// cbss/bench/runner.hpp

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

// Orchestration of scenarios x seeds x algorithms. Each run is an independent
// job: simulate the scene, separate, rescale (minimum distortion where
// applicable), evaluate. A worker pool executes runs concurrently; results
// land in preallocated slots so the CSV ordering is by (scenario, seed,
// algorithm) regardless of completion order, and each run is internally
// single-threaded, which keeps outputs byte-identical across worker counts.

#ifndef CBSS_BENCH_RUNNER_HPP_
#define CBSS_BENCH_RUNNER_HPP_

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "cbss/bench/config.hpp"
#include "cbss/bss_eval.hpp"
#include "cbss/common.hpp"
#include "cbss/fd_demixer.hpp"
#include "cbss/oracle.hpp"
#include "cbss/scene.hpp"
#include "cbss/solvers.hpp"
#include "cbss/stft.hpp"
#include "cbss/wav.hpp"

namespace cbss::bench {

struct RunKey {
  std::size_t scenario_index = 0;
  Real t60 = 0.0;
  std::uint64_t seed = 0;
  std::string algorithm;
};

struct RunResult {
  RunKey key;
  std::string run_id;
  SeparationReport report;
  std::size_t iterations = 0;
  double wall_ms = 0.0;
  std::vector<std::string> flags;
  std::vector<Real> cost_trace;
  bool failed = false;
  std::string failure;
};

namespace run_detail {

inline std::string format_real(Real v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline std::string make_run_id(const RunKey& k) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "t60_%.3f-seed_%03llu-%s", k.t60,
                static_cast<unsigned long long>(k.seed), k.algorithm.c_str());
  return buf;
}

// Deterministic sub-seed chain per (t60 index, seed, purpose).
inline std::uint64_t sub_seed(std::uint64_t seed, std::size_t scenario_index,
                              std::uint64_t purpose) {
  Rng rng(seed * 0x9e3779b97f4a7c15ULL + scenario_index * 0x2545f4914f6cdd1dULL + purpose);
  return rng.next_u64();
}

struct Scene {
  MultichannelSignal sources{1, 1, 1};
  MixtureResult mixture;
};

inline Scene build_scene(const ExperimentConfig& cfg, std::size_t scenario_index,
                         std::uint64_t seed) {
  const ScenarioConfig& sc = cfg.scenario;
  const std::size_t T =
      static_cast<std::size_t>(sc.duration_s * static_cast<Real>(sc.sample_rate));
  Scene scene;

  if (sc.source_kind.rfind("wav:", 0) == 0) {
    MultichannelSignal wav = read_wav(sc.source_kind.substr(4));
    if (wav.channels() < 2)
      throw std::invalid_argument("source wav must have at least 2 channels");
    std::size_t len = std::min<std::size_t>(T, wav.length());
    scene.sources = MultichannelSignal(2, len, wav.sample_rate);
    for (std::size_t q = 0; q < 2; ++q)
      for (std::size_t n = 0; n < len; ++n)
        scene.sources.samples[q][n] = wav.samples[q][n];
  } else {
    SourceSpec spec;
    spec.kind = sc.source_kind;
    scene.sources = MultichannelSignal(2, T, sc.sample_rate);
    for (std::size_t q = 0; q < 2; ++q)
      scene.sources.samples[q] =
          synth_source(spec, T, sc.sample_rate, sub_seed(seed, scenario_index, 10 + q));
  }

  // +-45 degree pair: each source arrives one inter-mic delay earlier at its
  // own microphone (mic spacing 4.2 cm ~ +-1 sample at 16 kHz).
  int delta = std::max(1, static_cast<int>(std::lround(
                              sc.mic_spacing_m / 343.0 * sc.sample_rate / std::sqrt(2.0))));
  std::vector<std::vector<int>> offsets{{0, delta}, {delta, 0}};
  RirSet rirs = make_rir_set(cfg.scenario.t60_list[scenario_index], sc.sample_rate,
                             sc.rir_length, sc.base_delay, offsets,
                             sub_seed(seed, scenario_index, 99));
  scene.mixture = convolve_mix(scene.sources, rirs);
  return scene;
}

inline std::vector<std::vector<Real>> istft_outputs(const FrequencyDomainDemixer& w,
                                                    const TimeFrequencyTensor& mix_stft) {
  TimeFrequencyTensor y = apply_fd_demixer(w, mix_stft);
  MultichannelSignal out = istft(y);
  return out.samples;
}

}  // namespace run_detail

inline RunResult execute_run(const ExperimentConfig& cfg, const RunKey& key) {
  using namespace run_detail;
  RunResult res;
  res.key = key;
  res.run_id = make_run_id(key);
  auto t_start = std::chrono::steady_clock::now();

  try {
    Scene scene = build_scene(cfg, key.scenario_index, key.seed);
    const MultichannelSignal& mics = scene.mixture.microphones;

    // Per-channel references: source q's image at microphone q, matching the
    // anchoring of minimum distortion and of the null-steering oracles.
    std::vector<std::vector<Real>> references(2);
    for (std::size_t q = 0; q < 2; ++q) references[q] = scene.mixture.images[q][q];

    std::vector<std::vector<Real>> estimates;
    if (key.algorithm == "mix") {
      estimates = mics.samples;
    } else if (key.algorithm == "gradiva" || key.algorithm == "auxiva" ||
               key.algorithm == "fdica") {
      TimeFrequencyTensor mix_stft = stft(mics, cfg.stft);
      FdSolverReport rep;
      if (key.algorithm == "gradiva") {
        rep = run_gradiva(mix_stft, cfg.gradiva);
      } else if (key.algorithm == "auxiva") {
        rep = run_auxiva(mix_stft, cfg.auxiva);
      } else {
        FdicaReport fr = run_fdica(mix_stft, cfg.fdica);
        rep = std::move(fr.solver);
      }
      res.iterations = rep.iterations_performed;
      res.cost_trace = rep.cost_trace;
      for (const auto& wmsg : rep.warnings) res.flags.push_back(wmsg);
      if (rep.termination == Termination::kDivergence) res.flags.push_back("diverged");
      FrequencyDomainDemixer rescaled = minimum_distortion_rescale(rep.demixer);
      estimates = istft_outputs(rescaled, mix_stft);
    } else if (key.algorithm == "trinicon-sos") {
      SolverConfig tcfg = cfg.trinicon;
      TdSolverReport rep =
          run_trinicon_sos(mics, cfg.trinicon_shape.filter_length,
                           cfg.trinicon_shape.block_length,
                           cfg.trinicon_shape.block_shift, tcfg);
      res.iterations = rep.iterations_performed;
      res.cost_trace = rep.cost_trace;
      for (const auto& wmsg : rep.warnings) res.flags.push_back(wmsg);
      if (rep.termination == Termination::kDivergence) res.flags.push_back("diverged");
      estimates = apply_td_demixer(rep.demixer, mics.samples);
    } else if (key.algorithm == "oracle-td") {
      std::size_t lr = cfg.oracle.td_filter_length ? cfg.oracle.td_filter_length
                                                   : cfg.scenario.rir_length;
      auto ridge_for = [&](const std::vector<Real>& img) {
        Real e = 0.0;
        for (Real v : img) e += v * v;
        return cfg.oracle.ridge_rel * e;
      };
      TdOracleDemixer d;
      d.g_cancel_src2 = fit_td_relative_ir(scene.mixture.images[1][1],
                                           scene.mixture.images[1][0], lr,
                                           ridge_for(scene.mixture.images[1][1]));
      d.g_cancel_src1 = fit_td_relative_ir(scene.mixture.images[0][0],
                                           scene.mixture.images[0][1], lr,
                                           ridge_for(scene.mixture.images[0][0]));
      estimates = apply_td_oracle(d, mics);
    } else if (key.algorithm == "oracle-fd") {
      TimeFrequencyTensor mix_stft = stft(mics, cfg.stft);
      MultichannelSignal img11(
          std::vector<std::vector<Real>>{scene.mixture.images[0][0]}, mics.sample_rate);
      MultichannelSignal img12(
          std::vector<std::vector<Real>>{scene.mixture.images[0][1]}, mics.sample_rate);
      MultichannelSignal img22(
          std::vector<std::vector<Real>>{scene.mixture.images[1][1]}, mics.sample_rate);
      MultichannelSignal img21(
          std::vector<std::vector<Real>>{scene.mixture.images[1][0]}, mics.sample_rate);
      FdRtf a1 = fit_fd_rtf(stft(img11, cfg.stft), stft(img12, cfg.stft));
      FdRtf a2 = fit_fd_rtf(stft(img22, cfg.stft), stft(img21, cfg.stft));
      if (a1.any_floored || a2.any_floored) res.flags.push_back("rtf-bin-floored");
      FrequencyDomainDemixer d = build_fd_oracle(a1, a2);
      estimates = run_detail::istft_outputs(d, mix_stft);
    } else {
      throw std::invalid_argument("unknown algorithm: " + key.algorithm);
    }

    res.report = bss_eval(estimates, references, cfg.proj_len);
  } catch (const std::exception& ex) {
    res.failed = true;
    res.failure = ex.what();
    res.flags.push_back("failed");
  }

  auto t_end = std::chrono::steady_clock::now();
  res.wall_ms = std::chrono::duration<double, std::milli>(t_end - t_start).count();
  return res;
}

inline std::vector<RunKey> enumerate_runs(const ExperimentConfig& cfg,
                                          std::uint64_t seed_offset = 0) {
  std::vector<RunKey> keys;
  for (std::size_t si = 0; si < cfg.scenario.t60_list.size(); ++si)
    for (std::uint64_t seed : cfg.scenario.seeds)
      for (const std::string& alg : cfg.algorithms)
        keys.push_back(RunKey{si, cfg.scenario.t60_list[si], seed + seed_offset, alg});
  return keys;
}

inline std::vector<RunResult> execute_all(const ExperimentConfig& cfg,
                                          const std::vector<RunKey>& keys,
                                          std::size_t jobs) {
  std::vector<RunResult> results(keys.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < keys.size(); ++i) results[i] = execute_run(cfg, keys[i]);
    return results;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= keys.size()) return;
      results[i] = execute_run(cfg, keys[i]);
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return results;
}

// results.csv: dot-decimal, LF line endings, fixed header.
inline void write_results_csv(const std::string& path, const std::vector<RunResult>& results) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path);
  out << "run_id,room_t60,seed,algorithm,channel,sdr_db,sir_db,sar_db,iterations,wall_ms,flags\n";
  for (const RunResult& r : results) {
    std::string flags;
    for (std::size_t i = 0; i < r.flags.size(); ++i) {
      if (i) flags += ';';
      for (char ch : r.flags[i]) flags += (ch == ',' ? ';' : ch);
    }
    if (r.failed) {
      out << r.run_id << ',' << run_detail::format_real(r.key.t60, 3) << ',' << r.key.seed
          << ',' << r.key.algorithm << ",-1,nan,nan,nan," << r.iterations << ','
          << run_detail::format_real(r.wall_ms, 3) << ',' << flags << "\n";
      continue;
    }
    for (std::size_t ch = 0; ch < r.report.channels.size(); ++ch) {
      const BssEvalChannel& c = r.report.channels[ch];
      out << r.run_id << ',' << run_detail::format_real(r.key.t60, 3) << ',' << r.key.seed
          << ',' << r.key.algorithm << ',' << ch << ','
          << run_detail::format_real(c.sdr_db) << ',' << run_detail::format_real(c.sir_db)
          << ',' << run_detail::format_real(c.sar_db) << ',' << r.iterations << ','
          << run_detail::format_real(r.wall_ms, 3) << ',' << flags << "\n";
    }
  }
}

// One manifest per run: the fully resolved configuration plus the cost trace.
inline void write_manifest(const std::string& dir, const ExperimentConfig& cfg,
                           const RunResult& r) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir + "/" + r.run_id + ".manifest.txt", std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write manifest for " + r.run_id);
  out << "[run]\n";
  out << "run_id = " << r.run_id << "\n";
  out << "t60 = " << run_detail::format_real(r.key.t60, 3) << "\n";
  out << "seed = " << r.key.seed << "\n";
  out << "algorithm = " << r.key.algorithm << "\n";
  out << "iterations = " << r.iterations << "\n";
  out << "wall_ms = " << run_detail::format_real(r.wall_ms, 3) << "\n";
  if (r.failed) out << "failure = " << r.failure << "\n";
  out << "\n[scenario]\n";
  out << "duration_s = " << run_detail::format_real(cfg.scenario.duration_s, 3) << "\n";
  out << "sample_rate = " << cfg.scenario.sample_rate << "\n";
  out << "rir_length = " << cfg.scenario.rir_length << "\n";
  out << "base_delay = " << cfg.scenario.base_delay << "\n";
  out << "mic_spacing_m = " << run_detail::format_real(cfg.scenario.mic_spacing_m, 4) << "\n";
  out << "source_kind = " << cfg.scenario.source_kind << "\n";
  out << "\n[stft]\n";
  out << "window = " << window_kind_name(cfg.stft.window_kind) << "\n";
  out << "window_length = " << cfg.stft.window_length << "\n";
  out << "hop = " << cfg.stft.hop << "\n";
  out << "fft_length = " << cfg.stft.fft_length << "\n";
  const SolverConfig* solver = nullptr;
  if (r.key.algorithm == "gradiva") solver = &cfg.gradiva;
  if (r.key.algorithm == "auxiva") solver = &cfg.auxiva;
  if (r.key.algorithm == "fdica") solver = &cfg.fdica;
  if (r.key.algorithm == "trinicon-sos") solver = &cfg.trinicon;
  if (solver) {
    out << "\n[solver]\n";
    out << "iterations = " << solver->iterations << "\n";
    out << "step_size = " << run_detail::format_real(solver->step_size, 6) << "\n";
    out << "tolerance = " << run_detail::format_real(solver->tolerance, 12) << "\n";
    if (r.key.algorithm == "trinicon-sos") {
      out << "filter_length = " << cfg.trinicon_shape.filter_length << "\n";
      out << "block_length = " << cfg.trinicon_shape.block_length << "\n";
      out << "block_shift = " << cfg.trinicon_shape.block_shift << "\n";
    }
  }
  out << "\n[metrics]\n";
  out << "proj_len = " << cfg.proj_len << "\n";
  if (!r.cost_trace.empty()) {
    out << "\n[cost_trace]\n";
    for (std::size_t i = 0; i < r.cost_trace.size(); ++i)
      out << i << " = " << run_detail::format_real(r.cost_trace[i], 9) << "\n";
  }
}

}  // namespace cbss::bench

#endif  // CBSS_BENCH_RUNNER_HPP_
