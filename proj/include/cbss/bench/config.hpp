// cbss/bench/config.hpp

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

// Flat key-value experiment configuration with [section] headers. Parse
// errors carry the offending line number. No environment variables are
// consulted; a config file plus CLI flags fully determines a run.

#ifndef CBSS_BENCH_CONFIG_HPP_
#define CBSS_BENCH_CONFIG_HPP_

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cbss/common.hpp"
#include "cbss/solvers.hpp"
#include "cbss/stft.hpp"

namespace cbss::bench {

struct ParsedConfig {
  // (section, key) -> (value, line). Section "" holds top-level keys.
  std::map<std::pair<std::string, std::string>, std::pair<std::string, int>> entries;

  bool has(const std::string& sec, const std::string& key) const {
    return entries.count({sec, key}) > 0;
  }
  std::string get(const std::string& sec, const std::string& key,
                  const std::string& fallback) const {
    auto it = entries.find({sec, key});
    return it == entries.end() ? fallback : it->second.first;
  }
  int line_of(const std::string& sec, const std::string& key) const {
    auto it = entries.find({sec, key});
    return it == entries.end() ? 0 : it->second.second;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream iss(s);
  std::vector<std::string> out;
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] inline void fail(int line, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

}  // namespace detail

inline ParsedConfig parse_config_text(std::istream& in) {
  ParsedConfig cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') detail::fail(lineno, "unterminated section header");
      section = detail::trim(t.substr(1, t.size() - 2));
      if (section.empty()) detail::fail(lineno, "empty section name");
      continue;
    }
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) detail::fail(lineno, "expected key = value");
    std::string key = detail::trim(t.substr(0, eq));
    std::string val = detail::trim(t.substr(eq + 1));
    if (key.empty()) detail::fail(lineno, "empty key");
    if (cfg.entries.count({section, key}))
      detail::fail(lineno, "duplicate key '" + key + "' in section [" + section + "]");
    cfg.entries[{section, key}] = {val, lineno};
  }
  return cfg;
}

inline ParsedConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config_text(in);
}

// ---------------------------------------------------------------------------

struct ScenarioConfig {
  std::vector<Real> t60_list{0.2};
  Real duration_s = 10.0;
  int sample_rate = 16000;
  std::size_t rir_length = 2048;
  std::size_t base_delay = 32;
  Real mic_spacing_m = 0.042;
  std::vector<std::uint64_t> seeds{1};
  std::string source_kind = "speech_like";  // speech_like | ar_laplace | am_noise | wav:<path>
};

struct OracleConfig {
  std::size_t td_filter_length = 0;  // 0 -> rir_length
  Real ridge_rel = 1e-10;
};

struct TriniconShape {
  std::size_t filter_length = 32;
  std::size_t block_length = 32;
  std::size_t block_shift = 2048;
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  StftConfig stft;
  std::vector<std::string> algorithms{"mix", "gradiva", "auxiva", "oracle-td", "oracle-fd"};
  SolverConfig gradiva = SolverConfig::gradiva_defaults();
  SolverConfig auxiva = SolverConfig::auxiva_defaults();
  SolverConfig fdica = SolverConfig::fdica_defaults();
  SolverConfig trinicon = SolverConfig::trinicon_defaults();
  TriniconShape trinicon_shape;
  OracleConfig oracle;
  std::size_t proj_len = 512;
};

namespace detail {

inline Real parse_real(const ParsedConfig& c, const std::string& sec, const std::string& key,
                       Real fallback) {
  if (!c.has(sec, key)) return fallback;
  const std::string v = c.get(sec, key, "");
  try {
    std::size_t used = 0;
    Real r = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return r;
  } catch (const std::exception&) {
    fail(c.line_of(sec, key), "expected a number for " + key + ", got '" + v + "'");
  }
}

inline long parse_int(const ParsedConfig& c, const std::string& sec, const std::string& key,
                      long fallback) {
  if (!c.has(sec, key)) return fallback;
  const std::string v = c.get(sec, key, "");
  try {
    std::size_t used = 0;
    long r = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return r;
  } catch (const std::exception&) {
    fail(c.line_of(sec, key), "expected an integer for " + key + ", got '" + v + "'");
  }
}

inline std::vector<Real> parse_real_list(const ParsedConfig& c, const std::string& sec,
                                         const std::string& key, std::vector<Real> fallback) {
  if (!c.has(sec, key)) return fallback;
  std::vector<Real> out;
  for (const std::string& tok : split_ws(c.get(sec, key, ""))) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      fail(c.line_of(sec, key), "bad number '" + tok + "' in " + key);
    }
  }
  if (out.empty()) fail(c.line_of(sec, key), key + " must not be empty");
  return out;
}

// "1..20" or a whitespace list of integers.
inline std::vector<std::uint64_t> parse_seed_list(const ParsedConfig& c, const std::string& sec,
                                                  const std::string& key,
                                                  std::vector<std::uint64_t> fallback) {
  if (!c.has(sec, key)) return fallback;
  const std::string v = c.get(sec, key, "");
  std::vector<std::uint64_t> out;
  std::size_t dots = v.find("..");
  if (dots != std::string::npos && v.find(' ') == std::string::npos) {
    try {
      long a = std::stol(v.substr(0, dots));
      long b = std::stol(v.substr(dots + 2));
      if (a > b || a < 0) throw std::invalid_argument("bad range");
      for (long s = a; s <= b; ++s) out.push_back(static_cast<std::uint64_t>(s));
    } catch (const std::exception&) {
      fail(c.line_of(sec, key), "bad seed range '" + v + "'");
    }
  } else {
    for (const std::string& tok : split_ws(v)) {
      try {
        out.push_back(static_cast<std::uint64_t>(std::stoul(tok)));
      } catch (const std::exception&) {
        fail(c.line_of(sec, key), "bad seed '" + tok + "'");
      }
    }
  }
  if (out.empty()) fail(c.line_of(sec, key), "seed list must not be empty");
  return out;
}

inline void fill_solver(const ParsedConfig& c, const std::string& sec, SolverConfig* s) {
  long it = parse_int(c, sec, "iterations", static_cast<long>(s->iterations));
  if (it < 1) fail(c.line_of(sec, "iterations"), "iterations must be >= 1");
  s->iterations = static_cast<std::size_t>(it);
  Real mu = parse_real(c, sec, "step_size", s->step_size);
  if (!(mu > 0.0)) fail(c.line_of(sec, "step_size"), "step_size must be positive");
  s->step_size = mu;
  s->tolerance = parse_real(c, sec, "tolerance", s->tolerance);
}

}  // namespace detail

inline ExperimentConfig resolve_experiment_config(const ParsedConfig& c) {
  using namespace detail;
  ExperimentConfig e;
  e.scenario.t60_list = parse_real_list(c, "scenario", "t60", e.scenario.t60_list);
  for (Real t : e.scenario.t60_list)
    if (!(t > 0.0)) fail(c.line_of("scenario", "t60"), "t60 values must be positive");
  e.scenario.duration_s = parse_real(c, "scenario", "duration_s", e.scenario.duration_s);
  if (!(e.scenario.duration_s > 0.0))
    fail(c.line_of("scenario", "duration_s"), "duration must be positive");
  e.scenario.sample_rate =
      static_cast<int>(parse_int(c, "scenario", "sample_rate", e.scenario.sample_rate));
  if (e.scenario.sample_rate <= 0)
    fail(c.line_of("scenario", "sample_rate"), "sample_rate must be positive");
  e.scenario.rir_length = static_cast<std::size_t>(
      parse_int(c, "scenario", "rir_length", static_cast<long>(e.scenario.rir_length)));
  if (e.scenario.rir_length == 0)
    fail(c.line_of("scenario", "rir_length"), "rir_length must be >= 1");
  e.scenario.base_delay = static_cast<std::size_t>(
      parse_int(c, "scenario", "base_delay", static_cast<long>(e.scenario.base_delay)));
  e.scenario.mic_spacing_m = parse_real(c, "scenario", "mic_spacing_m", e.scenario.mic_spacing_m);
  e.scenario.seeds = parse_seed_list(c, "scenario", "seeds", e.scenario.seeds);
  e.scenario.source_kind = c.get("scenario", "source_kind", e.scenario.source_kind);
  if (e.scenario.source_kind.rfind("wav:", 0) == 0) {
    std::string path = e.scenario.source_kind.substr(4);
    std::ifstream probe(path, std::ios::binary);
    if (!probe)
      fail(c.line_of("scenario", "source_kind"), "source wav file not found: " + path);
  } else if (e.scenario.source_kind != "ar_laplace" && e.scenario.source_kind != "am_noise" &&
             e.scenario.source_kind != "speech_like") {
    fail(c.line_of("scenario", "source_kind"),
         "source_kind must be speech_like, ar_laplace, am_noise or wav:<path>");
  }

  if (c.has("stft", "window"))
    e.stft.window_kind = window_kind_from_name(c.get("stft", "window", "hamming"));
  e.stft.window_length = static_cast<std::size_t>(
      parse_int(c, "stft", "window_length", static_cast<long>(e.stft.window_length)));
  e.stft.hop = static_cast<std::size_t>(parse_int(c, "stft", "hop", static_cast<long>(e.stft.hop)));
  e.stft.fft_length = static_cast<std::size_t>(
      parse_int(c, "stft", "fft_length", static_cast<long>(e.stft.window_length)));
  try {
    e.stft.validate();
  } catch (const std::exception& ex) {
    int ln = c.line_of("stft", "window_length");
    if (ln == 0) ln = c.line_of("stft", "hop");
    fail(ln, std::string("invalid stft config: ") + ex.what());
  }

  if (c.has("algorithms", "list")) {
    e.algorithms = split_ws(c.get("algorithms", "list", ""));
    if (e.algorithms.empty())
      fail(c.line_of("algorithms", "list"), "algorithm list must not be empty");
  }
  for (const std::string& a : e.algorithms)
    if (a != "mix" && a != "gradiva" && a != "auxiva" && a != "fdica" &&
        a != "trinicon-sos" && a != "oracle-td" && a != "oracle-fd")
      fail(c.line_of("algorithms", "list"), "unknown algorithm '" + a + "'");

  fill_solver(c, "gradiva", &e.gradiva);
  fill_solver(c, "auxiva", &e.auxiva);
  fill_solver(c, "fdica", &e.fdica);
  fill_solver(c, "trinicon-sos", &e.trinicon);
  e.trinicon_shape.filter_length = static_cast<std::size_t>(parse_int(
      c, "trinicon-sos", "filter_length", static_cast<long>(e.trinicon_shape.filter_length)));
  e.trinicon_shape.block_length = static_cast<std::size_t>(parse_int(
      c, "trinicon-sos", "block_length", static_cast<long>(e.trinicon_shape.block_length)));
  e.trinicon_shape.block_shift = static_cast<std::size_t>(parse_int(
      c, "trinicon-sos", "block_shift", static_cast<long>(e.trinicon_shape.block_shift)));
  if (e.trinicon_shape.block_length > e.trinicon_shape.filter_length)
    fail(c.line_of("trinicon-sos", "block_length"), "block_length must be <= filter_length");

  e.oracle.td_filter_length = static_cast<std::size_t>(parse_int(
      c, "oracle", "td_filter_length", static_cast<long>(e.oracle.td_filter_length)));
  e.oracle.ridge_rel = parse_real(c, "oracle", "ridge_rel", e.oracle.ridge_rel);

  e.proj_len =
      static_cast<std::size_t>(parse_int(c, "metrics", "proj_len", static_cast<long>(e.proj_len)));
  if (e.proj_len == 0) fail(c.line_of("metrics", "proj_len"), "proj_len must be >= 1");
  return e;
}

}  // namespace cbss::bench

#endif  // CBSS_BENCH_CONFIG_HPP_
