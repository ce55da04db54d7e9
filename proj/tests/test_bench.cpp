// tests/test_bench.cpp

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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cbss/bench/config.hpp"
#include "cbss/bench/identities.hpp"
#include "cbss/bench/runner.hpp"
#include "cbss/bench/summary.hpp"
#include "cbss/rng.hpp"

using namespace cbss;
using namespace cbss::bench;

TEST_SUITE_BEGIN("bench");

namespace {

const char* kTinyConfig = R"(
# tiny smoke configuration
[scenario]
t60 = 0.08
duration_s = 0.5
sample_rate = 16000
rir_length = 64
base_delay = 8
seeds = 1 2

[stft]
window = hamming
window_length = 256
hop = 128

[algorithms]
list = mix auxiva

[auxiva]
iterations = 8

[metrics]
proj_len = 96
)";

ExperimentConfig tiny_config() {
  std::istringstream in(kTinyConfig);
  return resolve_experiment_config(parse_config_text(in));
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("config parsing resolves sections, lists and ranges") {
  ExperimentConfig cfg = tiny_config();
  CHECK(cfg.scenario.t60_list == std::vector<Real>{0.08});
  CHECK(cfg.scenario.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(cfg.algorithms == std::vector<std::string>{"mix", "auxiva"});
  CHECK(cfg.auxiva.iterations == 8);
  CHECK(cfg.proj_len == 96);

  std::istringstream range("[scenario]\nseeds = 3..6\n");
  auto parsed = parse_config_text(range);
  auto resolved = resolve_experiment_config(parsed);
  CHECK(resolved.scenario.seeds == std::vector<std::uint64_t>{3, 4, 5, 6});
}

TEST_CASE("config errors carry the offending line number") {
  std::istringstream bad("[scenario]\nt60 = 0.2\nwhat is this\n");
  try {
    parse_config_text(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  std::istringstream bad_num("[scenario]\nduration_s = fast\n");
  try {
    resolve_experiment_config(parse_config_text(bad_num));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  std::istringstream bad_alg("[algorithms]\nlist = auxiva teleportation\n");
  CHECK_THROWS_AS(resolve_experiment_config(parse_config_text(bad_alg)), ConfigError);

  std::istringstream empty_alg("[algorithms]\nlist =\n");
  CHECK_THROWS_AS(resolve_experiment_config(parse_config_text(empty_alg)), ConfigError);
}

TEST_CASE("runner emits rows = scenarios x seeds x algorithms x channels") {
  ExperimentConfig cfg = tiny_config();
  auto keys = enumerate_runs(cfg);
  REQUIRE(keys.size() == 1 * 2 * 2);  // rooms x seeds x algorithms
  auto results = execute_all(cfg, keys, 1);
  auto dir = std::filesystem::temp_directory_path() / "cbss_bench_test";
  std::filesystem::create_directories(dir);
  write_results_csv((dir / "results.csv").string(), results);

  auto rows = read_results_csv((dir / "results.csv").string());
  CHECK(rows.size() == keys.size() * 2);  // one row per output channel
  for (const auto& r : rows) CHECK(r.valid);
  // Ordering: seed-major within the single room, algorithm order preserved.
  CHECK(rows[0].algorithm == "mix");
  CHECK(rows[2].algorithm == "auxiva");
  CHECK(rows[0].seed == 1);
  CHECK(rows[4].seed == 2);
  CHECK(rows[7].algorithm == "auxiva");
  std::filesystem::remove_all(dir);
}

TEST_CASE("two identical runs produce byte-identical results.csv") {
  ExperimentConfig cfg = tiny_config();
  auto keys = enumerate_runs(cfg);
  auto dir = std::filesystem::temp_directory_path() / "cbss_bench_det";
  std::filesystem::create_directories(dir);

  auto res_a = execute_all(cfg, keys, 1);
  write_results_csv((dir / "a.csv").string(), res_a);
  auto res_b = execute_all(cfg, keys, 2);  // different worker count
  write_results_csv((dir / "b.csv").string(), res_b);

  std::string a = read_file(dir / "a.csv");
  std::string b = read_file(dir / "b.csv");
  // Wall-clock differs between runs by design; compare with the timing
  // column blanked out.
  auto strip_wall = [](const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
      std::size_t last = line.rfind(',');
      std::size_t prev = line.rfind(',', last - 1);
      out += line.substr(0, prev) + line.substr(last);
      out += '\n';
    }
    return out;
  };
  CHECK(strip_wall(a) == strip_wall(b));
  CHECK(a.find("\r") == std::string::npos);  // LF line endings only
  std::filesystem::remove_all(dir);
}

TEST_CASE("per-run manifests carry the resolved config and cost trace") {
  ExperimentConfig cfg = tiny_config();
  cfg.scenario.seeds = {1};
  auto keys = enumerate_runs(cfg);
  auto results = execute_all(cfg, keys, 1);
  auto dir = std::filesystem::temp_directory_path() / "cbss_manifests";
  for (const auto& r : results) write_manifest(dir.string(), cfg, r);
  std::string m = read_file(dir / (results[1].run_id + ".manifest.txt"));
  CHECK(m.find("algorithm = auxiva") != std::string::npos);
  CHECK(m.find("window = hamming") != std::string::npos);
  CHECK(m.find("[cost_trace]") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("seed offset shifts every seed") {
  ExperimentConfig cfg = tiny_config();
  auto keys = enumerate_runs(cfg, 100);
  CHECK(keys[0].seed == 101);
  CHECK(keys.back().seed == 102);
}

TEST_CASE("five-number summary matches a sort-based oracle") {
  Rng rng(3);
  std::vector<Real> sample(20);
  for (Real& v : sample) v = rng.normal();
  FiveNumbers f = five_number_summary(sample);

  std::vector<Real> sorted = sample;
  std::sort(sorted.begin(), sorted.end());
  CHECK(f.min == sorted.front());
  CHECK(f.max == sorted.back());
  CHECK(f.median == doctest::Approx(0.5 * (sorted[9] + sorted[10])).epsilon(1e-15));
  CHECK(f.q1 == doctest::Approx(0.5 * (sorted[4] + sorted[5])).epsilon(1e-15));
  CHECK(f.q3 == doctest::Approx(0.5 * (sorted[14] + sorted[15])).epsilon(1e-15));

  SUBCASE("single observation collapses all five numbers") {
    FiveNumbers g = five_number_summary({2.5});
    CHECK(g.min == 2.5);
    CHECK(g.q1 == 2.5);
    CHECK(g.median == 2.5);
    CHECK(g.q3 == 2.5);
    CHECK(g.max == 2.5);
  }
}

TEST_CASE("summarize groups by room and algorithm with stable ordering") {
  std::vector<ResultRow> rows;
  Rng rng(5);
  for (int seed = 0; seed < 10; ++seed)
    for (const char* alg : {"auxiva", "gradiva"})
      for (int ch = 0; ch < 2; ++ch) {
        ResultRow r;
        r.room_t60 = 0.2;
        r.seed = seed;
        r.algorithm = alg;
        r.channel = ch;
        r.sir_db = rng.normal() + (alg[0] == 'a' ? 15.0 : 10.0);
        r.sdr_db = r.sir_db - 2.0;
        r.sar_db = r.sir_db - 1.0;
        rows.push_back(r);
      }
  auto cells = summarize_rows(rows);
  REQUIRE(cells.size() == 6);  // 2 algorithms x 3 metrics
  CHECK(cells[0].algorithm == "auxiva");
  CHECK(cells[3].algorithm == "gradiva");
  CHECK(cells[0].count == 20);
  // auxiva's median SIR should exceed gradiva's by construction.
  Real aux_sir = 0.0, grad_sir = 0.0;
  for (const auto& c : cells) {
    if (c.metric == "sir" && c.algorithm == "auxiva") aux_sir = c.stats.median;
    if (c.metric == "sir" && c.algorithm == "gradiva") grad_sir = c.stats.median;
  }
  CHECK(aux_sir > grad_sir);
}

TEST_CASE("summary csv round trip through the writer") {
  std::vector<ResultRow> rows;
  ResultRow r;
  r.run_id = "x";
  r.room_t60 = 0.4;
  r.seed = 1;
  r.algorithm = "mix";
  r.channel = 0;
  r.sdr_db = 1.0;
  r.sir_db = 2.0;
  r.sar_db = 3.0;
  rows.push_back(r);
  auto dir = std::filesystem::temp_directory_path() / "cbss_summary";
  std::filesystem::create_directories(dir);
  write_summary_csv((dir / "summary.csv").string(), summarize_rows(rows));
  std::string text = read_file(dir / "summary.csv");
  CHECK(text.find("room_t60,algorithm,metric,count,min,q1,median,q3,max") == 0);
  CHECK(text.find("0.400,mix,sir,1,2.000000,2.000000,2.000000,2.000000,2.000000") !=
        std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("malformed results csv is rejected") {
  auto dir = std::filesystem::temp_directory_path() / "cbss_badcsv";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "bad.csv", std::ios::binary);
    out << "not,the,header\n";
  }
  CHECK_THROWS_AS(read_results_csv((dir / "bad.csv").string()), FormatError);
  {
    std::ofstream out(dir / "short.csv", std::ios::binary);
    out << "run_id,room_t60,seed,algorithm,channel,sdr_db,sir_db,sar_db,iterations,wall_ms,flags\n";
    out << "a,0.2,1,mix,0,1.0\n";
  }
  CHECK_THROWS_AS(read_results_csv((dir / "short.csv").string()), FormatError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("identity suite passes at reduced trial counts") {
  auto results = run_all_identities(5);
  REQUIRE(results.size() == 6);
  for (const auto& r : results) {
    INFO(r.name, " max_dev=", r.max_deviation, " tol=", r.tolerance);
    CHECK(r.pass());
  }
  // A single trial still exercises every identity once.
  auto one = run_all_identities(1);
  REQUIRE(one.size() == 6);
  for (const auto& r : one) {
    CHECK(r.trials == 1);
    CHECK(r.pass());
  }
}

TEST_CASE("a broken tolerance makes the identity suite fail") {
  IdentityTolerances tol;
  tol.determinant = 0.0;
  auto results = run_all_identities(3, tol);
  bool any_fail = false;
  for (const auto& r : results) any_fail = any_fail || !r.pass();
  CHECK(any_fail);
}

TEST_SUITE_END();
