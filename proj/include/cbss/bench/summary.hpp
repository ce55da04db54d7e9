// cbss/bench/summary.hpp

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

// Five-number summaries (min, Q1, median, Q3, max) of SDR/SIR/SAR per
// (room, algorithm) cell, pooling channels and seeds: the machine-readable
// analogue of a boxplot. Median is the standard midpoint convention;
// quartiles are Tukey hinges (medians of the lower/upper halves, middle
// element shared when the count is odd).

#ifndef CBSS_BENCH_SUMMARY_HPP_
#define CBSS_BENCH_SUMMARY_HPP_

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cbss/common.hpp"

namespace cbss::bench {

struct FiveNumbers {
  Real min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

inline Real median_of_sorted(const std::vector<Real>& v, std::size_t lo, std::size_t hi) {
  const std::size_t n = hi - lo;
  if (n == 0) return 0.0;
  if (n % 2 == 1) return v[lo + n / 2];
  return 0.5 * (v[lo + n / 2 - 1] + v[lo + n / 2]);
}

inline FiveNumbers five_number_summary(std::vector<Real> v) {
  if (v.empty()) throw std::invalid_argument("five_number_summary: empty sample");
  std::sort(v.begin(), v.end());
  FiveNumbers f;
  const std::size_t n = v.size();
  f.min = v.front();
  f.max = v.back();
  f.median = median_of_sorted(v, 0, n);
  // Tukey hinges: odd counts share the middle element with both halves.
  const std::size_t half = n / 2;
  f.q1 = median_of_sorted(v, 0, n % 2 == 1 ? half + 1 : half);
  f.q3 = median_of_sorted(v, n % 2 == 1 ? half : half, n);
  return f;
}

struct ResultRow {
  std::string run_id;
  Real room_t60 = 0.0;
  std::uint64_t seed = 0;
  std::string algorithm;
  long channel = 0;
  Real sdr_db = 0.0, sir_db = 0.0, sar_db = 0.0;
  bool valid = true;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream iss(line);
  while (std::getline(iss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open results file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty results file: " + path);
  if (line.rfind("run_id,room_t60,seed,algorithm,channel", 0) != 0)
    throw FormatError("unexpected results header: " + line);
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 11)
      throw FormatError("line " + std::to_string(lineno) + ": expected 11 fields, got " +
                        std::to_string(f.size()));
    ResultRow r;
    try {
      r.run_id = f[0];
      r.room_t60 = std::stod(f[1]);
      r.seed = static_cast<std::uint64_t>(std::stoul(f[2]));
      r.algorithm = f[3];
      r.channel = std::stol(f[4]);
      if (f[5] == "nan" || r.channel < 0) {
        r.valid = false;
      } else {
        r.sdr_db = std::stod(f[5]);
        r.sir_db = std::stod(f[6]);
        r.sar_db = std::stod(f[7]);
      }
    } catch (const std::exception&) {
      throw FormatError("line " + std::to_string(lineno) + ": malformed row");
    }
    rows.push_back(r);
  }
  return rows;
}

struct SummaryCell {
  Real room_t60 = 0.0;
  std::string algorithm;
  std::string metric;
  FiveNumbers stats;
  std::size_t count = 0;
};

inline std::vector<SummaryCell> summarize_rows(const std::vector<ResultRow>& rows) {
  // Preserve first-appearance order of (room, algorithm) cells.
  std::vector<std::pair<Real, std::string>> order;
  std::map<std::pair<Real, std::string>, std::vector<const ResultRow*>> cells;
  for (const ResultRow& r : rows) {
    if (!r.valid) continue;
    auto key = std::make_pair(r.room_t60, r.algorithm);
    if (!cells.count(key)) order.push_back(key);
    cells[key].push_back(&r);
  }
  std::vector<SummaryCell> out;
  for (const auto& key : order) {
    const auto& group = cells[key];
    for (const char* metric : {"sdr", "sir", "sar"}) {
      SummaryCell cell;
      cell.room_t60 = key.first;
      cell.algorithm = key.second;
      cell.metric = metric;
      std::vector<Real> vals;
      for (const ResultRow* r : group)
        vals.push_back(metric[1] == 'd' ? r->sdr_db : (metric[1] == 'i' ? r->sir_db : r->sar_db));
      cell.stats = five_number_summary(std::move(vals));
      cell.count = group.size();
      out.push_back(std::move(cell));
    }
  }
  return out;
}

inline void write_summary_csv(const std::string& path, const std::vector<SummaryCell>& cells) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path);
  auto fmt = [](Real v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return std::string(buf);
  };
  out << "room_t60,algorithm,metric,count,min,q1,median,q3,max\n";
  for (const SummaryCell& c : cells)
    out << fmt(c.room_t60, 3) << ',' << c.algorithm << ',' << c.metric << ',' << c.count
        << ',' << fmt(c.stats.min, 6) << ',' << fmt(c.stats.q1, 6) << ','
        << fmt(c.stats.median, 6) << ',' << fmt(c.stats.q3, 6) << ','
        << fmt(c.stats.max, 6) << "\n";
}

}  // namespace cbss::bench

#endif  // CBSS_BENCH_SUMMARY_HPP_
