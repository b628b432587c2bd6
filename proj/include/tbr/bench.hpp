#pragma once

#include <chrono>
#include <ostream>
#include <string>
#include <vector>

#include "tbr/verify.hpp"

/*
 * Benchmark harness. One CSV row per (query, algorithm) measurement plus one
 * aggregate row per algorithm. Timing uses a monotonic clock, excludes
 * artifact loading and skips a warmup pass. Schema (no quoting, tag and
 * numeric fields only):
 *
 *   kind,query,algorithm,k,time_us,scanned_segments,relaxed_transfers,
 *   rounds,correct,speedup_vs_tb,query_rate,journey_rate
 */

namespace tbr {

enum class BenchAlgo { kTb, kArcflag, kOracle };

inline const char* to_string(BenchAlgo a) {
  switch (a) {
    case BenchAlgo::kTb: return "tb";
    case BenchAlgo::kArcflag: return "arcflag";
    case BenchAlgo::kOracle: return "oracle";
  }
  return "?";
}

struct BenchArtifacts {
  const Timetable* timetable = nullptr;
  const TransferSet* transfers = nullptr;
  const FlagStore* flags = nullptr;        // required for arcflag
  const Partition* partition = nullptr;    // required for arcflag
};

struct BenchRecord {
  BenchAlgo algo;
  uint32_t k = 0;
  double time_us = 0;
  uint64_t scanned_segments = 0;
  uint64_t relaxed_transfers = 0;
  int rounds = 0;
  int correct = -1;  // -1: not evaluated
};

struct BenchOptions {
  size_t warmup = 100;
  int max_rounds = 16;
};

inline void run_bench(const BenchArtifacts& art,
                      const std::vector<QuerySpec>& workload,
                      const std::vector<BenchAlgo>& algorithms,
                      std::ostream& csv, const BenchOptions& opts = {}) {
  if (!art.timetable || !art.transfers)
    throw std::invalid_argument("bench: timetable and transfers are required");
  const Timetable& tt = *art.timetable;
  const TransferSet& ts = *art.transfers;
  bool want_arcflag = false, want_oracle = false;
  for (BenchAlgo a : algorithms) {
    if (a == BenchAlgo::kArcflag) want_arcflag = true;
    if (a == BenchAlgo::kOracle) want_oracle = true;
  }
  if (want_arcflag && (!art.flags || !art.partition))
    throw std::invalid_argument("bench: arcflag needs flags and partition");

  TbQuery engine(tt, ts);
  Oracle oracle(tt);
  using Clock = std::chrono::steady_clock;

  // Oracle pairs for correctness marking, computed once per query.
  std::vector<std::vector<std::pair<Time, int>>> truth;
  if (want_oracle) {
    truth.reserve(workload.size());
    for (const QuerySpec& q : workload)
      truth.push_back(
          sorted_pairs(oracle.query(q.source, q.target, q.dep, opts.max_rounds)));
  }

  csv << "kind,query,algorithm,k,time_us,scanned_segments,relaxed_transfers,"
         "rounds,correct,speedup_vs_tb,query_rate,journey_rate\n";

  struct Agg {
    double time_us = 0;
    uint64_t scanned = 0, relaxed = 0;
    size_t n = 0, correct = 0, evaluated = 0;
    size_t journeys = 0, matched = 0;
  };
  std::vector<Agg> agg(algorithms.size());
  double tb_mean_time = 0;

  for (size_t ai = 0; ai < algorithms.size(); ++ai) {
    BenchAlgo algo = algorithms[ai];
    TransferFilter filter;
    if (algo == BenchAlgo::kArcflag) filter.stride = 0;  // set per query

    size_t warm = std::min(opts.warmup, workload.size());
    for (size_t i = 0; i < warm + workload.size(); ++i) {
      bool measured = i >= warm;
      const QuerySpec& q = workload[measured ? i - warm : i];
      BenchRecord rec;
      rec.algo = algo;
      ParetoSet result;
      auto t0 = Clock::now();
      switch (algo) {
        case BenchAlgo::kTb:
          result = engine.run(q.source, q.target, q.dep, {}, opts.max_rounds);
          break;
        case BenchAlgo::kArcflag:
          result = engine.run(q.source, q.target, q.dep,
                              art.flags->filter(art.partition->cell_of[q.target]),
                              opts.max_rounds);
          rec.k = art.flags->k;
          break;
        case BenchAlgo::kOracle:
          result = oracle.query(q.source, q.target, q.dep, opts.max_rounds);
          break;
      }
      auto t1 = Clock::now();
      if (!measured) continue;
      rec.time_us =
          std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count() /
          1000.0;
      if (algo != BenchAlgo::kOracle) {
        rec.scanned_segments = engine.stats().scanned_segments;
        rec.relaxed_transfers = engine.stats().relaxed_transfers;
        rec.rounds = engine.stats().rounds;
      }
      size_t qi = i - warm;
      if (want_oracle) {
        auto got = sorted_pairs(result);
        rec.correct = (got == truth[qi]) ? 1 : 0;
        agg[ai].evaluated++;
        agg[ai].correct += rec.correct == 1;
        agg[ai].journeys += truth[qi].size();
        for (const auto& pair : truth[qi])
          if (std::binary_search(got.begin(), got.end(), pair))
            agg[ai].matched++;
      }
      agg[ai].time_us += rec.time_us;
      agg[ai].scanned += rec.scanned_segments;
      agg[ai].relaxed += rec.relaxed_transfers;
      agg[ai].n++;

      csv << "row," << qi << ',' << to_string(algo) << ',' << rec.k << ','
          << rec.time_us << ',' << rec.scanned_segments << ','
          << rec.relaxed_transfers << ',' << rec.rounds << ',';
      if (rec.correct >= 0) csv << rec.correct;
      csv << ",,,\n";
    }
    if (algo == BenchAlgo::kTb && agg[ai].n)
      tb_mean_time = agg[ai].time_us / agg[ai].n;
  }

  for (size_t ai = 0; ai < algorithms.size(); ++ai) {
    const Agg& a = agg[ai];
    if (a.n == 0) continue;
    double mean = a.time_us / a.n;
    csv << "aggregate,," << to_string(algorithms[ai]) << ',';
    if (algorithms[ai] == BenchAlgo::kArcflag && art.flags)
      csv << art.flags->k;
    else
      csv << 0;
    csv << ',' << mean << ',' << (a.scanned / a.n) << ',' << (a.relaxed / a.n)
        << ",,";
    if (a.evaluated) csv << (static_cast<double>(a.correct) / a.evaluated);
    csv << ',';
    if (tb_mean_time > 0 && mean > 0) csv << (tb_mean_time / mean);
    csv << ',';
    if (a.evaluated) csv << (static_cast<double>(a.correct) / a.evaluated);
    csv << ',';
    if (a.journeys) csv << (static_cast<double>(a.matched) / a.journeys);
    csv << '\n';
  }
}

}  // namespace tbr
