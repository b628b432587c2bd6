#pragma once

#include <algorithm>
#include <mutex>
#include <vector>

#include "tbr/arcflags.hpp"
#include "tbr/oracle.hpp"
#include "tbr/query.hpp"
#include "tbr/rng.hpp"

/*
 * Success-rate measurement of flagged queries against the exact oracle.
 * A query counts as correct when the flagged Pareto set equals the oracle's
 * as a set of (arrival, trips) pairs; the journey rate counts, over all
 * oracle-Pareto journeys, those matched by a flagged journey equal in both
 * criteria.
 */

namespace tbr {

struct QuerySpec {
  StopId source;
  StopId target;
  Time dep;
};

// Random workload: stops uniform (source != target), departures uniform
// over the first day. Reproducible from the seed.
inline std::vector<QuerySpec> make_workload(const Timetable& tt, size_t n,
                                            uint64_t seed) {
  if (tt.n_stops() < 2) throw std::invalid_argument("workload needs >= 2 stops");
  Rng rng(seed);
  std::vector<QuerySpec> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    StopId s = static_cast<StopId>(rng.below(tt.n_stops()));
    StopId t = static_cast<StopId>(rng.below(tt.n_stops()));
    while (t == s) t = static_cast<StopId>(rng.below(tt.n_stops()));
    Time dep = static_cast<Time>(rng.below(86400));
    out.push_back({s, t, dep});
  }
  return out;
}

inline std::vector<std::pair<Time, int>> sorted_pairs(const ParetoSet& p) {
  auto v = p.pairs();
  std::sort(v.begin(), v.end());
  return v;
}

struct RateReport {
  size_t n_queries = 0;
  size_t correct_queries = 0;
  size_t n_journeys = 0;        // oracle-Pareto journeys, deduplicated
  size_t matched_journeys = 0;  // matched in both criteria by the flagged run
  struct Failure {
    QuerySpec query;
    std::vector<std::pair<Time, int>> expected;
    std::vector<std::pair<Time, int>> got;
  };
  std::vector<Failure> failures;

  double query_rate() const {
    return n_queries ? static_cast<double>(correct_queries) / n_queries : 1.0;
  }
  double journey_rate() const {
    return n_journeys ? static_cast<double>(matched_journeys) / n_journeys : 1.0;
  }
};

inline RateReport success_rates(const Timetable& tt, const TransferSet& ts,
                                const FlagStore& flags,
                                const Partition& partition,
                                const std::vector<QuerySpec>& queries,
                                int max_rounds = 16, unsigned threads = 1,
                                size_t keep_failures = 32) {
  if (queries.empty()) throw std::invalid_argument("success_rates: no queries");
  RateReport rep;
  rep.n_queries = queries.size();
  std::mutex mutex;

  struct Worker {
    TbQuery query;
    Oracle oracle;
    Worker(const Timetable& tt, const TransferSet& ts)
        : query(tt, ts), oracle(tt) {}
  };
  parallel_for_with_state(
      queries.size(), threads,
      [&] { return std::make_shared<Worker>(tt, ts); },
      [&](std::shared_ptr<Worker>& w, size_t i) {
        const QuerySpec& q = queries[i];
        auto expected =
            sorted_pairs(w->oracle.query(q.source, q.target, q.dep, max_rounds));
        auto got = sorted_pairs(
            w->query.run(q.source, q.target, q.dep,
                         flags.filter(partition.cell_of[q.target]), max_rounds));
        size_t matched = 0;
        for (const auto& pair : expected)
          if (std::binary_search(got.begin(), got.end(), pair)) ++matched;
        std::lock_guard<std::mutex> lock(mutex);
        rep.n_journeys += expected.size();
        rep.matched_journeys += matched;
        if (expected == got) {
          rep.correct_queries++;
        } else if (rep.failures.size() < keep_failures) {
          rep.failures.push_back({q, expected, got});
        }
      });
  return rep;
}

}  // namespace tbr
