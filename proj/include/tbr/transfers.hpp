#pragma once

#include <algorithm>
#include <cstdint>
#include <tuple>
#include <vector>

#include "tbr/parallel.hpp"
#include "tbr/timetable.hpp"

/*
 * Transfer precomputation. A transfer connects a stop event of one trip to a
 * stop event of another trip such that the change is feasible:
 *
 *     arr(Ta, i) + walk(stop(Ta, i), stop(Tb, j)) <= dep(Tb, j)
 *
 * with i >= 1 (at least one segment ridden before alighting) and
 * j <= |Tb| - 2 (at least one segment ridable after boarding). Per exit
 * event, target line and entry position only the earliest reachable trip is
 * kept. Reduced mode additionally drops U-turns and transfers that do not
 * improve any arrival beyond what the originating trip's later events and
 * already-kept transfers provide.
 */

namespace tbr {

struct Transfer {
  TripId from_trip;
  uint32_t from_pos;
  TripId to_trip;
  uint32_t to_pos;

  bool operator==(const Transfer&) const = default;
};

enum class TransferPruning { kFull, kReduced };

struct TransferSet {
  std::vector<Transfer> transfers;       // ids are positions in this vector
  std::vector<uint32_t> event_offsets;   // per event id, into `transfers`

  size_t size() const { return transfers.size(); }

  // Outgoing transfers of stop event (trip, pos): [begin, end) transfer ids.
  std::pair<uint32_t, uint32_t> outgoing(const Timetable& tt, TripId trip,
                                         uint32_t pos) const {
    uint32_t e = tt.event_id(trip, pos);
    return {event_offsets[e], event_offsets[e + 1]};
  }

  // Id of the transfer with these exact endpoints, or kNone32.
  uint32_t find(const Timetable& tt, TripId from_trip, uint32_t from_pos,
                TripId to_trip, uint32_t to_pos) const {
    auto [b, e] = outgoing(tt, from_trip, from_pos);
    for (uint32_t id = b; id < e; ++id) {
      const Transfer& t = transfers[id];
      if (t.to_trip == to_trip && t.to_pos == to_pos) return id;
    }
    return kNone32;
  }
};

namespace detail {

inline std::tuple<uint32_t, LineId, uint32_t, uint32_t> adjacency_key(
    const Timetable& tt, const Transfer& t) {
  return {t.from_pos, tt.trips[t.to_trip].line, t.to_pos,
          tt.trips[t.to_trip].index_in_line};
}

// Candidate transfers out of one trip: all feasible changes, restricted per
// (exit event, target line, entry position) to the earliest reachable trip.
inline std::vector<Transfer> line_minimal_candidates(const Timetable& tt,
                                                     TripId ta) {
  std::vector<Transfer> out;
  uint32_t len = tt.trip_length(ta);
  for (uint32_t i = 1; i < len; ++i) {
    StopId p = tt.stop_of(ta, i);
    Time base = tt.arr(ta, i);
    auto consider = [&](StopId q, Time walk) {
      for (const LineStop& ls : tt.stops_to_lines[q]) {
        const Line& line = tt.lines[ls.line];
        if (ls.position + 2 > line.stops.size()) continue;  // entry needs a ride
        auto tb = earliest_trip(tt, ls.line, ls.position, base + walk);
        if (!tb) continue;
        if (*tb == ta && ls.position == i) continue;  // no-op self change
        out.push_back({ta, i, *tb, ls.position});
      }
    };
    consider(p, 0);
    for (const auto& e : tt.footpaths.out[p]) consider(e.to, e.seconds);
  }
  std::sort(out.begin(), out.end(), [&](const Transfer& a, const Transfer& b) {
    return adjacency_key(tt, a) < adjacency_key(tt, b);
  });
  return out;
}

inline bool is_uturn(const Timetable& tt, const Transfer& t) {
  if (t.from_pos < 1 || t.to_pos + 1 >= tt.trip_length(t.to_trip)) return false;
  return tt.stop_of(t.from_trip, t.from_pos - 1) ==
             tt.stop_of(t.to_trip, t.to_pos + 1) &&
         tt.arr(t.to_trip, t.to_pos + 1) >= tt.arr(t.from_trip, t.from_pos - 1);
}

// Backward scan over the originating trip's exit positions. At each position
// the arrivals reachable by simply alighting (including footpaths) seed the
// map; a candidate transfer survives only if riding the entered trip strictly
// improves the earliest known time somewhere.
class ImprovementFilter {
 public:
  explicit ImprovementFilter(const Timetable& tt)
      : tt_(tt), best_(tt.n_stops(), kInfTime) {}

  // `cand` must be sorted by from_pos ascending (adjacency order is).
  std::vector<Transfer> filter(TripId ta, const std::vector<Transfer>& cand) {
    for (StopId s : touched_) best_[s] = kInfTime;
    touched_.clear();
    std::vector<Transfer> kept;
    uint32_t len = tt_.trip_length(ta);
    size_t idx = cand.size();
    for (uint32_t i = len; i-- > 1;) {
      StopId p = tt_.stop_of(ta, i);
      Time a = tt_.arr(ta, i);
      improve(p, a);
      for (const auto& e : tt_.footpaths.out[p]) improve(e.to, a + e.seconds);
      size_t hi = idx;
      while (idx > 0 && cand[idx - 1].from_pos == i) --idx;
      for (size_t c = idx; c < hi; ++c) {
        const Transfer& t = cand[c];
        bool keep = false;
        for (uint32_t k = t.to_pos + 1; k < tt_.trip_length(t.to_trip); ++k) {
          StopId q = tt_.stop_of(t.to_trip, k);
          Time ta_k = tt_.arr(t.to_trip, k);
          if (improve(q, ta_k)) keep = true;
          for (const auto& e : tt_.footpaths.out[q])
            if (improve(e.to, ta_k + e.seconds)) keep = true;
        }
        if (keep) kept.push_back(t);
      }
    }
    std::sort(kept.begin(), kept.end(), [&](const Transfer& a, const Transfer& b) {
      return adjacency_key(tt_, a) < adjacency_key(tt_, b);
    });
    return kept;
  }

 private:
  bool improve(StopId s, Time t) {
    if (t >= best_[s]) return false;
    if (best_[s] == kInfTime) touched_.push_back(s);
    best_[s] = t;
    return true;
  }

  const Timetable& tt_;
  std::vector<Time> best_;
  std::vector<StopId> touched_;
};

}  // namespace detail

inline TransferSet generate_transfers(const Timetable& tt,
                                      TransferPruning pruning,
                                      unsigned threads = 1) {
  std::vector<std::vector<Transfer>> per_trip(tt.n_trips());
  if (pruning == TransferPruning::kFull) {
    parallel_for(tt.n_trips(), threads, [&](size_t t) {
      per_trip[t] = detail::line_minimal_candidates(tt, static_cast<TripId>(t));
    });
  } else {
    parallel_for_with_state(
        tt.n_trips(), threads,
        [&] { return detail::ImprovementFilter(tt); },
        [&](detail::ImprovementFilter& filter, size_t t) {
          TripId ta = static_cast<TripId>(t);
          auto cand = detail::line_minimal_candidates(tt, ta);
          std::erase_if(cand,
                        [&](const Transfer& tr) { return detail::is_uturn(tt, tr); });
          per_trip[t] = filter.filter(ta, cand);
        });
  }

  TransferSet ts;
  ts.event_offsets.assign(tt.n_events() + 1, 0);
  for (TripId t = 0; t < tt.n_trips(); ++t)
    for (const Transfer& tr : per_trip[t])
      ts.event_offsets[tt.event_id(t, tr.from_pos) + 1]++;
  for (size_t i = 1; i < ts.event_offsets.size(); ++i)
    ts.event_offsets[i] += ts.event_offsets[i - 1];
  ts.transfers.reserve(ts.event_offsets.back());
  for (TripId t = 0; t < tt.n_trips(); ++t)
    for (const Transfer& tr : per_trip[t]) ts.transfers.push_back(tr);
  return ts;
}

// Checks the feasibility inequality for a single transfer.
inline bool transfer_feasible(const Timetable& tt, const Transfer& t) {
  Time walk = tt.footpaths.at(tt.stop_of(t.from_trip, t.from_pos),
                              tt.stop_of(t.to_trip, t.to_pos));
  if (walk >= kInfTime) return false;
  return tt.arr(t.from_trip, t.from_pos) + walk <= tt.dep(t.to_trip, t.to_pos);
}

}  // namespace tbr
