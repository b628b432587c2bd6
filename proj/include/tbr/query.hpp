#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tbr/journey.hpp"
#include "tbr/transfers.hpp"

/*
 * Fixed-departure-time bicriteria query over precomputed transfers: a
 * breadth-first search on trip segments where round n finds journeys with
 * exactly n trips. A reached index per trip records the first position
 * already reached; relaxing a transfer into position l of trip T enqueues
 * the segment T[l, ...] and lowers the reached index of T and all later
 * trips of its line, so each line is only entered on its earliest reachable
 * trip.
 *
 * Scanning a segment entered at position b relaxes transfers and records
 * arrivals for positions strictly after b (the passenger must ride at least
 * one segment); the scan extends up to and including the position where the
 * trip was previously entered, which is the last position this boarding can
 * alight at that earlier boardings cannot.
 */

namespace tbr {

// Transfer admission predicate backed by a flag bit matrix (raw rows or a
// pattern dictionary). A default-constructed filter admits everything.
struct TransferFilter {
  const uint64_t* rows = nullptr;       // raw: transfer-major bit rows
  const uint32_t* index = nullptr;      // dictionary: per-transfer pattern id
  const uint64_t* patterns = nullptr;   // dictionary: pattern rows
  size_t stride = 0;                    // words per row
  uint32_t cell = 0;

  bool active() const { return rows != nullptr || index != nullptr; }

  bool pass(uint32_t transfer_id) const {
    if (rows)
      return (rows[transfer_id * stride + (cell >> 6)] >> (cell & 63)) & 1u;
    if (index)
      return (patterns[index[transfer_id] * stride + (cell >> 6)] >>
              (cell & 63)) &
             1u;
    return true;
  }
};

struct QueryStats {
  uint64_t scanned_segments = 0;
  uint64_t relaxed_transfers = 0;
  int rounds = 0;
};

class TbQuery {
 public:
  TbQuery(const Timetable& tt, const TransferSet& ts)
      : tt_(tt),
        ts_(ts),
        reached_(tt.n_trips(), 0),
        reached_gen_(tt.n_trips(), 0),
        walk_to_target_(tt.n_stops(), kInfTime) {}

  ParetoSet run(StopId source, StopId target, Time dep,
                const TransferFilter& filter = {}, int max_rounds = 16) {
    stats_ = {};
    ParetoSet result;
    if (source == target) return result;  // walk-only is out of the model

    ++generation_;
    queue_.clear();
    for (StopId s : walk_touched_) walk_to_target_[s] = kInfTime;
    walk_touched_.clear();
    set_walk(target, 0);
    for (const auto& e : tt_.footpaths.in[target]) set_walk(e.to, e.seconds);

    // Board the earliest reachable trip of every line at every stop
    // reachable from the source by foot. Initial footpaths carry no flags.
    board_all(source, dep);
    for (const auto& e : tt_.footpaths.out[source])
      board_all(e.to, dep + e.seconds);

    Time best = kInfTime;
    struct Hit {
      int32_t entry;
      uint32_t alight;
      Time arrival;
      int round;
    };
    std::vector<Hit> hits;

    size_t begin = 0;
    for (int round = 1; round <= max_rounds && begin < queue_.size(); ++round) {
      stats_.rounds = round;
      size_t end = queue_.size();
      Time round_start_best = best;
      int32_t best_entry = -1;
      uint32_t best_alight = 0;
      for (size_t idx = begin; idx < end; ++idx) {
        TripId trip = queue_[idx].trip;
        uint32_t board = queue_[idx].board;
        uint32_t last = queue_[idx].last;
        if (tt_.dep(trip, board) >= best) continue;  // cannot improve
        ++stats_.scanned_segments;
        for (uint32_t k = board + 1; k <= last; ++k) {
          Time wt = walk_to_target_[tt_.stop_of(trip, k)];
          if (wt < kInfTime) {
            Time cand = tt_.arr(trip, k) + wt;
            if (cand < best) {
              best = cand;
              best_entry = static_cast<int32_t>(idx);
              best_alight = k;
            }
          }
          auto [tb, te] = ts_.outgoing(tt_, trip, k);
          for (uint32_t id = tb; id < te; ++id) {
            if (filter.active() && !filter.pass(id)) continue;
            ++stats_.relaxed_transfers;
            const Transfer& tr = ts_.transfers[id];
            enqueue(tr.to_trip, tr.to_pos, static_cast<int32_t>(idx),
                    static_cast<int32_t>(id));
          }
        }
      }
      if (best < round_start_best)
        hits.push_back({best_entry, best_alight, best, round});
      begin = end;
    }

    for (const Hit& h : hits)
      result.journeys.push_back(unpack(h.entry, h.alight, source, target));
    return result;
  }

  const QueryStats& stats() const { return stats_; }

 private:
  struct Entry {
    TripId trip;
    uint32_t board;
    uint32_t last;
    int32_t parent;
    int32_t via_transfer;
  };

  void set_walk(StopId s, Time t) {
    if (walk_to_target_[s] == kInfTime) walk_touched_.push_back(s);
    if (t < walk_to_target_[s]) walk_to_target_[s] = t;
  }

  uint32_t reached(TripId t) const {
    return reached_gen_[t] == generation_ ? reached_[t] : tt_.trip_length(t);
  }

  void board_all(StopId stop, Time earliest) {
    for (const LineStop& ls : tt_.stops_to_lines[stop]) {
      if (ls.position + 2 > tt_.lines[ls.line].stops.size()) continue;
      auto t = earliest_trip(tt_, ls.line, ls.position, earliest);
      if (t) enqueue(*t, ls.position, -1, -1);
    }
  }

  void enqueue(TripId trip, uint32_t pos, int32_t parent, int32_t via) {
    uint32_t r = reached(trip);
    if (pos >= r) return;
    queue_.push_back(
        {trip, pos, std::min(r, tt_.trip_length(trip) - 1), parent, via});
    const Line& line = tt_.lines[tt_.trips[trip].line];
    for (size_t rank = tt_.trips[trip].index_in_line; rank < line.trips.size();
         ++rank) {
      TripId t2 = line.trips[rank];
      if (reached(t2) <= pos) break;  // reached indices fall along the order
      reached_[t2] = pos;
      reached_gen_[t2] = generation_;
    }
  }

  Journey unpack(int32_t entry, uint32_t alight, StopId source,
                 StopId target) const {
    std::vector<int32_t> chain;
    for (int32_t e = entry; e >= 0; e = queue_[e].parent) chain.push_back(e);
    std::reverse(chain.begin(), chain.end());

    Journey j;
    for (size_t i = 0; i < chain.size(); ++i) {
      const Entry& e = queue_[chain[i]];
      uint32_t exit = i + 1 < chain.size()
                          ? ts_.transfers[queue_[chain[i + 1]].via_transfer].from_pos
                          : alight;
      j.legs.push_back({e.trip, e.board, exit});
    }
    const Entry& first = queue_[chain.front()];
    j.initial_walk =
        tt_.footpaths.at(source, tt_.stop_of(first.trip, first.board));
    j.departure = tt_.dep(first.trip, first.board) - j.initial_walk;
    const JourneyLeg& lastleg = j.legs.back();
    j.final_walk =
        tt_.footpaths.at(tt_.stop_of(lastleg.trip, lastleg.exit_pos), target);
    j.arrival = tt_.arr(lastleg.trip, lastleg.exit_pos) + j.final_walk;

    auto check = simulate_journey(tt_, j, source, target);
    if (!check || *check != j.arrival)
      throw std::logic_error("unpacked journey fails feasibility re-check");
    return j;
  }

  const Timetable& tt_;
  const TransferSet& ts_;
  QueryStats stats_;
  std::vector<uint32_t> reached_;
  std::vector<uint32_t> reached_gen_;
  std::vector<Time> walk_to_target_;
  std::vector<StopId> walk_touched_;
  std::vector<Entry> queue_;
  uint32_t generation_ = 0;
};

// One-shot convenience wrapper.
inline ParetoSet tb_query(const Timetable& tt, const TransferSet& ts,
                          StopId source, StopId target, Time dep,
                          const TransferFilter& filter = {},
                          int max_rounds = 16) {
  TbQuery q(tt, ts);
  return q.run(source, target, dep, filter, max_rounds);
}

}  // namespace tbr
