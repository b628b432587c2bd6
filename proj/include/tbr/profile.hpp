#pragma once

#include <algorithm>
#include <cassert>
#include <vector>

#include "tbr/journey.hpp"
#include "tbr/transfers.hpp"

/*
 * One-to-all profile search over a departure time interval. All reachable
 * departure times at the source are collected and processed in descending
 * order; for each one a query pass runs without resetting the per-round
 * reached indices or the per-stop arrival labels, so results of later
 * departures prune earlier runs (self-pruning). The sink observes, at the
 * end of each pass, every (stop, round) whose arrival label improved,
 * together with the improving journey.
 */

namespace tbr {

// All times t such that some trip departs at t + walk(source, stop) from a
// stop reachable by foot, restricted to [lo, hi]; deduplicated, descending.
inline std::vector<Time> collect_departures(const Timetable& tt, StopId source,
                                            Time lo, Time hi) {
  std::vector<Time> out;
  auto consider = [&](StopId q, Time walk) {
    for (const LineStop& ls : tt.stops_to_lines[q]) {
      const Line& line = tt.lines[ls.line];
      if (ls.position + 2 > line.stops.size()) continue;
      for (TripId t : line.trips) {
        Time dep = tt.dep(t, ls.position) - walk;
        if (dep >= lo && dep <= hi) out.push_back(dep);
      }
    }
  };
  consider(source, 0);
  for (const auto& e : tt.footpaths.out[source]) consider(e.to, e.seconds);
  std::sort(out.begin(), out.end(), std::greater<>());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct ArrivalProfile {
  size_t n_stops = 0;
  int max_rounds = 0;
  int runs = 0;
  std::vector<Time> arr;  // [stop * max_rounds + (round - 1)]

  Time at(StopId p, int round) const {
    assert(round >= 1 && round <= max_rounds);
    return arr[p * max_rounds + round - 1];
  }
};

class ProfileSearch {
 public:
  ProfileSearch(const Timetable& tt, const TransferSet& ts) : tt_(tt), ts_(ts) {}

  // Sink signature: void(Time run_departure, StopId stop, int round,
  //                      const Journey& journey).
  template <typename Sink>
  ArrivalProfile run(StopId source, Time lo, Time hi, Sink&& sink,
                     int max_rounds = 16) {
    const size_t n_stops = tt_.n_stops();
    const size_t n_trips = tt_.n_trips();
    rounds_ = max_rounds;

    reached_.assign(static_cast<size_t>(max_rounds) * n_trips, 0);
    for (size_t i = 0; i < reached_.size(); ++i)
      reached_[i] = tt_.trip_length(static_cast<TripId>(i % n_trips));

    ArrivalProfile profile;
    profile.n_stops = n_stops;
    profile.max_rounds = max_rounds;
    profile.arr.assign(n_stops * static_cast<size_t>(max_rounds), kInfTime);
    arr_ = &profile.arr;

    improved_.assign(n_stops * static_cast<size_t>(max_rounds), Handle{});
    dirty_.clear();

    std::vector<Time> departures = collect_departures(tt_, source, lo, hi);
    profile.runs = static_cast<int>(departures.size());

    for (Time dep : departures) {
      queue_.clear();
      dirty_.clear();
      ++run_gen_;

      board_all(source, dep, dep);
      for (const auto& e : tt_.footpaths.out[source])
        board_all(e.to, dep + e.seconds, dep);

      size_t begin = 0;
      for (int round = 1; round <= max_rounds && begin < queue_.size();
           ++round) {
        size_t end = queue_.size();
        for (size_t idx = begin; idx < end; ++idx) {
          TripId trip = queue_[idx].trip;
          uint32_t board = queue_[idx].board;
          uint32_t last = queue_[idx].last;
          for (uint32_t k = board + 1; k <= last; ++k) {
            StopId p = tt_.stop_of(trip, k);
            Time a = tt_.arr(trip, k);
            improve(p, round, a, idx, k);
            for (const auto& e : tt_.footpaths.out[p])
              improve(e.to, round, a + e.seconds, idx, k);
            if (round == max_rounds) continue;
            auto [tb, te] = ts_.outgoing(tt_, trip, k);
            for (uint32_t id = tb; id < te; ++id) {
              const Transfer& tr = ts_.transfers[id];
              enqueue(tr.to_trip, tr.to_pos, round + 1,
                      static_cast<int32_t>(idx), static_cast<int32_t>(id));
            }
          }
        }
        begin = end;
      }

      for (const auto& [stop, round] : dirty_) {
        const Handle& h = improved_[stop * max_rounds + (round - 1)];
        sink(dep, stop, round, materialize(h, source, stop));
      }
    }
    arr_ = nullptr;
    return profile;
  }

 private:
  struct Entry {
    TripId trip;
    uint32_t board;
    uint32_t last;
    int32_t parent;
    int32_t via_transfer;
  };
  struct Handle {
    int32_t entry = -1;
    uint32_t alight = 0;
    uint32_t run = 0;  // generation stamp: dirty within the current run
  };

  uint32_t& reached(int round, TripId t) {
    return reached_[static_cast<size_t>(round - 1) * tt_.n_trips() + t];
  }

  void board_all(StopId stop, Time earliest, Time /*run_dep*/) {
    for (const LineStop& ls : tt_.stops_to_lines[stop]) {
      if (ls.position + 2 > tt_.lines[ls.line].stops.size()) continue;
      auto t = earliest_trip(tt_, ls.line, ls.position, earliest);
      if (t) enqueue(*t, ls.position, 1, -1, -1);
    }
  }

  void enqueue(TripId trip, uint32_t pos, int round, int32_t parent,
               int32_t via) {
    uint32_t r = reached(round, trip);
    if (pos >= r) return;
    queue_.push_back(
        {trip, pos, std::min(r, tt_.trip_length(trip) - 1), parent, via});
    const Line& line = tt_.lines[tt_.trips[trip].line];
    for (size_t rank = tt_.trips[trip].index_in_line; rank < line.trips.size();
         ++rank) {
      TripId t2 = line.trips[rank];
      bool updated = false;
      for (int m = round; m <= rounds_; ++m) {
        uint32_t& rm = reached(m, t2);
        if (rm <= pos) break;  // non-increasing over rounds
        rm = pos;
        updated = true;
      }
      if (!updated) break;  // non-increasing along the line order
    }
  }

  void improve(StopId stop, int round, Time t, size_t entry, uint32_t alight) {
    std::vector<Time>& arr = *arr_;
    size_t base = stop * static_cast<size_t>(rounds_);
    if (t >= arr[base + round - 1]) return;
    Handle& h = improved_[base + round - 1];
    if (h.run != run_gen_) {
      h.run = run_gen_;
      dirty_.emplace_back(stop, round);
    }
    h.entry = static_cast<int32_t>(entry);
    h.alight = alight;
    for (int m = round; m <= rounds_; ++m) {
      if (arr[base + m - 1] <= t) break;
      arr[base + m - 1] = t;
    }
  }

  Journey materialize(const Handle& h, StopId source, StopId target) const {
    std::vector<int32_t> chain;
    for (int32_t e = h.entry; e >= 0; e = queue_[e].parent) chain.push_back(e);
    std::reverse(chain.begin(), chain.end());
    Journey j;
    for (size_t i = 0; i < chain.size(); ++i) {
      const Entry& e = queue_[chain[i]];
      uint32_t exit =
          i + 1 < chain.size()
              ? ts_.transfers[queue_[chain[i + 1]].via_transfer].from_pos
              : h.alight;
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
    return j;
  }

  const Timetable& tt_;
  const TransferSet& ts_;
  int rounds_ = 16;
  std::vector<uint32_t> reached_;
  std::vector<Time>* arr_ = nullptr;
  std::vector<Handle> improved_;
  std::vector<std::pair<StopId, int>> dirty_;
  std::vector<Entry> queue_;
  uint32_t run_gen_ = 0;
};

}  // namespace tbr
