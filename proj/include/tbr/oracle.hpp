#pragma once

#include <algorithm>
#include <vector>

#include "tbr/journey.hpp"
#include "tbr/timetable.hpp"

/*
 * Independent exact bicriteria solver. Round-based label correcting
 * directly over lines and footpaths, with no precomputed transfers: round n
 * boards, at every position of every line, the earliest trip reachable from
 * the round n-1 labels and records the arrivals of all later positions
 * (plus footpath extensions). Deliberately shares only the Timetable type
 * with the engine under test.
 *
 * Two label families are kept: boarding labels include the initial walk
 * from the source, while trip labels only ever come from riding. Walk-only
 * journeys are outside the bicriteria model and must not surface as
 * results, but they do feed first boardings.
 */

namespace tbr {

class Oracle {
 public:
  explicit Oracle(const Timetable& tt) : tt_(tt) {}

  // labels()[n][p] is the earliest arrival at p over journeys with >= 1 and
  // <= n trips departing the source no earlier than dep; row 0 is infinite.
  std::vector<std::vector<Time>> labels(StopId source, Time dep,
                                        int max_rounds = 16) const {
    State st;
    solve(source, dep, max_rounds, st);
    // Rounds past the fixed point repeat the last row.
    while (st.trip.size() <= static_cast<size_t>(max_rounds))
      st.trip.push_back(st.trip.back());
    return st.trip;
  }

  ParetoSet query(StopId source, StopId target, Time dep,
                  int max_rounds = 16) const {
    ParetoSet result;
    if (source == target) return result;
    State st;
    solve(source, dep, max_rounds, st);
    Time best = kInfTime;
    for (int round = 1; round < static_cast<int>(st.trip.size()); ++round) {
      if (st.trip[round][target] < best) {
        best = st.trip[round][target];
        result.journeys.push_back(extract(st, source, target, round));
      }
    }
    return result;
  }

 private:
  struct Record {
    TripId trip = kNone32;
    uint32_t board = 0;
    uint32_t alight = 0;
  };
  struct State {
    std::vector<std::vector<Time>> board;  // walk base + rides, cumulative
    std::vector<std::vector<Time>> trip;   // rides only, cumulative
    std::vector<std::vector<Record>> rec;
  };

  void solve(StopId source, Time dep, int max_rounds, State& st) const {
    size_t n = tt_.n_stops();
    st.board.assign(1, std::vector<Time>(n, kInfTime));
    st.trip.assign(1, std::vector<Time>(n, kInfTime));
    st.rec.assign(1, std::vector<Record>(n));
    st.board[0][source] = dep;
    for (const auto& e : tt_.footpaths.out[source])
      st.board[0][e.to] = std::min(st.board[0][e.to], dep + e.seconds);

    for (int round = 1; round <= max_rounds; ++round) {
      st.board.push_back(st.board.back());
      st.trip.push_back(st.trip.back());
      st.rec.emplace_back(n);
      auto& prev_board = st.board[round - 1];
      auto& cur_board = st.board[round];
      auto& cur_trip = st.trip[round];
      auto& cur_rec = st.rec[round];
      bool any = false;

      for (LineId li = 0; li < tt_.n_lines(); ++li) {
        const Line& line = tt_.lines[li];
        TripId riding = kNone32;
        uint32_t board_pos = 0;
        for (uint32_t pos = 0; pos < line.stops.size(); ++pos) {
          StopId p = line.stops[pos];
          if (riding != kNone32 && pos > board_pos) {
            Time a = tt_.arr(riding, pos);
            auto settle = [&](StopId q, Time t) {
              if (t < cur_trip[q]) {
                cur_trip[q] = t;
                cur_rec[q] = {riding, board_pos, pos};
                any = true;
              }
              if (t < cur_board[q]) cur_board[q] = t;
            };
            settle(p, a);
            for (const auto& e : tt_.footpaths.out[p])
              settle(e.to, a + e.seconds);
          }
          if (pos + 2 <= line.stops.size() && prev_board[p] < kInfTime) {
            auto t = earliest_trip(tt_, li, pos, prev_board[p]);
            if (t && (riding == kNone32 ||
                      tt_.trips[*t].index_in_line <
                          tt_.trips[riding].index_in_line)) {
              riding = *t;
              board_pos = pos;
            }
          }
        }
      }
      if (!any) break;
    }
  }

  // Best-effort feasible journey behind a label, for diagnostics.
  Journey extract(const State& st, StopId source, StopId target,
                  int round) const {
    Journey j;
    j.arrival = st.trip[round][target];
    StopId at = target;
    int r = round;
    while (r > 0) {
      while (r > 0 && st.rec[r][at].trip == kNone32) --r;
      if (r == 0) break;
      const Record& rc = st.rec[r][at];
      j.legs.push_back({rc.trip, rc.board, rc.alight});
      StopId prev = tt_.stop_of(rc.trip, rc.board);
      Time board_deadline = tt_.dep(rc.trip, rc.board);
      at = prev;
      // Earliest round whose trip label still makes the boarding; if the
      // initial walk already does, the chain ends here.
      if (st.board[0][prev] <= board_deadline) {
        r = 0;
        break;
      }
      int m = r - 1;
      while (m > 1 && st.trip[m - 1][prev] <= board_deadline) --m;
      r = m;
    }
    std::reverse(j.legs.begin(), j.legs.end());
    if (!j.legs.empty()) {
      const JourneyLeg& first = j.legs.front();
      j.initial_walk =
          tt_.footpaths.at(source, tt_.stop_of(first.trip, first.enter_pos));
      j.departure = tt_.dep(first.trip, first.enter_pos) - j.initial_walk;
      const JourneyLeg& last = j.legs.back();
      j.final_walk =
          tt_.footpaths.at(tt_.stop_of(last.trip, last.exit_pos), target);
    }
    return j;
  }

  const Timetable& tt_;
};

inline ParetoSet oracle_query(const Timetable& tt, StopId source, StopId target,
                              Time dep, int max_rounds = 16) {
  return Oracle(tt).query(source, target, dep, max_rounds);
}

}  // namespace tbr
