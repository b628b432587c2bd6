#pragma once

#include <algorithm>
#include <vector>

#include "tbr/gtfs.hpp"
#include "tbr/rng.hpp"
#include "tbr/timetable.hpp"

/*
 * Randomized synthetic networks for equivalence and success-rate testing.
 * Stops live on a grid; lines are short random walks between nearby stops
 * with several non-overtaking trips each; footpaths connect random nearby
 * pairs and are closed under min-plus composition afterwards.
 */

namespace tbr::synth {

struct Params {
  int min_stops = 15, max_stops = 40;
  int min_lines = 4, max_lines = 12;
  int min_trips = 2, max_trips = 6;
  int min_len = 3, max_len = 7;          // stops per line
  double footpath_per_stop = 0.35;       // directed footpath edges per stop
  double symmetric_chance = 0.5;
  double dwell_chance = 0.3;             // events where arrival < departure
  Time day_start = 6 * 3600, day_end = 14 * 3600;
};

inline Timetable make_network(uint64_t seed, const Params& p = {}) {
  Rng rng(seed);
  int n_stops = static_cast<int>(rng.uniform(p.min_stops, p.max_stops));
  int n_lines = static_cast<int>(rng.uniform(p.min_lines, p.max_lines));

  // Grid placement; "nearby" = small Chebyshev distance.
  int side = 1;
  while (side * side < n_stops) ++side;
  std::vector<std::pair<int, int>> pos(n_stops);
  {
    std::vector<int> cells(side * side);
    for (int i = 0; i < side * side; ++i) cells[i] = i;
    rng.shuffle(cells);
    for (int i = 0; i < n_stops; ++i)
      pos[i] = {cells[i] % side, cells[i] / side};
  }
  auto dist = [&](int a, int b) {
    return std::max(std::abs(pos[a].first - pos[b].first),
                    std::abs(pos[a].second - pos[b].second));
  };

  TimetableBuilder builder;
  for (int i = 0; i < n_stops; ++i) builder.add_stop("S" + std::to_string(i));

  for (int li = 0; li < n_lines; ++li) {
    int len = static_cast<int>(
        rng.uniform(p.min_len, std::min(p.max_len, n_stops)));
    std::vector<StopId> path;
    std::vector<bool> used(n_stops, false);
    int cur = static_cast<int>(rng.below(n_stops));
    path.push_back(cur);
    used[cur] = true;
    while (static_cast<int>(path.size()) < len) {
      // Prefer one of the nearest unused stops.
      std::vector<int> cand;
      for (int radius = 1; radius <= side && cand.size() < 6; ++radius) {
        cand.clear();
        for (int s = 0; s < n_stops; ++s)
          if (!used[s] && dist(cur, s) <= radius) cand.push_back(s);
      }
      if (cand.empty()) break;
      cur = cand[rng.below(cand.size())];
      path.push_back(cur);
      used[cur] = true;
    }
    if (path.size() < 2) continue;

    std::vector<Time> travel(path.size() - 1), dwell(path.size(), 0);
    for (auto& t : travel) t = static_cast<Time>(rng.uniform(120, 600));
    for (auto& d : dwell)
      if (rng.chance(p.dwell_chance)) d = static_cast<Time>(rng.uniform(30, 120));

    int n_trips = static_cast<int>(rng.uniform(p.min_trips, p.max_trips));
    Time start = static_cast<Time>(
        rng.uniform(p.day_start, p.day_end - 3600));
    for (int k = 0; k < n_trips; ++k) {
      std::vector<std::tuple<StopId, Time, Time>> events;
      Time t = start;
      for (size_t i = 0; i < path.size(); ++i) {
        Time arr = t;
        Time dep = arr + dwell[i];
        events.emplace_back(path[i], arr, dep);
        if (i + 1 < path.size()) t = dep + travel[i];
      }
      builder.add_trip(events);
      start += static_cast<Time>(rng.uniform(600, 2400));
    }
  }

  int n_fp = static_cast<int>(p.footpath_per_stop * n_stops);
  Footpaths raw;
  raw.out.assign(n_stops, {});
  for (int i = 0; i < n_fp; ++i) {
    int a = static_cast<int>(rng.below(n_stops));
    int b = static_cast<int>(rng.below(n_stops));
    if (a == b) continue;
    Time w = static_cast<Time>(rng.uniform(60, 300));
    raw.set(a, b, w);
    if (rng.chance(p.symmetric_chance)) raw.set(b, a, w);
  }

  Timetable tt = builder.finalize();
  tt.footpaths = close_footpaths(raw);
  tt.footpaths.out.resize(tt.n_stops());
  tt.footpaths.build_reverse();
  return tt;
}

// Ring of clusters: dense local lines inside each cluster plus a few lines
// crossing into the next cluster. Partitions along cluster boundaries make
// flags effective, and growing k keeps subdividing naturally.
inline Timetable make_clustered(uint64_t seed, int clusters, int per_cluster,
                                int intra_lines = 3, int inter_lines = 2,
                                int trips_per_line = 4) {
  Rng rng(seed);
  int n_stops = clusters * per_cluster;
  TimetableBuilder builder;
  for (int i = 0; i < n_stops; ++i) builder.add_stop("S" + std::to_string(i));
  auto stop_in = [&](int cluster, int idx) {
    return static_cast<StopId>(cluster * per_cluster + (idx % per_cluster));
  };

  auto add_line = [&](const std::vector<StopId>& path) {
    Time start = static_cast<Time>(rng.uniform(6 * 3600, 10 * 3600));
    std::vector<Time> travel(path.size() - 1);
    for (auto& t : travel) t = static_cast<Time>(rng.uniform(180, 480));
    for (int k = 0; k < trips_per_line; ++k) {
      std::vector<std::tuple<StopId, Time, Time>> events;
      Time t = start;
      for (size_t i = 0; i < path.size(); ++i) {
        events.emplace_back(path[i], t, t);
        if (i + 1 < path.size()) t += travel[i];
      }
      builder.add_trip(events);
      start += static_cast<Time>(rng.uniform(900, 1800));
    }
  };

  for (int c = 0; c < clusters; ++c) {
    for (int l = 0; l < intra_lines; ++l) {
      int len = static_cast<int>(rng.uniform(4, std::max(5, per_cluster / 2)));
      std::vector<StopId> path;
      int at = static_cast<int>(rng.below(per_cluster));
      for (int i = 0; i < len; ++i) {
        path.push_back(stop_in(c, at));
        at += 1 + static_cast<int>(rng.below(2));
      }
      add_line(path);
    }
    for (int l = 0; l < inter_lines; ++l) {
      // Half in this cluster, half in the next one around the ring.
      std::vector<StopId> path;
      int at = static_cast<int>(rng.below(per_cluster));
      for (int i = 0; i < 3; ++i) path.push_back(stop_in(c, at + i));
      for (int i = 0; i < 3; ++i)
        path.push_back(stop_in((c + 1) % clusters, at + i));
      add_line(path);
    }
  }

  Footpaths raw;
  raw.out.assign(n_stops, {});
  for (int c = 0; c < clusters; ++c)
    for (int i = 0; i < per_cluster / 4; ++i) {
      StopId a = stop_in(c, static_cast<int>(rng.below(per_cluster)));
      StopId b = stop_in(c, static_cast<int>(rng.below(per_cluster)));
      if (a == b) continue;
      Time w = static_cast<Time>(rng.uniform(60, 240));
      raw.set(a, b, w);
      raw.set(b, a, w);
    }

  Timetable tt = builder.finalize();
  tt.footpaths = close_footpaths(raw);
  tt.footpaths.out.resize(tt.n_stops());
  tt.footpaths.build_reverse();
  return tt;
}

}  // namespace tbr::synth
