#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tbr/timetable.hpp"

namespace tbr {

struct JourneyLeg {
  TripId trip;
  uint32_t enter_pos;
  uint32_t exit_pos;  // > enter_pos
};

// A concrete trip-segment sequence with its initial and final footpath.
struct Journey {
  std::vector<JourneyLeg> legs;
  Time departure = kInfTime;  // at the source stop, initial walk included
  Time arrival = kInfTime;    // at the target stop, final walk included
  Time initial_walk = 0;
  Time final_walk = 0;

  int trips_used() const { return static_cast<int>(legs.size()); }
};

// Bicriteria result set: sorted by increasing trip count, strictly
// decreasing arrival time; no member weakly dominates another.
struct ParetoSet {
  std::vector<Journey> journeys;

  bool empty() const { return journeys.empty(); }
  size_t size() const { return journeys.size(); }

  std::vector<std::pair<Time, int>> pairs() const {
    std::vector<std::pair<Time, int>> p;
    p.reserve(journeys.size());
    for (const auto& j : journeys) p.emplace_back(j.arrival, j.trips_used());
    return p;
  }
};

// Line-level generalization of a journey: the lines used and the positions
// where they are entered and exited, but not the trips.
struct ItinerarySeg {
  LineId line;
  uint32_t enter_pos;
  uint32_t exit_pos;

  bool operator==(const ItinerarySeg&) const = default;
};

struct Itinerary {
  StopId source = 0;
  std::vector<ItinerarySeg> segs;

  bool operator==(const Itinerary&) const = default;
};

inline Itinerary itinerary_of(const Timetable& tt, const Journey& j,
                              StopId source) {
  Itinerary it;
  it.source = source;
  for (const auto& leg : j.legs)
    it.segs.push_back({tt.trips[leg.trip].line, leg.enter_pos, leg.exit_pos});
  return it;
}

// Re-simulates a journey against the raw timetable: checks leg shapes,
// transfer feasibility and the walk arithmetic, independently of how the
// journey was produced. Returns the arrival at `target` or nullopt if the
// journey is not feasible as described.
inline std::optional<Time> simulate_journey(const Timetable& tt,
                                            const Journey& j, StopId source,
                                            StopId target) {
  if (j.legs.empty()) return std::nullopt;
  const JourneyLeg& first = j.legs.front();
  if (first.enter_pos >= first.exit_pos) return std::nullopt;
  Time walk0 = tt.footpaths.at(source, tt.stop_of(first.trip, first.enter_pos));
  if (walk0 >= kInfTime) return std::nullopt;
  if (j.departure + walk0 > tt.dep(first.trip, first.enter_pos))
    return std::nullopt;
  for (size_t i = 0; i + 1 < j.legs.size(); ++i) {
    const JourneyLeg& a = j.legs[i];
    const JourneyLeg& b = j.legs[i + 1];
    if (a.enter_pos >= a.exit_pos || b.enter_pos >= b.exit_pos)
      return std::nullopt;
    Time walk = tt.footpaths.at(tt.stop_of(a.trip, a.exit_pos),
                                tt.stop_of(b.trip, b.enter_pos));
    if (walk >= kInfTime) return std::nullopt;
    if (tt.arr(a.trip, a.exit_pos) + walk > tt.dep(b.trip, b.enter_pos))
      return std::nullopt;
  }
  const JourneyLeg& last = j.legs.back();
  Time walk1 = tt.footpaths.at(tt.stop_of(last.trip, last.exit_pos), target);
  if (walk1 >= kInfTime) return std::nullopt;
  return tt.arr(last.trip, last.exit_pos) + walk1;
}

inline std::string describe_legs(const Journey& j) {
  std::string s;
  for (const auto& leg : j.legs) {
    if (!s.empty()) s += '+';
    s += 'T' + std::to_string(leg.trip) + '[' + std::to_string(leg.enter_pos) +
         '-' + std::to_string(leg.exit_pos) + ']';
  }
  return s.empty() ? "-" : s;
}

}  // namespace tbr
