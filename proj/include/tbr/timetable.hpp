#pragma once

#include <algorithm>
#include <cassert>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tbr/common.hpp"

/*
 * In-memory model of a public transit network.
 *
 * Trips with identical stop sequences that never overtake each other are
 * grouped into lines; within a line the trips are totally ordered by their
 * arrival (and departure) times. Footpaths are a sparse directed relation
 * that must be transitively closed and satisfy the triangle inequality;
 * the self-loop (p,p) with zero transfer time is implicit and never stored.
 *
 * The structure is immutable after TimetableBuilder::finalize() and safe
 * for concurrent shared reads.
 */

namespace tbr {

struct StopEvent {
  Time arrival;
  Time departure;
};

struct Trip {
  LineId line;
  uint32_t index_in_line;   // rank within the line's trip order
  uint32_t event_offset;    // into Timetable::events
  uint32_t n_events;
};

struct Line {
  std::vector<StopId> stops;     // stop sequence, length >= 2
  std::vector<TripId> trips;     // ascending trip order
};

struct FootpathEdge {
  StopId to;
  Time seconds;
};

struct Footpaths {
  // out[p] sorted by target stop id; in[] is the derived reverse adjacency.
  std::vector<std::vector<FootpathEdge>> out;
  std::vector<std::vector<FootpathEdge>> in;

  size_t n_edges() const {
    size_t n = 0;
    for (const auto& v : out) n += v.size();
    return n;
  }

  // Transfer time p -> q; 0 for p == q, kInfTime when no footpath exists.
  Time at(StopId p, StopId q) const {
    if (p == q) return 0;
    const auto& v = out[p];
    auto it = std::lower_bound(
        v.begin(), v.end(), q,
        [](const FootpathEdge& e, StopId s) { return e.to < s; });
    if (it != v.end() && it->to == q) return it->seconds;
    return kInfTime;
  }

  void set(StopId p, StopId q, Time seconds) {
    auto& v = out[p];
    auto it = std::lower_bound(
        v.begin(), v.end(), q,
        [](const FootpathEdge& e, StopId s) { return e.to < s; });
    if (it != v.end() && it->to == q)
      it->seconds = seconds;
    else
      v.insert(it, FootpathEdge{q, seconds});
  }

  void build_reverse() {
    in.assign(out.size(), {});
    for (StopId p = 0; p < out.size(); ++p)
      for (const auto& e : out[p]) in[e.to].push_back({p, e.seconds});
    for (auto& v : in)
      std::sort(v.begin(), v.end(),
                [](const FootpathEdge& a, const FootpathEdge& b) {
                  return a.to < b.to;
                });
  }
};

// (line, position) pair: the line serves some stop at this position.
struct LineStop {
  LineId line;
  uint32_t position;
};

struct Timetable {
  std::vector<std::string> stop_external_ids;
  std::vector<std::string> stop_names;
  std::vector<Line> lines;
  std::vector<Trip> trips;
  std::vector<StopEvent> events;       // flattened per-trip events
  Footpaths footpaths;
  std::vector<std::vector<LineStop>> stops_to_lines;  // per stop, sorted
  Time service_start = 0;
  Time service_end = 0;

  size_t n_stops() const { return stop_external_ids.size(); }
  size_t n_trips() const { return trips.size(); }
  size_t n_lines() const { return lines.size(); }
  size_t n_events() const { return events.size(); }

  const StopEvent& event(TripId t, uint32_t pos) const {
    assert(pos < trips[t].n_events);
    return events[trips[t].event_offset + pos];
  }
  Time arr(TripId t, uint32_t pos) const { return event(t, pos).arrival; }
  Time dep(TripId t, uint32_t pos) const { return event(t, pos).departure; }
  StopId stop_of(TripId t, uint32_t pos) const {
    return lines[trips[t].line].stops[pos];
  }
  uint32_t trip_length(TripId t) const { return trips[t].n_events; }
  uint32_t event_id(TripId t, uint32_t pos) const {
    return trips[t].event_offset + pos;
  }
};

enum class TripOrder { kPrecedesEq, kStrictlyPrecedes, kIncomparable };

// Componentwise comparison of arrival times, the trip order of a line.
// Both trips must serve the same stop sequence.
inline TripOrder trip_order_cmp(const Timetable& tt, TripId ta, TripId tb) {
  const Trip& a = tt.trips[ta];
  const Trip& b = tt.trips[tb];
  const auto& sa = tt.lines[a.line].stops;
  const auto& sb = tt.lines[b.line].stops;
  if (sa != sb)
    throw std::invalid_argument("trip_order_cmp: stop sequences differ");
  bool a_le_b = true, b_le_a = true, strict = false;
  for (uint32_t i = 0; i < a.n_events; ++i) {
    Time x = tt.arr(ta, i), y = tt.arr(tb, i);
    if (x > y) a_le_b = false;
    if (y > x) b_le_a = false;
    if (x < y) strict = true;
  }
  if (!a_le_b) return TripOrder::kIncomparable;
  return strict ? TripOrder::kStrictlyPrecedes : TripOrder::kPrecedesEq;
}

// First trip of the line (in line order) departing at `position` no earlier
// than `time`, or nullopt. Valid because trips of a line do not overtake,
// so departures at a fixed position are non-decreasing along the order.
inline std::optional<TripId> earliest_trip(const Timetable& tt, LineId line,
                                           uint32_t position, Time time) {
  const Line& l = tt.lines[line];
  if (position + 1 >= l.stops.size())
    throw std::invalid_argument("earliest_trip: position out of range");
  auto it = std::partition_point(
      l.trips.begin(), l.trips.end(),
      [&](TripId t) { return tt.dep(t, position) < time; });
  if (it == l.trips.end()) return std::nullopt;
  return *it;
}

// ---------------------------------------------------------------------------
// Construction

struct RawTrip {
  std::vector<StopId> stops;
  std::vector<Time> arrivals;
  std::vector<Time> departures;
  std::string external_id;  // diagnostics only
};

namespace detail {

// a precedes-or-equals b componentwise in both arrivals and departures.
// Grouping uses this stronger test so that a line never contains a pair
// of trips that crosses in either time channel.
inline bool raw_precedes_eq(const RawTrip& a, const RawTrip& b) {
  for (size_t i = 0; i < a.stops.size(); ++i) {
    if (a.arrivals[i] > b.arrivals[i]) return false;
    if (a.departures[i] > b.departures[i]) return false;
  }
  return true;
}

}  // namespace detail

// Partition trips into lines: trips sharing a stop sequence are bucketed,
// sorted by (departure at position 0, id), and greedily appended to the
// first line whose last trip precedes them; otherwise a new line opens.
// Returns, per line, the indices of member raw trips in line order.
inline std::vector<std::vector<size_t>> group_trips_into_lines(
    const std::vector<RawTrip>& raw) {
  std::map<std::vector<StopId>, std::vector<size_t>> buckets;
  std::vector<const std::vector<StopId>*> bucket_order;
  for (size_t i = 0; i < raw.size(); ++i) {
    auto [it, inserted] = buckets.try_emplace(raw[i].stops);
    if (inserted) bucket_order.push_back(&it->first);
    it->second.push_back(i);
  }
  std::vector<std::vector<size_t>> lines;
  for (const auto* seq : bucket_order) {
    auto& members = buckets[*seq];
    std::stable_sort(members.begin(), members.end(), [&](size_t a, size_t b) {
      if (raw[a].departures[0] != raw[b].departures[0])
        return raw[a].departures[0] < raw[b].departures[0];
      return a < b;
    });
    size_t first_line = lines.size();
    for (size_t idx : members) {
      bool placed = false;
      for (size_t li = first_line; li < lines.size(); ++li) {
        size_t last = lines[li].back();
        if (detail::raw_precedes_eq(raw[last], raw[idx])) {
          lines[li].push_back(idx);
          placed = true;
          break;
        }
      }
      if (!placed) lines.push_back({idx});
    }
  }
  return lines;
}

class TimetableBuilder {
 public:
  StopId add_stop(std::string external_id, std::string name = "") {
    stop_ids_.push_back(std::move(external_id));
    stop_names_.push_back(std::move(name));
    return static_cast<StopId>(stop_ids_.size() - 1);
  }

  // Events as (stop, arrival, departure) triples in ride order.
  void add_trip(const std::vector<std::tuple<StopId, Time, Time>>& events,
                std::string external_id = "") {
    RawTrip t;
    t.external_id = std::move(external_id);
    for (auto& [s, a, d] : events) {
      t.stops.push_back(s);
      t.arrivals.push_back(a);
      t.departures.push_back(d);
    }
    add_raw_trip(std::move(t));
  }

  void add_raw_trip(RawTrip t) {
    if (t.stops.size() < 2)
      throw std::invalid_argument("trip needs at least 2 events");
    for (size_t i = 0; i < t.stops.size(); ++i) {
      if (t.arrivals[i] > t.departures[i])
        throw std::invalid_argument("event arrival after departure");
      if (i > 0 && t.arrivals[i] < t.departures[i - 1])
        throw std::invalid_argument("trip events not monotone");
    }
    raw_trips_.push_back(std::move(t));
  }

  void add_footpath(StopId from, StopId to, Time seconds) {
    if (from == to) return;  // implicit zero self-loop, never stored
    footpath_edges_.emplace_back(from, to, seconds);
  }

  size_t n_raw_trips() const { return raw_trips_.size(); }

  Timetable finalize() {
    Timetable tt;
    tt.stop_external_ids = stop_ids_;
    tt.stop_names = stop_names_;

    auto groups = group_trips_into_lines(raw_trips_);
    tt.trips.resize(raw_trips_.size());
    std::vector<TripId> raw_to_trip(raw_trips_.size());
    // Dense trip ids in (line, rank) order.
    TripId next = 0;
    for (size_t li = 0; li < groups.size(); ++li) {
      Line line;
      line.stops = raw_trips_[groups[li][0]].stops;
      for (size_t rank = 0; rank < groups[li].size(); ++rank) {
        size_t ri = groups[li][rank];
        TripId t = next++;
        raw_to_trip[ri] = t;
        line.trips.push_back(t);
        Trip& trip = tt.trips[t];
        trip.line = static_cast<LineId>(li);
        trip.index_in_line = static_cast<uint32_t>(rank);
        trip.event_offset = static_cast<uint32_t>(tt.events.size());
        trip.n_events = static_cast<uint32_t>(raw_trips_[ri].stops.size());
        for (size_t i = 0; i < raw_trips_[ri].stops.size(); ++i)
          tt.events.push_back(
              {raw_trips_[ri].arrivals[i], raw_trips_[ri].departures[i]});
      }
      tt.lines.push_back(std::move(line));
    }

    tt.footpaths.out.assign(stop_ids_.size(), {});
    std::sort(footpath_edges_.begin(), footpath_edges_.end());
    for (auto& [f, t, s] : footpath_edges_) {
      if (f >= stop_ids_.size() || t >= stop_ids_.size())
        throw std::invalid_argument("footpath references unknown stop");
      tt.footpaths.set(f, t, s);  // duplicate edges keep the last value
    }
    tt.footpaths.build_reverse();

    tt.stops_to_lines.assign(stop_ids_.size(), {});
    for (LineId li = 0; li < tt.lines.size(); ++li)
      for (uint32_t pos = 0; pos < tt.lines[li].stops.size(); ++pos)
        tt.stops_to_lines[tt.lines[li].stops[pos]].push_back({li, pos});

    Time lo = kInfTime, hi = kNegInfTime;
    for (const auto& e : tt.events) {
      lo = std::min(lo, e.arrival);
      hi = std::max(hi, e.departure);
    }
    tt.service_start = lo == kInfTime ? 0 : lo;
    tt.service_end = hi == kNegInfTime ? 0 : hi;
    return tt;
  }

 private:
  std::vector<std::string> stop_ids_;
  std::vector<std::string> stop_names_;
  std::vector<RawTrip> raw_trips_;
  std::vector<std::tuple<StopId, StopId, Time>> footpath_edges_;
};

// ---------------------------------------------------------------------------
// Validation

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Reports violations of footpath closure, the triangle inequality, event
// monotonicity and line non-overtaking. Never throws.
inline ValidationReport validate_timetable(const Timetable& tt) {
  ValidationReport rep;
  auto complain = [&](std::string s) { rep.violations.push_back(std::move(s)); };

  for (TripId t = 0; t < tt.n_trips(); ++t) {
    const Trip& trip = tt.trips[t];
    if (trip.n_events < 2) complain("trip " + std::to_string(t) + " has < 2 events");
    for (uint32_t i = 0; i < trip.n_events; ++i) {
      if (tt.arr(t, i) > tt.dep(t, i))
        complain("trip " + std::to_string(t) + " event " + std::to_string(i) +
                 ": arrival after departure");
      if (i > 0 && tt.arr(t, i) < tt.dep(t, i - 1))
        complain("trip " + std::to_string(t) + " event " + std::to_string(i) +
                 ": arrives before previous departure");
    }
  }

  for (LineId li = 0; li < tt.n_lines(); ++li) {
    const Line& line = tt.lines[li];
    for (size_t r = 0; r + 1 < line.trips.size(); ++r) {
      TripId a = line.trips[r], b = line.trips[r + 1];
      if (tt.trips[a].index_in_line + 1 != tt.trips[b].index_in_line)
        complain("line " + std::to_string(li) + ": rank gap");
      if (trip_order_cmp(tt, a, b) == TripOrder::kIncomparable)
        complain("line " + std::to_string(li) + ": trips " + std::to_string(a) +
                 "," + std::to_string(b) + " overtake");
    }
  }

  // Closure and triangle inequality in one pass over stored 2-chains.
  for (StopId p = 0; p < tt.n_stops(); ++p) {
    for (const auto& e1 : tt.footpaths.out[p]) {
      for (const auto& e2 : tt.footpaths.out[e1.to]) {
        if (e2.to == p) continue;  // implicit (p,p) = 0 closes the chain
        Time direct = tt.footpaths.at(p, e2.to);
        if (direct >= kInfTime)
          complain("footpaths not closed: (" + std::to_string(p) + "," +
                   std::to_string(e1.to) + "," + std::to_string(e2.to) + ")");
        else if (direct > e1.seconds + e2.seconds)
          complain("triangle inequality violated at (" + std::to_string(p) +
                   "," + std::to_string(e1.to) + "," + std::to_string(e2.to) +
                   ")");
      }
    }
  }
  return rep;
}

}  // namespace tbr
