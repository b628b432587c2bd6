#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tbr/timetable.hpp"

/*
 * GTFS feed ingestion. A feed directory is reduced to a validated Timetable
 * covering a window of consecutive service days: trips active on day d are
 * instantiated with all times offset by d * 86400 s. Footpaths come from
 * transfers.txt and are closed under min-plus composition per connected
 * component, so the result always satisfies the triangle inequality.
 */

namespace tbr {

// ---------------------------------------------------------------------------
// Footpath closure

// Min-plus transitive closure of a sparse footpath relation, restricted to
// the weakly connected components of the footpath graph. Components larger
// than `component_cap` abort with an error since closure is quadratic in
// the component size.
inline Footpaths close_footpaths(const Footpaths& raw,
                                 size_t component_cap = 3000) {
  size_t n = raw.out.size();
  Footpaths closed;
  closed.out.assign(n, {});

  // Undirected adjacency for component discovery.
  std::vector<std::vector<StopId>> undirected(n);
  for (StopId p = 0; p < n; ++p)
    for (const auto& e : raw.out[p]) {
      undirected[p].push_back(e.to);
      undirected[e.to].push_back(p);
    }

  std::vector<bool> seen(n, false);
  std::vector<StopId> component;
  for (StopId root = 0; root < n; ++root) {
    if (seen[root] || undirected[root].empty()) continue;
    component.clear();
    std::queue<StopId> bfs;
    bfs.push(root);
    seen[root] = true;
    while (!bfs.empty()) {
      StopId u = bfs.front();
      bfs.pop();
      component.push_back(u);
      for (StopId v : undirected[u])
        if (!seen[v]) {
          seen[v] = true;
          bfs.push(v);
        }
    }
    if (component.size() > component_cap)
      throw std::runtime_error(
          "footpath component of size " + std::to_string(component.size()) +
          " exceeds cap " + std::to_string(component_cap));

    // Dijkstra from every member over the directed edges of the component.
    std::sort(component.begin(), component.end());
    std::unordered_map<StopId, uint32_t> local;
    for (uint32_t i = 0; i < component.size(); ++i) local[component[i]] = i;
    size_t m = component.size();
    std::vector<Time> dist(m);
    using Item = std::pair<Time, uint32_t>;
    for (uint32_t s = 0; s < m; ++s) {
      std::fill(dist.begin(), dist.end(), kInfTime);
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      dist[s] = 0;
      pq.push({0, s});
      while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (const auto& e : raw.out[component[u]]) {
          auto it = local.find(e.to);
          if (it == local.end()) continue;  // directed edge leaves component? keep local
          uint32_t v = it->second;
          if (d + e.seconds < dist[v]) {
            dist[v] = d + e.seconds;
            pq.push({dist[v], v});
          }
        }
      }
      for (uint32_t v = 0; v < m; ++v)
        if (v != s && dist[v] < kInfTime)
          closed.out[component[s]].push_back({component[v], dist[v]});
    }
  }
  for (auto& v : closed.out)
    std::sort(v.begin(), v.end(),
              [](const FootpathEdge& a, const FootpathEdge& b) {
                return a.to < b.to;
              });
  closed.build_reverse();
  return closed;
}

// ---------------------------------------------------------------------------
// CSV

namespace gtfscsv {

// Minimal CSV reader: quoted fields, embedded commas/quotes, CR/LF endings.
inline std::vector<std::string> split_row(const std::string& row) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < row.size(); ++i) {
    char c = row[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < row.size() && row[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

inline std::optional<Table> read_table(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) return std::nullopt;
  Table t;
  std::string row;
  if (!std::getline(f, row)) return t;
  // Strip a UTF-8 BOM if present.
  if (row.size() >= 3 && row.compare(0, 3, "\xEF\xBB\xBF") == 0) row.erase(0, 3);
  t.header = split_row(row);
  while (std::getline(f, row)) {
    if (row.empty() || row == "\r") continue;
    t.rows.push_back(split_row(row));
  }
  return t;
}

}  // namespace gtfscsv

// ---------------------------------------------------------------------------
// Ingestion

struct IngestConfig {
  int start_date = 0;              // YYYYMMDD
  int days = 2;
  Time default_transfer_time = 120;
  Time min_change_time = 0;        // added where min_transfer_time semantics apply
  double walk_radius_m = 0;        // derive footpaths from coordinates if > 0
  double walk_speed_m_per_s = 1.0;
  size_t closure_component_cap = 3000;
};

struct IngestResult {
  Timetable timetable;
  std::vector<std::string> warnings;
};

namespace detail {

struct Ymd {
  int y, m, d;
};

inline Ymd split_date(int yyyymmdd) {
  return {yyyymmdd / 10000, (yyyymmdd / 100) % 100, yyyymmdd % 100};
}

// Days since civil epoch (Howard Hinnant's algorithm).
inline long days_from_civil(Ymd ymd) {
  int y = ymd.y, m = ymd.m, d = ymd.d;
  y -= m <= 2;
  long era = (y >= 0 ? y : y - 399) / 400;
  unsigned yoe = static_cast<unsigned>(y - era * 400);
  unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

inline Ymd civil_from_days(long z) {
  z += 719468;
  long era = (z >= 0 ? z : z - 146096) / 146097;
  unsigned doe = static_cast<unsigned>(z - era * 146097);
  unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  long y = static_cast<long>(yoe) + era * 400;
  unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  unsigned mp = (5 * doy + 2) / 153;
  unsigned d = doy - (153 * mp + 2) / 5 + 1;
  unsigned m = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (m <= 2)), static_cast<int>(m),
          static_cast<int>(d)};
}

inline int add_days(int yyyymmdd, int delta) {
  Ymd r = civil_from_days(days_from_civil(split_date(yyyymmdd)) + delta);
  return r.y * 10000 + r.m * 100 + r.d;
}

// 0 = Monday ... 6 = Sunday, matching calendar.txt column order.
inline int weekday(int yyyymmdd) {
  long z = days_from_civil(split_date(yyyymmdd));
  return static_cast<int>(((z % 7) + 10) % 7);
}

inline double haversine_m(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kR = 6371000.0, kDeg = 3.14159265358979323846 / 180.0;
  double dlat = (lat2 - lat1) * kDeg, dlon = (lon2 - lon1) * kDeg;
  double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
             std::cos(lat1 * kDeg) * std::cos(lat2 * kDeg) *
                 std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2 * kR * std::asin(std::min(1.0, std::sqrt(a)));
}

}  // namespace detail

inline IngestResult ingest(const std::filesystem::path& gtfs_dir,
                           const IngestConfig& cfg) {
  using gtfscsv::read_table;
  IngestResult result;
  auto require = [&](const char* name) {
    auto t = read_table(gtfs_dir / name);
    if (!t)
      throw std::runtime_error(std::string("missing required GTFS table: ") +
                               name);
    return *t;
  };
  auto field = [](const gtfscsv::Table& t, const std::vector<std::string>& row,
                  int col) -> std::string {
    if (col < 0 || static_cast<size_t>(col) >= row.size()) return "";
    return row[static_cast<size_t>(col)];
  };

  gtfscsv::Table stops = require("stops.txt");
  gtfscsv::Table trips = require("trips.txt");
  gtfscsv::Table stop_times = require("stop_times.txt");
  auto calendar = read_table(gtfs_dir / "calendar.txt");
  auto calendar_dates = read_table(gtfs_dir / "calendar_dates.txt");
  auto transfers = read_table(gtfs_dir / "transfers.txt");
  auto frequencies = read_table(gtfs_dir / "frequencies.txt");
  if (!calendar && !calendar_dates)
    throw std::runtime_error("missing required GTFS table: calendar.txt or calendar_dates.txt");

  // Which services run on each day of the window?
  std::vector<std::unordered_set<std::string>> active(cfg.days);
  if (cfg.days < 1) throw std::invalid_argument("ingest: days must be >= 1");
  for (int d = 0; d < cfg.days; ++d) {
    int date = detail::add_days(cfg.start_date, d);
    int wd = detail::weekday(date);
    if (calendar) {
      int c_sid = calendar->col("service_id");
      int c_start = calendar->col("start_date"), c_end = calendar->col("end_date");
      static const char* kDays[7] = {"monday",   "tuesday", "wednesday",
                                     "thursday", "friday",  "saturday",
                                     "sunday"};
      int c_day = calendar->col(kDays[wd]);
      for (size_t r = 0; r < calendar->rows.size(); ++r) {
        const auto& row = calendar->rows[r];
        if (field(*calendar, row, c_day) != "1") continue;
        int sd = std::atoi(field(*calendar, row, c_start).c_str());
        int ed = std::atoi(field(*calendar, row, c_end).c_str());
        if (date >= sd && date <= ed)
          active[d].insert(field(*calendar, row, c_sid));
      }
    }
    if (calendar_dates) {
      int c_sid = calendar_dates->col("service_id");
      int c_date = calendar_dates->col("date");
      int c_ex = calendar_dates->col("exception_type");
      for (const auto& row : calendar_dates->rows) {
        if (std::atoi(field(*calendar_dates, row, c_date).c_str()) != date)
          continue;
        std::string ex = field(*calendar_dates, row, c_ex);
        if (ex == "1")
          active[d].insert(field(*calendar_dates, row, c_sid));
        else if (ex == "2")
          active[d].erase(field(*calendar_dates, row, c_sid));
      }
    }
  }

  TimetableBuilder builder;
  std::unordered_map<std::string, StopId> stop_index;
  std::vector<std::pair<double, double>> coords;
  {
    int c_id = stops.col("stop_id"), c_name = stops.col("stop_name");
    int c_lat = stops.col("stop_lat"), c_lon = stops.col("stop_lon");
    if (c_id < 0) throw std::runtime_error("stops.txt: missing stop_id column");
    for (size_t r = 0; r < stops.rows.size(); ++r) {
      const auto& row = stops.rows[r];
      std::string id = field(stops, row, c_id);
      if (id.empty())
        throw std::runtime_error("stops.txt:" + std::to_string(r + 2) +
                                 ": empty stop_id");
      if (stop_index.count(id))
        throw std::runtime_error("stops.txt:" + std::to_string(r + 2) +
                                 ": duplicate stop_id " + id);
      stop_index[id] = builder.add_stop(id, field(stops, row, c_name));
      double lat = 0, lon = 0;
      if (c_lat >= 0) lat = std::atof(field(stops, row, c_lat).c_str());
      if (c_lon >= 0) lon = std::atof(field(stops, row, c_lon).c_str());
      coords.emplace_back(lat, lon);
    }
  }

  // stop_times grouped per trip, ordered by stop_sequence.
  struct TimedStop {
    long seq;
    StopId stop;
    Time arr, dep;
  };
  std::unordered_map<std::string, std::vector<TimedStop>> trip_stops;
  {
    int c_trip = stop_times.col("trip_id"), c_arr = stop_times.col("arrival_time");
    int c_dep = stop_times.col("departure_time"), c_stop = stop_times.col("stop_id");
    int c_seq = stop_times.col("stop_sequence");
    if (c_trip < 0 || c_arr < 0 || c_dep < 0 || c_stop < 0 || c_seq < 0)
      throw std::runtime_error("stop_times.txt: missing required column");
    for (size_t r = 0; r < stop_times.rows.size(); ++r) {
      const auto& row = stop_times.rows[r];
      auto at = [&](int c) { return field(stop_times, row, c); };
      auto fail = [&](const std::string& why) {
        throw std::runtime_error("stop_times.txt:" + std::to_string(r + 2) +
                                 ": " + why);
      };
      auto it = stop_index.find(at(c_stop));
      if (it == stop_index.end()) fail("unknown stop_id " + at(c_stop));
      Time arr, dep;
      try {
        arr = parse_time(at(c_arr));
        dep = parse_time(at(c_dep));
      } catch (const std::exception& e) {
        fail(e.what());
        throw;  // unreachable
      }
      trip_stops[at(c_trip)].push_back(
          {std::atol(at(c_seq).c_str()), it->second, arr, dep});
    }
  }
  for (auto& [id, v] : trip_stops)
    std::sort(v.begin(), v.end(),
              [](const TimedStop& a, const TimedStop& b) { return a.seq < b.seq; });

  // Frequency-based trips are materialized into explicit trips.
  std::unordered_map<std::string, std::vector<std::pair<Time, Time>>> freq;
  if (frequencies) {
    int c_trip = frequencies->col("trip_id"), c_start = frequencies->col("start_time");
    int c_end = frequencies->col("end_time"), c_hw = frequencies->col("headway_secs");
    for (const auto& row : frequencies->rows) {
      Time start = parse_time(field(*frequencies, row, c_start));
      Time end = parse_time(field(*frequencies, row, c_end));
      long hw = std::atol(field(*frequencies, row, c_hw).c_str());
      if (hw <= 0) continue;
      for (Time t = start; t < end; t += static_cast<Time>(hw))
        freq[field(*frequencies, row, c_trip)].emplace_back(t, 0);
    }
  }

  {
    int c_trip = trips.col("trip_id"), c_sid = trips.col("service_id");
    if (c_trip < 0 || c_sid < 0)
      throw std::runtime_error("trips.txt: missing required column");
    // Deterministic trip order: file order, then day.
    for (size_t r = 0; r < trips.rows.size(); ++r) {
      const auto& row = trips.rows[r];
      std::string trip_id = field(trips, row, c_trip);
      std::string service = field(trips, row, c_sid);
      auto st = trip_stops.find(trip_id);
      if (st == trip_stops.end() || st->second.size() < 2) {
        result.warnings.push_back("trip " + trip_id +
                                  " dropped: fewer than 2 stop_times");
        continue;
      }
      for (int d = 0; d < cfg.days; ++d) {
        if (!active[d].count(service)) continue;
        Time offset = static_cast<Time>(d) * 86400;
        auto emit = [&](Time extra_shift, const std::string& suffix) {
          RawTrip raw;
          raw.external_id = trip_id + suffix + "@d" + std::to_string(d);
          for (const auto& ts : st->second) {
            raw.stops.push_back(ts.stop);
            raw.arrivals.push_back(ts.arr + offset + extra_shift);
            raw.departures.push_back(ts.dep + offset + extra_shift);
          }
          builder.add_raw_trip(std::move(raw));
        };
        auto fq = freq.find(trip_id);
        if (fq == freq.end()) {
          emit(0, "");
        } else {
          Time base = st->second.front().dep;
          int i = 0;
          for (auto [start, _] : fq->second)
            emit(start - base, "#" + std::to_string(i++));
        }
      }
    }
  }

  // Footpaths: transfers.txt if present, optionally coordinate-derived.
  Footpaths raw_fp;
  raw_fp.out.assign(stop_index.size(), {});
  if (transfers) {
    int c_from = transfers->col("from_stop_id"), c_to = transfers->col("to_stop_id");
    int c_type = transfers->col("transfer_type");
    int c_min = transfers->col("min_transfer_time");
    for (size_t r = 0; r < transfers->rows.size(); ++r) {
      const auto& row = transfers->rows[r];
      std::string type = field(*transfers, row, c_type);
      if (type == "3") continue;  // transfer not possible
      auto fi = stop_index.find(field(*transfers, row, c_from));
      auto ti = stop_index.find(field(*transfers, row, c_to));
      if (fi == stop_index.end() || ti == stop_index.end())
        throw std::runtime_error("transfers.txt:" + std::to_string(r + 2) +
                                 ": unknown stop id");
      if (fi->second == ti->second) continue;
      std::string mt = field(*transfers, row, c_min);
      Time seconds;
      if (!mt.empty())
        seconds = static_cast<Time>(std::atol(mt.c_str())) + cfg.min_change_time;
      else
        seconds = cfg.default_transfer_time;
      raw_fp.set(fi->second, ti->second, seconds);
    }
  }
  if (cfg.walk_radius_m > 0) {
    for (StopId p = 0; p < coords.size(); ++p)
      for (StopId q = 0; q < coords.size(); ++q) {
        if (p == q) continue;
        double m = detail::haversine_m(coords[p].first, coords[p].second,
                                       coords[q].first, coords[q].second);
        if (m <= cfg.walk_radius_m && raw_fp.at(p, q) >= kInfTime)
          raw_fp.set(p, q,
                     static_cast<Time>(std::lround(m / cfg.walk_speed_m_per_s)));
      }
  }
  Footpaths closed = close_footpaths(raw_fp, cfg.closure_component_cap);

  Timetable tt = builder.finalize();
  tt.footpaths = std::move(closed);
  if (tt.footpaths.out.size() < tt.n_stops())
    tt.footpaths.out.resize(tt.n_stops());
  tt.footpaths.build_reverse();
  result.timetable = std::move(tt);
  return result;
}

}  // namespace tbr
