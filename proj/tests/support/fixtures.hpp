#pragma once

#include "tbr/partition.hpp"
#include "tbr/timetable.hpp"
#include "tbr/transfers.hpp"

/*
 * Hand-built example networks used across the test suites. Times are fixture
 * choices; what matters is which changes are feasible, the trip order within
 * each line, and which stops share a partition cell.
 */

namespace tbr::fixtures {

// Two parallel relations B -> G (two trips each) feeding a single final
// trip L towards the target; the earlier B/G pair leaves strictly earlier
// but arrives at the target at the same time via the shared L trip.
//
//   ps --B--> pb ~walk~ pc --G--> pd ~walk~ pe --L--> pt
struct BufferingNet {
  Timetable tt;
  StopId ps = 0, pb = 1, pc = 2, pd = 3, pe = 4, pt = 5;
  TripId b1 = 0, b0 = 1, g1 = 2, g0 = 3, l = 4;
  Partition cells;  // k = 2, pt alone in cell 1

  BufferingNet() {
    TimetableBuilder b;
    for (const char* name : {"ps", "pb", "pc", "pd", "pe", "pt"})
      b.add_stop(name);
    // Early pair: departs 8:00, transfers reach G1, then L.
    b.add_trip({{ps, 28800, 28800}, {pb, 29400, 29400}});   // B1
    b.add_trip({{ps, 30600, 30600}, {pb, 31200, 31200}});   // B0
    b.add_trip({{pc, 29700, 29700}, {pd, 30300, 30300}});   // G1
    b.add_trip({{pc, 31500, 31500}, {pd, 32100, 32100}});   // G0
    b.add_trip({{pe, 32400, 32400}, {pt, 33000, 33000}});   // L
    b.add_footpath(pb, pc, 60);
    b.add_footpath(pd, pe, 60);
    tt = b.finalize();
    cells.k = 2;
    cells.epsilon = 1.0;
    cells.cell_of = {0, 0, 0, 0, 0, 1};
  }

  Time dep_b1() const { return tt.dep(b1, 0); }  // 8:00
  Time dep_b0() const { return tt.dep(b0, 0); }  // 8:30
};

// Two different first lines (R earlier, B later) feeding the two trips of
// line G; G1 also reaches a second target pt2 via line H, so the transfer
// into G1 is flagged while G1 -> L is not found by the plain profile
// search. The query entering R first blocks G0 by line pruning.
//
//   ps --R--> pb2 ~walk~ pc --G--> pd ~walk~ pe  --L--> pt
//   ps --B--> pb  ~walk~ pc              ~walk~ pe2 --H--> pt2
//                        pc --M--> pm ~walk~ pe
//
// The decoy line M departs pc right after G0 and also reaches L. Profile
// searches started near pc therefore settle the two-trip label to pt via
// M in their first run, and self-pruning keeps the G-to-L itinerary out of
// their buffers; without M, buffering alone would already flag G1 -> L
// from those sources and the augmentation effect would be invisible.
// M is useless from ps: the three-trip detour through it ties the arrival
// of the direct journeys, so it never improves a label there.
struct AugmentationNet {
  Timetable tt;
  StopId ps = 0, pb = 1, pb2 = 2, pc = 3, pd = 4, pe = 5, pt = 6, pe2 = 7,
         pt2 = 8, pm = 9;
  TripId r = 0, b = 1, g1 = 2, g0 = 3, l = 4, h = 5, m = 6;
  Partition cells;  // k = 2, {pt, pt2} = cell 1

  AugmentationNet() {
    TimetableBuilder bld;
    for (const char* name :
         {"ps", "pb", "pb2", "pc", "pd", "pe", "pt", "pe2", "pt2", "pm"})
      bld.add_stop(name);
    // R added first so that the red line is boarded and scanned before the
    // blue one; the failure needs G1 to be entered before B's transfer to
    // G0 is relaxed. M is added last so that transfers towards G relax
    // before transfers towards M.
    bld.add_trip({{ps, 28800, 28800}, {pb2, 29280, 29280}});  // R  8:00
    bld.add_trip({{ps, 30000, 30000}, {pb, 30600, 30600}});   // B  8:20
    bld.add_trip({{pc, 29400, 29400}, {pd, 30000, 30000}});   // G1
    bld.add_trip({{pc, 31200, 31200}, {pd, 31800, 31800}});   // G0
    bld.add_trip({{pe, 32400, 32400}, {pt, 33000, 33000}});   // L
    bld.add_trip({{pe2, 31200, 31200}, {pt2, 31800, 31800}}); // H
    bld.add_trip({{pc, 31250, 31250}, {pm, 31900, 31900}});   // M
    bld.add_footpath(pb, pc, 60);
    bld.add_footpath(pb2, pc, 60);
    bld.add_footpath(pd, pe, 60);
    bld.add_footpath(pd, pe2, 60);
    bld.add_footpath(pm, pe, 60);
    tt = bld.finalize();
    cells.k = 2;
    cells.epsilon = 1.0;
    cells.cell_of = {0, 0, 0, 0, 0, 0, 1, 0, 1, 0};
  }

  Time dep_r() const { return tt.dep(r, 0); }  // 8:00
  Time dep_b() const { return tt.dep(b, 0); }  // 8:20
};

// The eight-stop layout-graph example: four lines, one symmetric footpath
// pair, nine weighted undirected edges.
struct LayoutNet {
  Timetable tt;
  // v1..v8 map to stop ids 0..7.

  LayoutNet() {
    TimetableBuilder b;
    for (int i = 1; i <= 8; ++i) b.add_stop("v" + std::to_string(i));
    auto ride = [&](std::vector<StopId> path) {
      std::vector<std::tuple<StopId, Time, Time>> ev;
      Time t = 28800;
      for (StopId s : path) {
        ev.emplace_back(s, t, t);
        t += 600;
      }
      b.add_trip(ev);
    };
    ride({0, 1, 2});        // green: v1 v2 v3
    ride({6, 4, 7});        // blue: v7 v5 v8
    ride({3, 1, 4, 5});     // red: v4 v2 v5 v6
    ride({1, 4, 7, 2});     // lilac: v2 v5 v8 v3
    b.add_footpath(0, 6, 60);
    b.add_footpath(6, 0, 60);
    tt = b.finalize();
  }
};

// Transfer id for the change between two concrete stop events; fails the
// test if the transfer is not present.
inline uint32_t transfer_id(const Timetable& tt, const TransferSet& ts,
                            TripId from_trip, uint32_t from_pos, TripId to_trip,
                            uint32_t to_pos) {
  uint32_t id = ts.find(tt, from_trip, from_pos, to_trip, to_pos);
  if (id == kNone32) throw std::runtime_error("fixture transfer missing");
  return id;
}

}  // namespace tbr::fixtures
