#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>
#include <vector>

#include "tbr/parallel.hpp"
#include "tbr/partition.hpp"
#include "tbr/profile.hpp"
#include "tbr/query.hpp"

/*
 * Transfer flags. For a k-way stop partition, each transfer carries a k-bit
 * pattern; bit i means the transfer may be needed to reach a stop of cell i.
 * Flags are computed by a one-to-all profile search from every source stop.
 *
 * Two optional fixes repair the collision between line pruning and
 * self-pruning:
 *  - departure time buffering: instead of flagging each improving journey
 *    directly, its itinerary is buffered per (stop, round) and unpacked over
 *    the interval of departure times it dominates, flagging the earliest
 *    reachable trip combination for every first-trip departure in between;
 *  - flag augmentation: a transfer inherits the flags of all transfers that
 *    leave a later trip of the same line at the same position towards the
 *    same target event.
 */

namespace tbr {

struct FlagStore {
  enum class Mode : uint8_t { kRaw = 0, kAugmented = 1 };

  uint32_t k = 0;
  Mode mode = Mode::kRaw;
  bool compressed = false;
  size_t n_transfers = 0;
  size_t stride = 0;                 // 64-bit words per pattern
  std::vector<uint64_t> rows;        // uncompressed patterns, transfer-major
  std::vector<uint64_t> patterns;    // dictionary patterns, most common first
  std::vector<uint32_t> indices;     // per-transfer index into the dictionary

  bool operator==(const FlagStore&) const = default;

  static FlagStore zeros(size_t n_transfers, uint32_t k) {
    if (k == 0) throw std::invalid_argument("flag store needs k >= 1");
    FlagStore s;
    s.k = k;
    s.n_transfers = n_transfers;
    s.stride = (k + 63) / 64;
    s.rows.assign(n_transfers * s.stride, 0);
    return s;
  }

  static FlagStore ones(size_t n_transfers, uint32_t k) {
    FlagStore s = zeros(n_transfers, k);
    for (size_t t = 0; t < n_transfers; ++t)
      for (uint32_t c = 0; c < k; ++c) s.set_bit(t, c);
    return s;
  }

  void check(size_t t, uint32_t cell) const {
    if (t >= n_transfers) throw std::out_of_range("flag lookup: bad transfer id");
    if (cell >= k) throw std::out_of_range("flag lookup: bad cell");
  }

  bool get(size_t t, uint32_t cell) const {
    check(t, cell);
    const uint64_t* row = compressed ? &patterns[indices[t] * stride]
                                     : &rows[t * stride];
    return (row[cell >> 6] >> (cell & 63)) & 1u;
  }

  void set_bit(size_t t, uint32_t cell) {
    check(t, cell);
    if (compressed) throw std::logic_error("cannot set bits on a compressed store");
    rows[t * stride + (cell >> 6)] |= uint64_t{1} << (cell & 63);
  }

  bool any(size_t t) const {
    const uint64_t* row = compressed ? &patterns[indices[t] * stride]
                                     : &rows[t * stride];
    for (size_t w = 0; w < stride; ++w)
      if (row[w]) return true;
    return false;
  }

  void merge_or(const FlagStore& other) {
    if (compressed || other.compressed || rows.size() != other.rows.size())
      throw std::logic_error("flag merge: incompatible stores");
    for (size_t i = 0; i < rows.size(); ++i) rows[i] |= other.rows[i];
  }

  TransferFilter filter(uint32_t cell) const {
    check(0, cell);
    TransferFilter f;
    f.stride = stride;
    f.cell = cell;
    if (compressed) {
      f.index = indices.data();
      f.patterns = patterns.data();
    } else {
      f.rows = rows.data();
    }
    return f;
  }
};

// O(1) flag read; the spec-level lookup operation.
inline bool lookup(const FlagStore& s, size_t transfer_id, uint32_t cell) {
  return s.get(transfer_id, cell);
}

// ---------------------------------------------------------------------------
// Compression: deduplicate patterns into a dictionary sorted by decreasing
// occurrence count (ties broken by pattern value for determinism).

inline FlagStore compress(const FlagStore& s) {
  if (s.compressed) return s;
  FlagStore out;
  out.k = s.k;
  out.mode = s.mode;
  out.compressed = true;
  out.n_transfers = s.n_transfers;
  out.stride = s.stride;

  std::map<std::vector<uint64_t>, uint32_t> count;
  for (size_t t = 0; t < s.n_transfers; ++t) {
    std::vector<uint64_t> row(s.rows.begin() + t * s.stride,
                              s.rows.begin() + (t + 1) * s.stride);
    count[row]++;
  }
  std::vector<std::pair<const std::vector<uint64_t>*, uint32_t>> order;
  order.reserve(count.size());
  for (const auto& [row, c] : count) order.emplace_back(&row, c);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  std::map<std::vector<uint64_t>, uint32_t> index_of;
  out.patterns.reserve(order.size() * s.stride);
  for (uint32_t i = 0; i < order.size(); ++i) {
    index_of[*order[i].first] = i;
    out.patterns.insert(out.patterns.end(), order[i].first->begin(),
                        order[i].first->end());
  }
  out.indices.resize(s.n_transfers);
  for (size_t t = 0; t < s.n_transfers; ++t) {
    std::vector<uint64_t> row(s.rows.begin() + t * s.stride,
                              s.rows.begin() + (t + 1) * s.stride);
    out.indices[t] = index_of[row];
  }
  return out;
}

inline FlagStore decompress(const FlagStore& s) {
  if (!s.compressed) return s;
  FlagStore out = FlagStore::zeros(s.n_transfers, s.k);
  out.mode = s.mode;
  for (size_t t = 0; t < s.n_transfers; ++t)
    std::copy(s.patterns.begin() + s.indices[t] * s.stride,
              s.patterns.begin() + (s.indices[t] + 1) * s.stride,
              out.rows.begin() + t * s.stride);
  return out;
}

// ---------------------------------------------------------------------------
// Itinerary unpacking

// Journey realizing the itinerary with the earliest reachable trip of every
// line for the given source departure time; nullopt if some line has no
// trip late enough.
inline std::optional<Journey> j_min(const Timetable& tt, const Itinerary& it,
                                    Time dep) {
  Journey j;
  Time ready = dep;   // earliest boarding time at the next line's entry stop
  StopId from = it.source;
  for (size_t i = 0; i < it.segs.size(); ++i) {
    const ItinerarySeg& seg = it.segs[i];
    StopId board_stop = tt.lines[seg.line].stops[seg.enter_pos];
    Time walk = tt.footpaths.at(from, board_stop);
    if (walk >= kInfTime) return std::nullopt;
    auto t = earliest_trip(tt, seg.line, seg.enter_pos, ready + walk);
    if (!t) return std::nullopt;
    j.legs.push_back({*t, seg.enter_pos, seg.exit_pos});
    if (i == 0) {
      j.initial_walk = walk;
      j.departure = tt.dep(*t, seg.enter_pos) - walk;
    }
    ready = tt.arr(*t, seg.exit_pos);
    from = tt.lines[seg.line].stops[seg.exit_pos];
  }
  j.arrival = ready;  // target walk added by the caller when known
  return j;
}

// Emits j_min(it, t) for every first-line trip whose implied source
// departure t lies in (lo, hi].
template <typename Sink>
void unpack_itinerary(const Timetable& tt, const Itinerary& it, Time lo,
                      Time hi, Sink&& sink) {
  if (it.segs.empty()) return;
  const ItinerarySeg& first = it.segs.front();
  StopId board_stop = tt.lines[first.line].stops[first.enter_pos];
  Time walk = tt.footpaths.at(it.source, board_stop);
  if (walk >= kInfTime) return;
  for (TripId t : tt.lines[first.line].trips) {
    Time implied = tt.dep(t, first.enter_pos) - walk;
    if (implied <= lo || implied > hi) continue;
    auto j = j_min(tt, it, implied);
    if (j) sink(*j);
  }
}

// ---------------------------------------------------------------------------
// Flag computation

struct FlagComputeConfig {
  bool buffering = true;
  bool augmentation = true;
  int max_rounds = 16;
  unsigned threads = 1;
  // Test hook: sees every journey whose transfers get flagged, with the
  // target stop it was flagged for.
  std::function<void(const Journey&, StopId)> observer;
};

inline FlagStore augment_flags(const FlagStore& store, const TransferSet& ts,
                               const Timetable& tt) {
  if (store.compressed)
    throw std::invalid_argument("augment_flags: store must be uncompressed");
  FlagStore out = store;
  out.mode = FlagStore::Mode::kAugmented;

  // Group transfers leaving the same line at the same position towards the
  // same target event; sweep each group in descending trip rank, OR-ing
  // patterns so each transfer absorbs its successors' flags.
  struct Item {
    LineId line;
    uint32_t from_pos;
    TripId to_trip;
    uint32_t to_pos;
    uint32_t rank;
    uint32_t id;
  };
  std::vector<Item> items;
  items.reserve(ts.size());
  for (uint32_t id = 0; id < ts.size(); ++id) {
    const Transfer& t = ts.transfers[id];
    items.push_back({tt.trips[t.from_trip].line, t.from_pos, t.to_trip,
                     t.to_pos, tt.trips[t.from_trip].index_in_line, id});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return std::tie(a.line, a.from_pos, a.to_trip, a.to_pos, a.rank) <
           std::tie(b.line, b.from_pos, b.to_trip, b.to_pos, b.rank);
  });

  std::vector<uint64_t> acc(store.stride);
  size_t i = items.size();
  while (i > 0) {
    size_t hi = i;
    auto group_key = [&](const Item& it) {
      return std::tie(it.line, it.from_pos, it.to_trip, it.to_pos);
    };
    while (i > 0 && group_key(items[i - 1]) == group_key(items[hi - 1])) --i;
    std::fill(acc.begin(), acc.end(), 0);
    for (size_t j = hi; j-- > i;) {  // descending rank within the group
      const uint64_t* row = &store.rows[items[j].id * store.stride];
      uint64_t* dst = &out.rows[items[j].id * store.stride];
      for (size_t w = 0; w < store.stride; ++w) {
        acc[w] |= row[w];
        dst[w] = acc[w];
      }
    }
  }
  return out;
}

inline FlagStore compute_flags(const Timetable& tt, const TransferSet& ts,
                               const Partition& partition,
                               const FlagComputeConfig& cfg = {}) {
  if (partition.cell_of.size() != tt.n_stops())
    throw std::invalid_argument("compute_flags: partition size mismatch");
  FlagStore global = FlagStore::zeros(ts.size(), partition.k);
  std::mutex registry_mutex;
  std::mutex observer_mutex;

  struct Buffered {
    uint32_t seg_offset = 0;
    uint32_t seg_count = 0;
    Time stamp = kInfTime;
    bool set = false;
  };

  struct Worker {
    ProfileSearch profile;
    FlagStore local;
    // Departure-time buffering state, reused across sources.
    std::vector<Buffered> buffered;
    std::vector<ItinerarySeg> arena;
    std::vector<uint32_t> touched;
    explicit Worker(const Timetable& tt, const TransferSet& ts, uint32_t k)
        : profile(tt, ts), local(FlagStore::zeros(ts.size(), k)) {}
  };
  std::vector<std::shared_ptr<Worker>> registry;

  auto flag_journey = [&](Worker& w, const Journey& j, StopId target) {
    for (size_t i = 0; i + 1 < j.legs.size(); ++i) {
      uint32_t id = ts.find(tt, j.legs[i].trip, j.legs[i].exit_pos,
                            j.legs[i + 1].trip, j.legs[i + 1].enter_pos);
      // With a pruned transfer set the realized change may be missing; the
      // journey is then not fully coverable and the bit simply stays unset.
      if (id != kNone32) w.local.set_bit(id, partition.cell_of[target]);
    }
    if (cfg.observer) {
      std::lock_guard<std::mutex> lock(observer_mutex);
      cfg.observer(j, target);
    }
  };

  size_t slots = tt.n_stops() * static_cast<size_t>(cfg.max_rounds);
  parallel_for_with_state(
      tt.n_stops(), cfg.threads,
      [&] {
        auto w = std::make_shared<Worker>(tt, ts, partition.k);
        std::lock_guard<std::mutex> lock(registry_mutex);
        registry.push_back(w);
        return w;
      },
      [&](std::shared_ptr<Worker>& wp, size_t source_idx) {
        Worker& w = *wp;
        StopId source = static_cast<StopId>(source_idx);
        w.buffered.assign(slots, Buffered{});
        w.arena.clear();
        w.touched.clear();

        auto sink = [&](Time run_dep, StopId stop, int round, const Journey& j) {
          if (!cfg.buffering) {
            flag_journey(w, j, stop);
            return;
          }
          size_t slot = stop * static_cast<size_t>(cfg.max_rounds) + round - 1;
          Buffered& buf = w.buffered[slot];
          if (buf.set) {
            Itinerary old;
            old.source = source;
            old.segs.assign(w.arena.begin() + buf.seg_offset,
                            w.arena.begin() + buf.seg_offset + buf.seg_count);
            unpack_itinerary(tt, old, run_dep, buf.stamp,
                             [&](const Journey& jj) { flag_journey(w, jj, stop); });
          } else {
            w.touched.push_back(static_cast<uint32_t>(slot));
          }
          Itinerary cur = itinerary_of(tt, j, source);
          buf.seg_offset = static_cast<uint32_t>(w.arena.size());
          buf.seg_count = static_cast<uint32_t>(cur.segs.size());
          buf.stamp = run_dep;
          buf.set = true;
          w.arena.insert(w.arena.end(), cur.segs.begin(), cur.segs.end());
        };

        w.profile.run(source, tt.service_start, tt.service_end, sink,
                      cfg.max_rounds);

        if (cfg.buffering) {
          // Remaining buffered itineraries cover all departures before the
          // run that set them.
          for (uint32_t slot : w.touched) {
            const Buffered& buf = w.buffered[slot];
            StopId stop = slot / cfg.max_rounds;
            Itinerary it;
            it.source = source;
            it.segs.assign(w.arena.begin() + buf.seg_offset,
                           w.arena.begin() + buf.seg_offset + buf.seg_count);
            unpack_itinerary(tt, it, kNegInfTime, buf.stamp,
                             [&](const Journey& jj) { flag_journey(w, jj, stop); });
          }
        }
      });

  // OR is commutative, so the merge order does not affect the result.
  for (const auto& w : registry) global.merge_or(w->local);
  return cfg.augmentation ? augment_flags(global, ts, tt) : global;
}

// ---------------------------------------------------------------------------
// Removing transfers that carry no flag

struct StrippedTransfers {
  TransferSet transfers;
  FlagStore flags;
};

inline StrippedTransfers remove_unflagged(const Timetable& tt,
                                          const TransferSet& ts,
                                          const FlagStore& flags) {
  if (flags.n_transfers != ts.size())
    throw std::invalid_argument("remove_unflagged: size mismatch");
  FlagStore raw = decompress(flags);
  StrippedTransfers out;
  out.flags.k = raw.k;
  out.flags.mode = raw.mode;
  out.flags.stride = raw.stride;

  std::vector<uint32_t> keep;
  for (uint32_t id = 0; id < ts.size(); ++id)
    if (raw.any(id)) keep.push_back(id);

  out.transfers.event_offsets.assign(tt.n_events() + 1, 0);
  for (uint32_t id : keep) {
    const Transfer& t = ts.transfers[id];
    out.transfers.event_offsets[tt.event_id(t.from_trip, t.from_pos) + 1]++;
  }
  for (size_t i = 1; i < out.transfers.event_offsets.size(); ++i)
    out.transfers.event_offsets[i] += out.transfers.event_offsets[i - 1];
  out.transfers.transfers.reserve(keep.size());
  out.flags.n_transfers = keep.size();
  out.flags.rows.reserve(keep.size() * raw.stride);
  for (uint32_t id : keep) {
    out.transfers.transfers.push_back(ts.transfers[id]);
    out.flags.rows.insert(out.flags.rows.end(),
                          raw.rows.begin() + id * raw.stride,
                          raw.rows.begin() + (id + 1) * raw.stride);
  }
  return out;
}

}  // namespace tbr
