// Acceptance suite: every criterion prints one PASS/FAIL line and fails the
// build when violated. Tolerances and thresholds are pinned in code.

#include <catch2/catch_amalgamated.hpp>
#include <chrono>
#include <cstdio>
#include <map>
#include <set>

#include "support/fixtures.hpp"
#include "support/synthetic.hpp"
#include "tbr/bench.hpp"
#include "tbr/serialization.hpp"

using namespace tbr;

namespace {

bool criterion(int n, const char* desc, bool pass) {
  std::printf("ACCEPTANCE %2d [%s]: %s\n", n, pass ? "PASS" : "FAIL", desc);
  std::fflush(stdout);
  return pass;
}

FlagStore flags_for(const Timetable& tt, const TransferSet& ts,
                    const Partition& cells, bool buffering, bool augmentation) {
  FlagComputeConfig cfg;
  cfg.buffering = buffering;
  cfg.augmentation = augmentation;
  cfg.threads = 2;
  return compute_flags(tt, ts, cells, cfg);
}

std::array<int, 4> flag_columns(const Timetable& tt, const TransferSet& ts,
                                const Partition& cells, uint32_t transfer,
                                uint32_t cell) {
  return {flags_for(tt, ts, cells, false, false).get(transfer, cell),
          flags_for(tt, ts, cells, true, false).get(transfer, cell),
          flags_for(tt, ts, cells, false, true).get(transfer, cell),
          flags_for(tt, ts, cells, true, true).get(transfer, cell)};
}

}  // namespace

TEST_CASE("criterion 1: oracle equivalence of unfiltered queries") {
  auto t0 = std::chrono::steady_clock::now();
  size_t queries = 0, networks = 0, agree = 0;
  for (uint64_t seed = 101; networks < 50; ++seed, ++networks) {
    Timetable tt = synth::make_network(seed);
    TransferSet ts = generate_transfers(tt, TransferPruning::kFull);
    TbQuery engine(tt, ts);
    Oracle oracle(tt);
    for (const QuerySpec& q : make_workload(tt, 42, seed * 31 + 7)) {
      auto got = sorted_pairs(engine.run(q.source, q.target, q.dep));
      auto expect = sorted_pairs(oracle.query(q.source, q.target, q.dep));
      if (got == expect) ++agree;
      ++queries;
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0)
                    .count();
  bool pass = networks >= 50 && queries >= 2000 && agree == queries && secs < 60;
  std::printf("  networks=%zu queries=%zu agree=%zu time=%.1fs\n", networks,
              queries, agree, secs);
  REQUIRE(criterion(1, "unfiltered queries match the exact oracle 100%", pass));
}

TEST_CASE("criterion 2: buffering-example flag columns") {
  fixtures::BufferingNet net;
  TransferSet ts = generate_transfers(net.tt, TransferPruning::kFull);
  uint32_t cell = 1;
  bool pass = true;
  pass &= flag_columns(net.tt, ts, net.cells,
                       fixtures::transfer_id(net.tt, ts, net.b1, 1, net.g1, 0),
                       cell) == std::array<int, 4>{0, 1, 0, 1};
  pass &= flag_columns(net.tt, ts, net.cells,
                       fixtures::transfer_id(net.tt, ts, net.g1, 1, net.l, 0),
                       cell) == std::array<int, 4>{0, 1, 1, 1};
  pass &= flag_columns(net.tt, ts, net.cells,
                       fixtures::transfer_id(net.tt, ts, net.b0, 1, net.g0, 0),
                       cell) == std::array<int, 4>{1, 1, 1, 1};
  pass &= flag_columns(net.tt, ts, net.cells,
                       fixtures::transfer_id(net.tt, ts, net.g0, 1, net.l, 0),
                       cell) == std::array<int, 4>{1, 1, 1, 1};
  REQUIRE(criterion(2, "departure-buffering example reproduces exactly", pass));
}

TEST_CASE("criterion 3: augmentation-example flag columns") {
  fixtures::AugmentationNet net;
  TransferSet ts = generate_transfers(net.tt, TransferPruning::kFull);
  uint32_t cell = 1;
  bool pass = true;
  pass &= flag_columns(net.tt, ts, net.cells,
                       fixtures::transfer_id(net.tt, ts, net.g1, 1, net.l, 0),
                       cell) == std::array<int, 4>{0, 0, 1, 1};
  pass &= flag_columns(net.tt, ts, net.cells,
                       fixtures::transfer_id(net.tt, ts, net.r, 1, net.g1, 0),
                       cell) == std::array<int, 4>{1, 1, 1, 1};
  pass &= flag_columns(net.tt, ts, net.cells,
                       fixtures::transfer_id(net.tt, ts, net.b, 1, net.g0, 0),
                       cell) == std::array<int, 4>{1, 1, 1, 1};
  pass &= flag_columns(net.tt, ts, net.cells,
                       fixtures::transfer_id(net.tt, ts, net.g0, 1, net.l, 0),
                       cell) == std::array<int, 4>{1, 1, 1, 1};
  pass &= flag_columns(net.tt, ts, net.cells,
                       fixtures::transfer_id(net.tt, ts, net.g1, 1, net.h, 0),
                       cell) == std::array<int, 4>{1, 1, 1, 1};
  REQUIRE(criterion(3, "flag-augmentation example reproduces exactly", pass));
}

TEST_CASE("criterion 4: failure scenarios behave as described") {
  bool pass = true;
  {
    fixtures::BufferingNet net;
    TransferSet ts = generate_transfers(net.tt, TransferPruning::kFull);
    TbQuery engine(net.tt, ts);
    auto expect =
        sorted_pairs(oracle_query(net.tt, net.ps, net.pt, net.dep_b1()));
    FlagStore plain = flags_for(net.tt, ts, net.cells, false, false);
    FlagStore fixed = flags_for(net.tt, ts, net.cells, true, true);
    auto wrong = sorted_pairs(
        engine.run(net.ps, net.pt, net.dep_b1(), plain.filter(1)));
    auto right = sorted_pairs(
        engine.run(net.ps, net.pt, net.dep_b1(), fixed.filter(1)));
    pass &= (wrong != expect) && (right == expect);
  }
  {
    fixtures::AugmentationNet net;
    TransferSet ts = generate_transfers(net.tt, TransferPruning::kFull);
    TbQuery engine(net.tt, ts);
    auto expect =
        sorted_pairs(oracle_query(net.tt, net.ps, net.pt, net.dep_r()));
    FlagStore buf_only = flags_for(net.tt, ts, net.cells, true, false);
    FlagStore fixed = flags_for(net.tt, ts, net.cells, true, true);
    auto wrong = sorted_pairs(
        engine.run(net.ps, net.pt, net.dep_r(), buf_only.filter(1)));
    auto right = sorted_pairs(
        engine.run(net.ps, net.pt, net.dep_r(), fixed.filter(1)));
    pass &= (wrong != expect) && (right == expect);
  }
  REQUIRE(criterion(
      4, "flagged queries fail without the fixes and succeed with both", pass));
}

TEST_CASE("criterion 5: success-rate ordering over the fix configurations") {
  enum Config { kNeither, kAugOnly, kBufOnly, kBoth, kBothFull, kConfigs };
  size_t correct[kConfigs] = {};
  size_t total = 0;

  for (uint64_t seed = 501; seed < 521; ++seed) {
    synth::Params p;
    p.min_stops = 20;
    p.max_stops = 36;
    p.min_lines = 6;
    p.max_lines = 12;
    p.min_trips = 3;
    p.max_trips = 6;
    Timetable tt = synth::make_network(seed, p);
    TransferSet reduced = generate_transfers(tt, TransferPruning::kReduced, 2);
    TransferSet full = generate_transfers(tt, TransferPruning::kFull, 2);
    Oracle oracle(tt);
    auto queries = make_workload(tt, 50, seed * 17 + 3);

    for (uint32_t k : {4u, 8u}) {
      if (k > tt.n_stops()) continue;
      Partition cells = partition_timetable(tt, k, 0.05, seed);
      FlagStore flags[kConfigs] = {
          flags_for(tt, reduced, cells, false, false),
          flags_for(tt, reduced, cells, false, true),
          flags_for(tt, reduced, cells, true, false),
          flags_for(tt, reduced, cells, true, true),
          flags_for(tt, full, cells, true, true)};
      TbQuery engine_reduced(tt, reduced);
      TbQuery engine_full(tt, full);
      for (const QuerySpec& q : queries) {
        auto expect = sorted_pairs(oracle.query(q.source, q.target, q.dep));
        for (int c = 0; c < kConfigs; ++c) {
          TbQuery& engine = c == kBothFull ? engine_full : engine_reduced;
          auto got = sorted_pairs(engine.run(
              q.source, q.target, q.dep, flags[c].filter(cells.cell_of[q.target])));
          if (got == expect) ++correct[c];
        }
        ++total;
      }
    }
  }

  double rate[kConfigs];
  for (int c = 0; c < kConfigs; ++c)
    rate[c] = static_cast<double>(correct[c]) / total;
  std::printf(
      "  queries=%zu neither=%.4f aug=%.4f buf=%.4f both=%.4f both_full=%.4f\n",
      total, rate[kNeither], rate[kAugOnly], rate[kBufOnly], rate[kBoth],
      rate[kBothFull]);
  bool pass = rate[kNeither] <= rate[kAugOnly] &&
              rate[kAugOnly] <= rate[kBufOnly] && rate[kBufOnly] <= rate[kBoth] &&
              rate[kBoth] <= rate[kBothFull] && rate[kBothFull] >= 0.99;
  REQUIRE(criterion(5, "success rates are ordered across fix configurations",
                    pass));
}

TEST_CASE("criterion 6: flags shrink the search space, more cells shrink more") {
  Timetable tt = synth::make_clustered(601, 16, 14);
  TransferSet ts = generate_transfers(tt, TransferPruning::kReduced, 2);
  auto queries = make_workload(tt, 250, 607);

  TbQuery engine(tt, ts);
  uint64_t plain = 0;
  for (const QuerySpec& q : queries) {
    engine.run(q.source, q.target, q.dep);
    plain += engine.stats().scanned_segments;
  }

  std::map<uint32_t, uint64_t> scanned;
  for (uint32_t k : {2u, 4u, 8u, 16u}) {
    Partition cells = partition_timetable(tt, k, 0.05, 611);
    FlagStore flags = flags_for(tt, ts, cells, true, true);
    uint64_t sum = 0;
    for (const QuerySpec& q : queries) {
      engine.run(q.source, q.target, q.dep, flags.filter(cells.cell_of[q.target]));
      sum += engine.stats().scanned_segments;
    }
    scanned[k] = sum;
  }

  double mean_plain = static_cast<double>(plain) / queries.size();
  std::printf("  mean scanned segments: plain=%.1f", mean_plain);
  for (auto& [k, sum] : scanned)
    std::printf(" k%u=%.1f", k, static_cast<double>(sum) / queries.size());
  std::printf("\n");

  bool monotone = scanned[2] > scanned[4] && scanned[4] > scanned[8] &&
                  scanned[8] > scanned[16];
  bool reduction = scanned[8] <= 0.7 * plain && scanned[16] <= 0.7 * plain;
  REQUIRE(criterion(6, "search space falls to <= 0.7x and shrinks with k",
                    monotone && reduction));
}

TEST_CASE("criterion 7: single-cell flags are almost always neutral") {
  size_t total = 0, equal = 0;
  for (uint64_t seed = 701; seed < 721; ++seed) {
    Timetable tt = synth::make_network(seed);
    TransferSet ts = generate_transfers(tt, TransferPruning::kReduced);
    Partition k1;
    k1.k = 1;
    k1.cell_of.assign(tt.n_stops(), 0);
    FlagStore flags = flags_for(tt, ts, k1, true, true);
    TbQuery engine(tt, ts);
    for (const QuerySpec& q : make_workload(tt, 50, seed + 1)) {
      auto plain = sorted_pairs(engine.run(q.source, q.target, q.dep));
      auto flagged =
          sorted_pairs(engine.run(q.source, q.target, q.dep, flags.filter(0)));
      if (plain == flagged) ++equal;
      ++total;
    }
  }
  double r = static_cast<double>(equal) / total;
  std::printf("  queries=%zu equal=%zu rate=%.4f\n", total, equal, r);
  REQUIRE(criterion(7, "k=1 flagged queries equal unfiltered on >= 99%",
                    r >= 0.99));
}

TEST_CASE("criterion 8: layout graph weights are exact") {
  fixtures::LayoutNet net;
  LayoutGraph g = build_layout_graph(net.tt);
  std::map<std::pair<uint32_t, uint32_t>, uint64_t> weights;
  for (const auto& e : g.edges) weights[{e.u, e.v}] = e.weight;
  std::map<std::pair<uint32_t, uint32_t>, uint64_t> expect{
      {{0, 1}, 1}, {{0, 6}, 2}, {{1, 2}, 1}, {{1, 3}, 1}, {{1, 4}, 2},
      {{2, 7}, 1}, {{4, 5}, 1}, {{4, 6}, 1}, {{4, 7}, 2}};
  REQUIRE(criterion(8, "example layout graph has the nine exact edge weights",
                    weights == expect));
}

TEST_CASE("criterion 9: partition balance holds on every random graph") {
  size_t graphs = 0, checks = 0;
  bool pass = true;
  for (uint64_t seed = 901; graphs < 200; ++seed, ++graphs) {
    synth::Params p;
    p.min_stops = 16;
    p.max_stops = 40;
    Timetable tt = synth::make_network(seed, p);
    LayoutGraph g = build_layout_graph(tt);
    for (uint32_t k = 2; k <= 16; ++k) {
      if (k > g.n) break;
      for (double eps : {0.03, 0.05, 0.1}) {
        Partition part = partition_graph(g, k, eps, seed * 1000 + k);
        std::vector<size_t> sizes(k, 0);
        for (uint32_t c : part.cell_of) sizes[c]++;
        size_t cap = part.max_cell_size();
        for (size_t s : sizes) pass &= (s >= 1 && s <= cap);
        ++checks;
      }
    }
  }
  std::printf("  graphs=%zu partitions=%zu\n", graphs, checks);
  REQUIRE(criterion(9, "balance bound holds for all k and epsilon", pass));
}

TEST_CASE("criterion 10: compression is faithful and ordered") {
  Rng rng(1001);
  bool pass = true;
  for (int trial = 0; trial < 50; ++trial) {
    size_t n = 1 + rng.below(80);
    uint32_t k = static_cast<uint32_t>(1 + rng.below(96));
    FlagStore s = FlagStore::zeros(n, k);
    for (size_t i = 0; i < n * k / 4; ++i)
      s.set_bit(rng.below(n), static_cast<uint32_t>(rng.below(k)));
    FlagStore c = compress(s);
    std::set<std::vector<uint64_t>> distinct;
    for (size_t t = 0; t < n; ++t)
      distinct.insert({s.rows.begin() + t * s.stride,
                       s.rows.begin() + (t + 1) * s.stride});
    size_t n_patterns = c.patterns.size() / c.stride;
    pass &= n_patterns == distinct.size();
    for (size_t t = 0; t < n && pass; ++t)
      for (uint32_t cell = 0; cell < k; ++cell)
        if (c.get(t, cell) != s.get(t, cell)) pass = false;
    std::vector<size_t> occur(n_patterns, 0);
    for (uint32_t idx : c.indices) occur[idx]++;
    for (size_t i = 0; i + 1 < n_patterns; ++i)
      pass &= occur[i] >= occur[i + 1];
    pass &= decompress(c).rows == s.rows;
  }
  REQUIRE(criterion(10, "dictionary lookups are bit-identical and sorted", pass));
}

TEST_CASE("criterion 11: augmentation is idempotent and matches the oracle") {
  bool pass = true;
  int stores = 0;
  for (uint64_t seed = 1101; stores < 100; ++seed) {
    synth::Params p;
    p.min_stops = 8;
    p.max_stops = 18;
    p.min_lines = 3;
    p.max_lines = 7;
    Timetable tt = synth::make_network(seed, p);
    TransferSet ts = generate_transfers(tt, TransferPruning::kFull);
    if (ts.size() == 0) continue;
    Rng rng(seed * 3 + 1);
    uint32_t k = static_cast<uint32_t>(1 + rng.below(6));
    FlagStore raw = FlagStore::zeros(ts.size(), k);
    for (size_t i = 0; i < ts.size() * k / 4 + 1; ++i)
      raw.set_bit(rng.below(ts.size()), static_cast<uint32_t>(rng.below(k)));
    FlagStore aug = augment_flags(raw, ts, tt);

    // Quadratic-by-definition oracle, grouped for tractability.
    std::map<std::tuple<LineId, uint32_t, TripId, uint32_t>,
             std::vector<uint32_t>>
        groups;
    for (uint32_t id = 0; id < ts.size(); ++id) {
      const Transfer& t = ts.transfers[id];
      groups[{tt.trips[t.from_trip].line, t.from_pos, t.to_trip, t.to_pos}]
          .push_back(id);
    }
    for (auto& [key, ids] : groups) {
      for (uint32_t id : ids)
        for (uint32_t cell = 0; cell < k; ++cell) {
          bool expect = false;
          for (uint32_t other : ids)
            if (tt.trips[ts.transfers[other].from_trip].index_in_line >=
                    tt.trips[ts.transfers[id].from_trip].index_in_line &&
                raw.get(other, cell))
              expect = true;
          if (aug.get(id, cell) != expect) pass = false;
        }
    }
    pass &= augment_flags(aug, ts, tt).rows == aug.rows;
    ++stores;
  }
  std::printf("  stores=%d\n", stores);
  REQUIRE(criterion(11, "augmentation equals the successor-OR definition", pass));
}

TEST_CASE("criterion 12: artifacts are byte-identical across two runs") {
  auto pipeline = [](int run) {
    (void)run;
    Timetable tt = synth::make_network(1201);
    TransferSet ts = generate_transfers(tt, TransferPruning::kReduced, 3);
    Partition p = partition_timetable(tt, 5, 0.05, 12);
    FlagComputeConfig cfg;
    cfg.threads = 3;
    FlagStore flags = compute_flags(tt, ts, p, cfg);
    std::string part_text;
    for (uint32_t c : p.cell_of) part_text += std::to_string(c) + "\n";
    return std::tuple(encode_transfers(ts), part_text, encode_flags(flags));
  };
  REQUIRE(criterion(12, "transfer, partition and flag bytes reproduce",
                    pipeline(0) == pipeline(1)));
}
