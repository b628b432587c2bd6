// Command line frontend: ingest GTFS feeds, precompute transfers,
// partitions and flags, run queries, verify against the exact oracle and
// benchmark. Artifacts are written and read via the versioned binary
// container; partitions use the plain text format (line i = cell of stop i).

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "tbr/bench.hpp"
#include "tbr/gtfs.hpp"
#include "tbr/serialization.hpp"

using namespace tbr;

namespace {

StopId resolve_stop(const Timetable& tt, const std::string& id) {
  for (StopId s = 0; s < tt.n_stops(); ++s)
    if (tt.stop_external_ids[s] == id) return s;
  try {
    size_t pos = 0;
    unsigned long v = std::stoul(id, &pos);
    if (pos == id.size() && v < tt.n_stops()) return static_cast<StopId>(v);
  } catch (const std::exception&) {
  }
  throw std::runtime_error("unknown stop: " + id);
}

void print_pareto(const Timetable& tt, const ParetoSet& res) {
  if (res.empty()) {
    std::cout << "no journeys\n";
    return;
  }
  for (const Journey& j : res.journeys)
    std::cout << "trips=" << j.trips_used() << " dep=" << format_time(j.departure)
              << " arr=" << format_time(j.arrival)
              << " legs=" << describe_legs(j) << "\n";
  (void)tt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trip-based public transit routing with transfer flags"};
  app.require_subcommand(1);

  unsigned threads = 1;
  uint64_t seed = 1;
  app.add_option("--threads", threads, "worker threads for precomputation")
      ->envname("TBR_THREADS");
  app.add_option("--seed", seed, "default random seed")->envname("TBR_SEED");

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "build a timetable from GTFS");
  std::string gtfs_dir, out_path;
  int start_date = 0, days = 2;
  IngestConfig icfg;
  ingest_cmd->add_option("--gtfs", gtfs_dir, "GTFS directory")->required();
  ingest_cmd->add_option("--start-date", start_date, "YYYYMMDD")->required();
  ingest_cmd->add_option("--days", days, "consecutive days to extract");
  ingest_cmd->add_option("--default-transfer-time", icfg.default_transfer_time,
                         "seconds for transfers without min_transfer_time");
  ingest_cmd->add_option("--min-change-time", icfg.min_change_time,
                         "seconds added to timed transfers");
  ingest_cmd->add_option("--walk-radius", icfg.walk_radius_m,
                         "derive footpaths within this radius (meters)");
  ingest_cmd->add_option("--out", out_path, "timetable artifact")->required();

  // transfers
  auto* transfers_cmd =
      app.add_subcommand("transfers", "precompute the transfer set");
  std::string tt_path, pruning = "reduced";
  transfers_cmd->add_option("--timetable", tt_path)->required();
  transfers_cmd->add_option("--pruning", pruning)
      ->check(CLI::IsMember({"full", "reduced"}));
  transfers_cmd->add_option("--out", out_path)->required();

  // partition
  auto* partition_cmd =
      app.add_subcommand("partition", "partition stops into cells");
  uint32_t k = 0;
  double epsilon = 0.05;
  std::string import_path;
  partition_cmd->add_option("--timetable", tt_path)->required();
  partition_cmd->add_option("--k", k, "number of cells");
  partition_cmd->add_option("--epsilon", epsilon, "imbalance parameter");
  partition_cmd->add_option("--import", import_path,
                            "import an externally computed partition");
  partition_cmd->add_option("--out", out_path)->required();

  // flags
  auto* flags_cmd = app.add_subcommand("flags", "compute transfer flags");
  std::string ts_path, part_path;
  bool no_buffering = false, no_augmentation = false, do_compress = false;
  flags_cmd->add_option("--timetable", tt_path)->required();
  flags_cmd->add_option("--transfers", ts_path)->required();
  flags_cmd->add_option("--partition", part_path)->required();
  flags_cmd->add_flag("--no-buffering", no_buffering,
                      "disable departure time buffering");
  flags_cmd->add_flag("--no-augmentation", no_augmentation,
                      "disable flag augmentation");
  flags_cmd->add_flag("--compress", do_compress,
                      "store a flag pattern dictionary");
  flags_cmd->add_option("--out", out_path)->required();

  // query
  auto* query_cmd = app.add_subcommand("query", "answer one query");
  std::string source_id, target_id, dep_str, flags_path;
  int max_rounds = 16;
  query_cmd->add_option("--timetable", tt_path)->required();
  query_cmd->add_option("--transfers", ts_path)->required();
  query_cmd->add_option("--source", source_id)->required();
  query_cmd->add_option("--target", target_id)->required();
  query_cmd->add_option("--dep", dep_str, "departure time hh:mm:ss")->required();
  query_cmd->add_option("--flags", flags_path, "filter with transfer flags");
  query_cmd->add_option("--partition", part_path,
                        "partition file (required with --flags)");
  query_cmd->add_option("--max-rounds", max_rounds);

  // verify
  auto* verify_cmd =
      app.add_subcommand("verify", "success rates against the exact oracle");
  size_t n_queries = 1000;
  verify_cmd->add_option("--timetable", tt_path)->required();
  verify_cmd->add_option("--transfers", ts_path)->required();
  verify_cmd->add_option("--flags", flags_path)->required();
  verify_cmd->add_option("--partition", part_path)->required();
  verify_cmd->add_option("--queries", n_queries);
  verify_cmd->add_option("--max-rounds", max_rounds);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "timed query workloads");
  std::string algos = "tb";
  size_t warmup = 100;
  bench_cmd->add_option("--timetable", tt_path)->required();
  bench_cmd->add_option("--transfers", ts_path)->required();
  bench_cmd->add_option("--flags", flags_path);
  bench_cmd->add_option("--partition", part_path);
  bench_cmd->add_option("--queries", n_queries);
  bench_cmd->add_option("--algorithms", algos,
                        "comma separated subset of tb,arcflag,oracle");
  bench_cmd->add_option("--warmup", warmup);
  bench_cmd->add_option("--out", out_path, "CSV path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest_cmd) {
      icfg.start_date = start_date;
      icfg.days = days;
      IngestResult result = ingest(gtfs_dir, icfg);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      auto rep = validate_timetable(result.timetable);
      for (const auto& v : rep.violations) std::cerr << "invalid: " << v << "\n";
      if (!rep.ok()) return 1;
      save_timetable(result.timetable, out_path);
      std::cout << "stops=" << result.timetable.n_stops()
                << " lines=" << result.timetable.n_lines()
                << " trips=" << result.timetable.n_trips()
                << " footpaths=" << result.timetable.footpaths.n_edges() << "\n";
    } else if (*transfers_cmd) {
      Timetable tt = load_timetable(tt_path);
      TransferSet ts = generate_transfers(tt,
                                          pruning == "full"
                                              ? TransferPruning::kFull
                                              : TransferPruning::kReduced,
                                          threads);
      save_transfers(ts, out_path);
      std::cout << "transfers=" << ts.size() << "\n";
    } else if (*partition_cmd) {
      Timetable tt = load_timetable(tt_path);
      Partition p;
      if (!import_path.empty()) {
        p = import_partition(import_path, tt);
      } else {
        if (k == 0) throw std::runtime_error("partition: need --k or --import");
        p = partition_timetable(tt, k, epsilon, seed);
      }
      save_partition(p, out_path);
      LayoutGraph g = build_layout_graph(tt);
      std::cout << "k=" << p.k << " cut=" << cut_weight(g, p) << "\n";
    } else if (*flags_cmd) {
      Timetable tt = load_timetable(tt_path);
      TransferSet ts = load_transfers(ts_path);
      Partition p = import_partition(part_path, tt);
      FlagComputeConfig cfg;
      cfg.buffering = !no_buffering;
      cfg.augmentation = !no_augmentation;
      cfg.threads = threads;
      FlagStore flags = compute_flags(tt, ts, p, cfg);
      size_t set_bits = 0;
      for (uint32_t id = 0; id < ts.size(); ++id)
        for (uint32_t c = 0; c < flags.k; ++c) set_bits += flags.get(id, c);
      if (do_compress) flags = compress(flags);
      save_flags(flags, out_path);
      std::cout << "k=" << flags.k << " transfers=" << flags.n_transfers
                << " set_bits=" << set_bits << (do_compress ? " compressed" : "")
                << "\n";
    } else if (*query_cmd) {
      Timetable tt = load_timetable(tt_path);
      TransferSet ts = load_transfers(ts_path);
      StopId source = resolve_stop(tt, source_id);
      StopId target = resolve_stop(tt, target_id);
      Time dep = parse_time(dep_str);
      TransferFilter filter;
      FlagStore flags;
      Partition p;
      if (!flags_path.empty()) {
        if (part_path.empty())
          throw std::runtime_error("query: --flags requires --partition");
        flags = load_flags(flags_path);
        p = import_partition(part_path, tt);
        filter = flags.filter(p.cell_of[target]);
      }
      print_pareto(tt, tb_query(tt, ts, source, target, dep, filter, max_rounds));
    } else if (*verify_cmd) {
      Timetable tt = load_timetable(tt_path);
      TransferSet ts = load_transfers(ts_path);
      FlagStore flags = load_flags(flags_path);
      Partition p = import_partition(part_path, tt);
      auto queries = make_workload(tt, n_queries, seed);
      RateReport rep =
          success_rates(tt, ts, flags, p, queries, max_rounds, threads);
      std::cout << "queries=" << rep.n_queries
                << " query_rate=" << rep.query_rate()
                << " journey_rate=" << rep.journey_rate() << "\n";
      for (const auto& f : rep.failures) {
        std::cout << "failure source=" << tt.stop_external_ids[f.query.source]
                  << " target=" << tt.stop_external_ids[f.query.target]
                  << " dep=" << format_time(f.query.dep) << " expected=";
        for (auto& [a, n] : f.expected)
          std::cout << "(" << format_time(a) << "," << n << ")";
        std::cout << " got=";
        for (auto& [a, n] : f.got)
          std::cout << "(" << format_time(a) << "," << n << ")";
        std::cout << "\n";
      }
    } else if (*bench_cmd) {
      Timetable tt = load_timetable(tt_path);
      TransferSet ts = load_transfers(ts_path);
      FlagStore flags;
      Partition p;
      BenchArtifacts art;
      art.timetable = &tt;
      art.transfers = &ts;
      if (!flags_path.empty()) {
        flags = load_flags(flags_path);
        p = import_partition(part_path, tt);
        art.flags = &flags;
        art.partition = &p;
      }
      std::vector<BenchAlgo> list;
      std::stringstream ss(algos);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (item == "tb")
          list.push_back(BenchAlgo::kTb);
        else if (item == "arcflag")
          list.push_back(BenchAlgo::kArcflag);
        else if (item == "oracle")
          list.push_back(BenchAlgo::kOracle);
        else
          throw std::runtime_error("unknown algorithm: " + item);
      }
      auto workload = make_workload(tt, n_queries, seed);
      BenchOptions opts;
      opts.warmup = warmup;
      opts.max_rounds = max_rounds;
      if (out_path.empty()) {
        run_bench(art, workload, list, std::cout, opts);
      } else {
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot write " + out_path);
        run_bench(art, workload, list, f, opts);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
