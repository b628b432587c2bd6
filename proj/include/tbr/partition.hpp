#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "tbr/rng.hpp"
#include "tbr/timetable.hpp"

/*
 * Stop partitioning. The layout graph captures the network topology without
 * its time dependency: stops are nodes and the weight of an undirected edge
 * counts the connections between the two stops (consecutive-stop trip
 * segments in either direction plus directed footpaths).
 *
 * The built-in partitioner is a small deterministic multilevel scheme:
 * size-constrained label-propagation clustering for coarsening, greedy graph
 * growing for the initial partition, and greedy boundary refinement during
 * uncoarsening that only ever applies strictly improving moves.
 */

namespace tbr {

struct LayoutGraph {
  struct Edge {
    uint32_t u, v;   // u < v
    uint64_t weight;
  };
  size_t n = 0;
  std::vector<Edge> edges;
  std::vector<std::vector<std::pair<uint32_t, uint64_t>>> adj;

  void build_adjacency() {
    adj.assign(n, {});
    for (const Edge& e : edges) {
      adj[e.u].emplace_back(e.v, e.weight);
      adj[e.v].emplace_back(e.u, e.weight);
    }
  }
};

inline LayoutGraph build_layout_graph(const Timetable& tt) {
  std::map<std::pair<uint32_t, uint32_t>, uint64_t> weights;
  auto bump = [&](StopId a, StopId b) {
    if (a == b) return;
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    weights[key] += 1;
  };
  for (TripId t = 0; t < tt.n_trips(); ++t)
    for (uint32_t i = 0; i + 1 < tt.trip_length(t); ++i)
      bump(tt.stop_of(t, i), tt.stop_of(t, i + 1));
  for (StopId p = 0; p < tt.n_stops(); ++p)
    for (const auto& e : tt.footpaths.out[p]) bump(p, e.to);

  LayoutGraph g;
  g.n = tt.n_stops();
  for (const auto& [key, w] : weights) g.edges.push_back({key.first, key.second, w});
  g.build_adjacency();
  return g;
}

struct Partition {
  std::vector<uint32_t> cell_of;
  uint32_t k = 1;
  double epsilon = 0.05;

  size_t max_cell_size() const {
    return static_cast<size_t>(
        std::floor((1.0 + epsilon) *
                   std::ceil(static_cast<double>(cell_of.size()) / k)));
  }
};

inline uint64_t cut_weight(const LayoutGraph& g, const Partition& p) {
  uint64_t cut = 0;
  for (const auto& e : g.edges)
    if (p.cell_of[e.u] != p.cell_of[e.v]) cut += e.weight;
  return cut;
}

namespace detail {

struct CoarseGraph {
  size_t n = 0;
  std::vector<uint32_t> node_size;                            // original stops
  std::vector<std::vector<std::pair<uint32_t, uint64_t>>> adj;
  std::vector<uint32_t> parent;  // finer node -> coarse node
};

inline CoarseGraph from_layout(const LayoutGraph& g) {
  CoarseGraph c;
  c.n = g.n;
  c.node_size.assign(g.n, 1);
  c.adj = g.adj;
  return c;
}

// One coarsening step: size-constrained label propagation, then contraction.
inline CoarseGraph coarsen(const CoarseGraph& g, size_t size_cap, Rng& rng) {
  std::vector<uint32_t> cluster(g.n);
  std::iota(cluster.begin(), cluster.end(), 0);
  std::vector<uint64_t> cluster_size(g.n);
  for (size_t v = 0; v < g.n; ++v) cluster_size[v] = g.node_size[v];

  std::vector<uint32_t> order(g.n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  std::vector<uint64_t> gain;
  std::vector<uint32_t> seen;
  for (int pass = 0; pass < 3; ++pass) {
    bool moved = false;
    gain.assign(g.n, 0);
    for (uint32_t v : order) {
      seen.clear();
      for (const auto& [u, w] : g.adj[v]) {
        uint32_t c = cluster[u];
        if (gain[c] == 0) seen.push_back(c);
        gain[c] += w;
      }
      uint32_t best = cluster[v];
      uint64_t best_gain = gain[cluster[v]];
      for (uint32_t c : seen)
        if (c != cluster[v] &&
            cluster_size[c] + g.node_size[v] <= size_cap &&
            (gain[c] > best_gain ||
             (gain[c] == best_gain && c < best)) &&
            gain[c] > 0) {
          best = c;
          best_gain = gain[c];
        }
      for (uint32_t c : seen) gain[c] = 0;
      gain[cluster[v]] = 0;
      if (best != cluster[v]) {
        cluster_size[cluster[v]] -= g.node_size[v];
        cluster_size[best] += g.node_size[v];
        cluster[v] = best;
        moved = true;
      }
    }
    if (!moved) break;
  }

  // Contract: dense-relabel the used clusters.
  std::vector<uint32_t> remap(g.n, kNone32);
  uint32_t next = 0;
  for (size_t v = 0; v < g.n; ++v)
    if (remap[cluster[v]] == kNone32) remap[cluster[v]] = next++;

  CoarseGraph c;
  c.n = next;
  c.node_size.assign(next, 0);
  c.parent.resize(g.n);
  for (size_t v = 0; v < g.n; ++v) {
    c.parent[v] = remap[cluster[v]];
    c.node_size[c.parent[v]] += g.node_size[v];
  }
  std::map<std::pair<uint32_t, uint32_t>, uint64_t> agg;
  for (size_t v = 0; v < g.n; ++v)
    for (const auto& [u, w] : g.adj[v]) {
      uint32_t cu = c.parent[v], cv = c.parent[u];
      if (cu < cv) agg[{cu, cv}] += w;  // each undirected edge visited twice
    }
  c.adj.assign(next, {});
  for (const auto& [key, w] : agg) {
    c.adj[key.first].emplace_back(key.second, w);
    c.adj[key.second].emplace_back(key.first, w);
  }
  return c;
}

// Greedy graph growing; falls back to first-fit so that every node is
// always placed. Requires node sizes <= cap for a guaranteed placement,
// which holds for singleton nodes since k * cap >= n.
inline bool initial_partition(const CoarseGraph& g, uint32_t k, size_t cap,
                              Rng& rng, std::vector<uint32_t>& cell_of) {
  cell_of.assign(g.n, kNone32);
  std::vector<uint64_t> cell_size(k, 0);
  size_t assigned = 0;

  std::vector<uint32_t> seeds(g.n);
  std::iota(seeds.begin(), seeds.end(), 0);
  rng.shuffle(seeds);

  size_t seed_cursor = 0;
  std::vector<uint64_t> gain(g.n, 0);
  for (uint32_t c = 0; c < k; ++c) {
    while (seed_cursor < seeds.size() && cell_of[seeds[seed_cursor]] != kNone32)
      ++seed_cursor;
    if (seed_cursor >= seeds.size()) return false;  // fewer nodes than cells
    uint32_t seed = seeds[seed_cursor];
    if (g.node_size[seed] > cap) return false;
    cell_of[seed] = c;
    cell_size[c] += g.node_size[seed];
    ++assigned;

    // Grow towards a fair share of the remaining mass.
    uint64_t total = 0;
    for (size_t v = 0; v < g.n; ++v) total += g.node_size[v];
    uint64_t target = (total + k - 1) / k;
    std::vector<uint32_t> frontier{seed};
    while (cell_size[c] < target) {
      uint32_t best = kNone32;
      uint64_t best_gain = 0;
      for (uint32_t u : frontier)
        for (const auto& [v, w] : g.adj[u]) {
          if (cell_of[v] != kNone32) continue;
          if (cell_size[c] + g.node_size[v] > cap) continue;
          gain[v] += w;
          if (gain[v] > best_gain || (gain[v] == best_gain && v < best)) {
            best = v;
            best_gain = gain[v];
          }
        }
      for (uint32_t u : frontier)
        for (const auto& [v, w] : g.adj[u]) gain[v] = 0;
      if (best == kNone32) break;
      cell_of[best] = c;
      cell_size[c] += g.node_size[best];
      frontier.push_back(best);
      ++assigned;
    }
  }

  // Place leftovers: best adjacency gain first, then any cell with room.
  for (size_t v = 0; v < g.n; ++v) {
    if (cell_of[v] != kNone32) continue;
    uint32_t best = kNone32;
    uint64_t best_gain = 0;
    std::vector<uint64_t> cg(k, 0);
    for (const auto& [u, w] : g.adj[v])
      if (cell_of[u] != kNone32) cg[cell_of[u]] += w;
    for (uint32_t c = 0; c < k; ++c)
      if (cell_size[c] + g.node_size[v] <= cap && (best == kNone32 || cg[c] > best_gain)) {
        best = c;
        best_gain = cg[c];
      }
    if (best == kNone32) return false;
    cell_of[v] = best;
    cell_size[best] += g.node_size[v];
    ++assigned;
  }
  return assigned == g.n;
}

// Greedy boundary refinement: applies only strictly improving moves that
// keep every cell within the cap and nonempty, so the cut is monotone
// non-increasing.
inline void refine(const CoarseGraph& g, uint32_t k, size_t cap,
                   std::vector<uint32_t>& cell_of, int max_passes) {
  std::vector<uint64_t> cell_size(k, 0);
  std::vector<uint32_t> cell_count(k, 0);
  for (size_t v = 0; v < g.n; ++v) {
    cell_size[cell_of[v]] += g.node_size[v];
    cell_count[cell_of[v]] += 1;
  }
  std::vector<uint64_t> gain(k);
  for (int pass = 0; pass < max_passes; ++pass) {
    bool moved = false;
    for (size_t v = 0; v < g.n; ++v) {
      uint32_t own = cell_of[v];
      if (cell_count[own] <= 1) continue;
      std::fill(gain.begin(), gain.end(), 0);
      bool boundary = false;
      for (const auto& [u, w] : g.adj[v]) {
        gain[cell_of[u]] += w;
        if (cell_of[u] != own) boundary = true;
      }
      if (!boundary) continue;
      uint32_t best = own;
      for (uint32_t c = 0; c < k; ++c) {
        if (c == own || gain[c] <= gain[best] ) continue;
        if (cell_size[c] + g.node_size[v] > cap) continue;
        best = c;
      }
      if (best != own && gain[best] > gain[own]) {
        cell_size[own] -= g.node_size[v];
        cell_count[own] -= 1;
        cell_size[best] += g.node_size[v];
        cell_count[best] += 1;
        cell_of[v] = best;
        moved = true;
      }
    }
    if (!moved) break;
  }
}

}  // namespace detail

struct PartitionOptions {
  int refine_passes = 12;
  size_t coarsen_stop = 64;  // stop coarsening below max(this, 3k) nodes
  int restarts = 8;          // multilevel runs; lowest cut wins
};

namespace detail {

inline std::vector<uint32_t> multilevel_once(const LayoutGraph& g, uint32_t k,
                                             size_t cap, Rng& rng,
                                             const PartitionOptions& opts) {
  // Coarsening hierarchy. Cluster sizes stay well under the cell cap so the
  // initial partition has room to balance.
  std::vector<CoarseGraph> levels;
  levels.push_back(from_layout(g));
  size_t stop_at = std::max<size_t>(opts.coarsen_stop, 3ull * k);
  size_t cluster_cap = std::max<size_t>(1, cap / 4);
  while (levels.back().n > stop_at) {
    CoarseGraph next = coarsen(levels.back(), cluster_cap, rng);
    if (next.n >= levels.back().n * 95 / 100) break;  // stalled
    CoarseGraph* prev = &levels.back();
    prev->parent = next.parent;  // keep the projection at the finer level
    next.parent.clear();
    levels.push_back(std::move(next));
  }

  std::vector<uint32_t> cells;
  if (!initial_partition(levels.back(), k, cap, rng, cells)) {
    // Coarse placement can fail with lumpy node sizes; the flat graph with
    // unit sizes always places.
    CoarseGraph flat = from_layout(g);
    if (!initial_partition(flat, k, cap, rng, cells))
      throw std::logic_error("partition: unable to place nodes within balance");
    refine(flat, k, cap, cells, opts.refine_passes);
    return cells;
  }

  for (size_t level = levels.size(); level-- > 0;) {
    refine(levels[level], k, cap, cells, opts.refine_passes);
    if (level > 0) {
      std::vector<uint32_t> finer(levels[level - 1].n);
      for (size_t v = 0; v < finer.size(); ++v)
        finer[v] = cells[levels[level - 1].parent[v]];
      cells = std::move(finer);
    }
  }
  return cells;
}

}  // namespace detail

inline Partition partition_graph(const LayoutGraph& g, uint32_t k,
                                 double epsilon, uint64_t seed,
                                 const PartitionOptions& opts = {}) {
  if (k < 1) throw std::invalid_argument("partition: k must be >= 1");
  if (k > g.n)
    throw std::invalid_argument("partition: k exceeds number of stops");
  Partition p;
  p.k = k;
  p.epsilon = epsilon;
  p.cell_of.assign(g.n, 0);
  if (k == 1) return p;
  if (k == g.n) {
    std::iota(p.cell_of.begin(), p.cell_of.end(), 0);
    return p;
  }

  size_t cap = p.max_cell_size();
  uint64_t best_cut = ~0ull;
  for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
    Rng rng(seed * 0x9e3779b97f4a7c15ull + k * 1315423911ull + restart);
    std::vector<uint32_t> cells = detail::multilevel_once(g, k, cap, rng, opts);
    Partition cand;
    cand.k = k;
    cand.epsilon = epsilon;
    cand.cell_of = std::move(cells);
    uint64_t cut = cut_weight(g, cand);
    if (cut < best_cut) {
      best_cut = cut;
      p.cell_of = std::move(cand.cell_of);
    }
  }
  return p;
}

inline Partition partition_timetable(const Timetable& tt, uint32_t k,
                                     double epsilon, uint64_t seed,
                                     const PartitionOptions& opts = {}) {
  LayoutGraph g = build_layout_graph(tt);
  return partition_graph(g, k, epsilon, seed, opts);
}

// Plain text format: line i holds the 0-based cell of stop i.
inline void save_partition(const Partition& p, std::ostream& out) {
  for (uint32_t c : p.cell_of) out << c << '\n';
}

inline void save_partition(const Partition& p, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  save_partition(p, f);
}

inline Partition import_partition(std::istream& in, size_t n_stops) {
  Partition p;
  p.epsilon = 0;
  std::string linebuf;
  while (std::getline(in, linebuf)) {
    if (!linebuf.empty() && linebuf.back() == '\r') linebuf.pop_back();
    if (linebuf.empty()) continue;
    size_t pos = 0;
    long v;
    try {
      v = std::stol(linebuf, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error("partition file: non-integer line '" + linebuf + "'");
    }
    if (pos != linebuf.size() || v < 0)
      throw std::runtime_error("partition file: non-integer line '" + linebuf + "'");
    p.cell_of.push_back(static_cast<uint32_t>(v));
  }
  if (p.cell_of.size() != n_stops)
    throw std::runtime_error(
        "partition file: " + std::to_string(p.cell_of.size()) +
        " lines for " + std::to_string(n_stops) + " stops");
  uint32_t mx = 0;
  for (uint32_t c : p.cell_of) mx = std::max(mx, c);
  p.k = mx + 1;
  return p;
}

inline Partition import_partition(const std::string& path, const Timetable& tt) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return import_partition(f, tt.n_stops());
}

}  // namespace tbr
