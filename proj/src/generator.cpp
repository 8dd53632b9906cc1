#include "tmotif/generator.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace tmotif {

namespace {

constexpr int kRetryBudget = 1000;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t uniform(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

bool event_order(const EdgeEvent& a, const EdgeEvent& b) {
  if (a.t != b.t) return a.t < b.t;
  if (a.op != b.op) return a.op == Op::Add;
  auto pa = pair_of(a), pb = pair_of(b);
  if (pa.lo != pb.lo) return pa.lo < pb.lo;
  return pa.hi < pb.hi;
}

EdgeEvent oriented(Rng& rng, NodeId a, NodeId b, Timestamp t) {
  if (uniform(rng, 0, 1)) std::swap(a, b);
  return {a, b, t, Op::Add};
}

/// l distinct sorted timestamps in [0, T-1] with span <= W.
std::vector<Timestamp> window_times(Rng& rng, std::size_t l, Timestamp t_span, Timestamp window) {
  if (l > t_span) throw GenerationError("time span too short for the motif's edge count");
  if (l > window + 1) throw GenerationError("window too short for the motif's edge count");
  for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
    std::vector<Timestamp> pool(t_span);
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<Timestamp> out;
    std::sample(pool.begin(), pool.end(), std::back_inserter(out), l, rng);
    std::sort(out.begin(), out.end());
    if (out.back() - out.front() <= window) return out;
  }
  throw GenerationError("no timestamp draw fits the window");
}

std::vector<NodeId> random_injection(Rng& rng, std::size_t k, std::size_t n) {
  std::vector<NodeId> nodes(n);
  std::iota(nodes.begin(), nodes.end(), 0);
  std::shuffle(nodes.begin(), nodes.end(), rng);
  nodes.resize(k);
  return nodes;
}

TaskInstance base_instance(TaskKind task, const std::string& motif, const GenParams& params) {
  TaskInstance inst;
  inst.task = task;
  inst.motif = motif;
  inst.gen = params;
  inst.id = to_string(task) + (motif.empty() ? "" : "-" + motif) + "-" + std::to_string(params.seed);
  return inst;
}

std::vector<EdgeEvent> positive_events(Rng& rng, const MotifPattern& m, const GenParams& params) {
  auto times = window_times(rng, m.l(), params.t_span, params.window);
  auto map = random_injection(rng, m.k(), std::max<std::size_t>(params.n, m.k()));
  std::vector<EdgeEvent> ev;
  for (int i = 0; i < m.l(); ++i) ev.push_back(oriented(rng, map[m.edges()[i].a], map[m.edges()[i].b], times[i]));
  return ev;
}

using Restore = std::vector<std::pair<std::size_t, EdgeEvent>>;

std::optional<Restore> structural_violation(Rng& rng, std::vector<EdgeEvent>& ev, const MotifPattern& m) {
  std::set<NodePair> pairs;
  std::set<NodeId> nodes;
  for (const auto& e : ev) {
    pairs.insert(pair_of(e));
    nodes.insert(e.u);
    nodes.insert(e.v);
  }
  const NodeId fresh = *nodes.rbegin() + 1;
  std::vector<std::pair<std::size_t, int>> moves;
  for (std::size_t i = 0; i < ev.size(); ++i)
    for (int side = 0; side < 2; ++side) moves.emplace_back(i, side);
  std::shuffle(moves.begin(), moves.end(), rng);
  for (bool allow_fresh : {false, true}) {
    for (auto [i, side] : moves) {
      std::vector<NodeId> targets(nodes.begin(), nodes.end());
      if (allow_fresh) targets = {fresh};
      std::shuffle(targets.begin(), targets.end(), rng);
      for (NodeId x : targets) {
        EdgeEvent e = ev[i];
        NodeId keep = side == 0 ? e.v : e.u;
        if (x == keep) continue;
        (side == 0 ? e.u : e.v) = x;
        if (pairs.count(pair_of(e))) continue;
        auto trial = ev;
        trial[i] = e;
        if (classify_exact(DynamicGraph(trial), m)) continue;
        Restore r{{i, ev[i]}};
        ev = std::move(trial);
        return r;
      }
    }
  }
  return std::nullopt;
}

std::optional<Restore> temporal_violation(Rng& rng, std::vector<EdgeEvent>& ev, const MotifPattern& m) {
  std::vector<std::pair<std::size_t, std::size_t>> swaps;
  for (std::size_t i = 0; i < ev.size(); ++i)
    for (std::size_t j = i + 1; j < ev.size(); ++j) swaps.emplace_back(i, j);
  std::shuffle(swaps.begin(), swaps.end(), rng);
  for (auto [i, j] : swaps) {
    auto trial = ev;
    std::swap(trial[i].t, trial[j].t);
    if (classify_exact(DynamicGraph(trial), m)) continue;
    Restore r{{i, ev[i]}, {j, ev[j]}};
    ev = std::move(trial);
    return r;
  }
  // Every order is automorphic: break strict increase with a tie.
  for (auto [i, j] : swaps) {
    auto trial = ev;
    trial[j].t = trial[i].t;
    if (classify_exact(DynamicGraph(trial), m)) continue;
    Restore r{{j, ev[j]}};
    ev = std::move(trial);
    return r;
  }
  return std::nullopt;
}

std::optional<Restore> duration_violation(std::vector<EdgeEvent>& ev, const MotifPattern& m, Timestamp window) {
  auto last = std::max_element(ev.begin(), ev.end(), [](auto& a, auto& b) { return a.t < b.t; });
  auto first = std::min_element(ev.begin(), ev.end(), [](auto& a, auto& b) { return a.t < b.t; });
  std::size_t i = last - ev.begin();
  auto trial = ev;
  trial[i].t = first->t + window + 1;
  if (classify_exact(DynamicGraph(trial), m)) return std::nullopt;
  Restore r{{i, ev[i]}};
  ev = std::move(trial);
  return r;
}

/// Stable time sort; restore indices follow their events.
void sort_with_restore(std::vector<EdgeEvent>& ev, Restore& restore) {
  std::vector<std::size_t> perm(ev.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return ev[a].t < ev[b].t; });
  std::vector<std::size_t> where(ev.size());
  std::vector<EdgeEvent> out;
  for (std::size_t k = 0; k < perm.size(); ++k) {
    where[perm[k]] = k;
    out.push_back(ev[perm[k]]);
  }
  for (auto& [idx, e] : restore) idx = where[idx];
  std::sort(restore.begin(), restore.end(), [](auto& a, auto& b) { return a.first < b.first; });
  ev = std::move(out);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(splitmix64(base) ^ index);
}

DynamicGraph gen_dynamic_graph(const GenParams& params) {
  params.validate();
  Rng rng(params.seed);
  std::vector<NodePair> pairs;
  for (NodeId i = 0; i < params.n; ++i)
    for (NodeId j = i + 1; j < params.n; ++j) pairs.push_back({i, j});
  std::vector<NodePair> chosen;
  if (params.m) {
    std::sample(pairs.begin(), pairs.end(), std::back_inserter(chosen), *params.m, rng);
  } else {
    std::bernoulli_distribution coin(params.p);
    for (const auto& pr : pairs)
      if (coin(rng)) chosen.push_back(pr);
  }
  std::bernoulli_distribution del(params.del_prob);
  std::vector<EdgeEvent> ev;
  for (const auto& pr : chosen) {
    Timestamp t = uniform(rng, 0, params.t_span - 1);
    ev.push_back({pr.lo, pr.hi, t, Op::Add});
    if (del(rng)) ev.push_back({pr.lo, pr.hi, uniform(rng, t + 1, params.t_span), Op::Delete});
  }
  std::sort(ev.begin(), ev.end(), event_order);
  return DynamicGraph(std::move(ev));
}

TaskInstance gen_classification_instance(const std::string& motif, const GenParams& params, bool positive,
                                         std::optional<Violation> violation) {
  params.validate();
  if (positive && violation) throw std::invalid_argument("positive instances carry no violation");
  if (!positive && !violation) throw std::invalid_argument("negative instances need a violation tag");
  auto m = catalog_motif(motif, params.window);
  if (params.n < static_cast<std::size_t>(m.k())) throw GenerationError("node count below the motif's k");
  Rng rng(params.seed);
  auto inst = base_instance(TaskKind::Classification, motif, params);
  inst.motifs = {m};
  inst.violation = violation;
  for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
    auto ev = positive_events(rng, m, params);
    if (!classify_exact(DynamicGraph(ev), m)) continue;
    Restore restore;
    if (!positive) {
      std::optional<Restore> r;
      switch (*violation) {
        case Violation::Structural: r = structural_violation(rng, ev, m); break;
        case Violation::Temporal: r = temporal_violation(rng, ev, m); break;
        case Violation::Duration: r = duration_violation(ev, m, params.window); break;
      }
      if (!r) continue;
      restore = std::move(*r);
    }
    sort_with_restore(ev, restore);
    inst.graph = DynamicGraph(std::move(ev));
    if (classify_exact(inst.graph, m) != positive) continue;
    inst.ground_truth["label"] = positive;
    inst.restore = std::move(restore);
    return inst;
  }
  throw GenerationError("classification generation exhausted its retry budget for " + motif);
}

TaskInstance gen_detection_instance(const std::string& motif, const GenParams& params) {
  auto inst = base_instance(TaskKind::Detection, motif, params);
  inst.motifs = {catalog_motif(motif, params.window)};
  inst.graph = gen_dynamic_graph(params);
  inst.ground_truth["label"] = detect(inst.graph, inst.motifs[0]);
  return inst;
}

TaskInstance gen_construction_instance(const std::string& motif, const GenParams& params) {
  params.validate();
  auto m = catalog_motif(motif, params.window);
  if (params.n < static_cast<std::size_t>(m.k())) throw GenerationError("node count below the motif's k");
  auto inst = base_instance(TaskKind::Construction, motif, params);
  inst.motifs = {m};
  Rng rng(params.seed);
  for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
    GenParams bg = params;
    bg.seed = derive_seed(params.seed, attempt);
    auto times = window_times(rng, m.l(), params.t_span, params.window);
    auto map = random_injection(rng, m.k(), params.n);
    std::set<NodePair> implanted;
    for (const auto& pe : m.edges()) implanted.insert(NodePair::of(map[pe.a], map[pe.b]));
    const auto background = gen_dynamic_graph(bg);
    std::vector<EdgeEvent> ev;
    for (const auto& e : background.events())
      if (!implanted.count(pair_of(e))) ev.push_back(e);
    for (int i = 0; i + 1 < m.l(); ++i) ev.push_back(oriented(rng, map[m.edges()[i].a], map[m.edges()[i].b], times[i]));
    std::sort(ev.begin(), ev.end(), event_order);
    DynamicGraph g(std::move(ev));
    if (detect(g, m)) continue;
    auto c = construct_completion(g, m);
    if (!c || c->t > params.t_span - 1) continue;
    if (!detect(g.with_event(*c), m)) continue;
    inst.graph = std::move(g);
    inst.ground_truth["completion"] = events_to_json({*c});
    return inst;
  }
  throw GenerationError("construction generation exhausted its retry budget for " + motif);
}

TaskInstance gen_level2_instance(TaskKind task, const GenParams& params) {
  if (!is_level2(task)) throw std::invalid_argument(to_string(task) + " is not a multi-motif task");
  auto inst = base_instance(task, "all", params);
  inst.motifs = MotifCatalog::with_windows(settings::level2_windows()).motifs();
  inst.graph = gen_dynamic_graph(params);
  inst.ground_truth = compute_ground_truth(inst);
  return inst;
}

TaskInstance gen_level0_instance(TaskKind task, const GenParams& params) {
  if (!is_level0(task)) throw std::invalid_argument(to_string(task) + " is not a Level-0 task");
  auto inst = base_instance(task, "", params);
  Rng rng(params.seed);
  for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
    GenParams gp = params;
    gp.seed = derive_seed(params.seed, attempt);
    auto g = gen_dynamic_graph(gp);
    if (task == TaskKind::SortEdge) {
      auto ev = g.events();
      std::shuffle(ev.begin(), ev.end(), rng);
      g = DynamicGraph(std::move(ev));
    } else if (task == TaskKind::WhenLink) {
      std::vector<NodePair> both;
      std::set<NodePair> dels;
      for (const auto& e : g.events())
        if (e.op == Op::Delete) dels.insert(pair_of(e));
      for (const auto& pr : dels)
        if (g.adds_on(pr)) both.push_back(pr);
      if (both.empty()) continue;
      auto pr = both[uniform(rng, 0, both.size() - 1)];
      inst.query["u"] = pr.lo;
      inst.query["v"] = pr.hi;
    } else if (task == TaskKind::WhatEdges) {
      inst.query["t"] = uniform(rng, 0, params.t_span);
    }
    inst.graph = std::move(g);
    inst.ground_truth = compute_ground_truth(inst);
    return inst;
  }
  throw GenerationError("no graph with a deleted edge within the retry budget");
}

GenParams default_params(TaskKind task, const std::string& motif, std::uint64_t seed) {
  GenParams p;
  p.seed = seed;
  p.p = settings::kEdgeProb;
  p.del_prob = settings::kDefaultDeleteProb;
  if (task == TaskKind::Classification) {
    auto r = settings::classification(motif);
    p.n = r.n;
    p.m = r.m;
    p.t_span = r.t;
    p.window = r.w;
    p.del_prob = 0.0;
  } else if (task == TaskKind::Detection || task == TaskKind::Construction) {
    auto r = task == TaskKind::Detection ? settings::detection(motif) : settings::construction(motif);
    p.n = r.n;
    p.t_span = r.t;
    p.window = r.w;
  } else if (is_level2(task)) {
    p.n = settings::kLevel2.n;
    p.t_span = settings::kLevel2.t;
    p.window = settings::kLevel2.t;
  } else {
    p.n = settings::kLevel0.n;
    p.t_span = settings::kLevel0.t;
    p.window = settings::kLevel0.t;
  }
  return p;
}

std::vector<TaskInstance> generate_batch(const BatchRequest& req) {
  req.params.validate();
  const std::size_t positives = req.count - req.count / 2;
  std::vector<TaskInstance> out(req.count);
  std::exception_ptr error;
  const long long n = static_cast<long long>(req.count);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < n; ++i) {
    try {
      GenParams p = req.params;
      p.seed = derive_seed(req.params.seed, static_cast<std::uint64_t>(i));
      const auto idx = static_cast<std::size_t>(i);
      TaskInstance inst;
      switch (req.task) {
        case TaskKind::Classification: {
          bool pos = idx < positives;
          std::optional<Violation> v;
          if (!pos) v = static_cast<Violation>((idx - positives) % 3);
          inst = gen_classification_instance(req.motif, p, pos, v);
          break;
        }
        case TaskKind::Detection: inst = gen_detection_instance(req.motif, p); break;
        case TaskKind::Construction: inst = gen_construction_instance(req.motif, p); break;
        default:
          inst = is_level2(req.task) ? gen_level2_instance(req.task, p) : gen_level0_instance(req.task, p);
      }
      char buf[16];
      std::snprintf(buf, sizeof buf, "%04zu", idx);
      inst.id = to_string(req.task) + (req.motif.empty() || is_level0(req.task) || is_level2(req.task)
                                           ? ""
                                           : "-" + req.motif) +
                "-" + buf;
      out[idx] = std::move(inst);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<SweepRow> parameter_sweep(const std::string& motif, const SweepGrid& grid, bool parallel) {
  auto base = catalog_motif(motif, 0);
  struct Cell {
    std::size_t ni, ti, seed;
  };
  std::vector<Cell> cells;
  for (std::size_t ni = 0; ni < grid.n.size(); ++ni)
    for (std::size_t ti = 0; ti < grid.t.size(); ++ti)
      for (std::size_t s = 0; s < grid.seeds; ++s) cells.push_back({ni, ti, s});
  // counts[cell][w]
  std::vector<std::vector<std::size_t>> counts(cells.size(), std::vector<std::size_t>(grid.w.size()));
  auto run = [&](std::size_t c) {
    GenParams p;
    p.n = grid.n[cells[c].ni];
    p.t_span = grid.t[cells[c].ti];
    p.p = grid.p;
    p.del_prob = grid.del_prob;
    p.seed = grid.base_seed + cells[c].seed;
    auto g = gen_dynamic_graph(p);
    for (std::size_t wi = 0; wi < grid.w.size(); ++wi) counts[c][wi] = count_serial(g, base.with_delta(grid.w[wi]));
  };
  const long long nc = static_cast<long long>(cells.size());
  if (parallel) {
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (long long c = 0; c < nc; ++c) {
      try {
        run(static_cast<std::size_t>(c));
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (long long c = 0; c < nc; ++c) run(static_cast<std::size_t>(c));
  }
  std::vector<SweepRow> rows;
  for (std::size_t ni = 0; ni < grid.n.size(); ++ni)
    for (std::size_t ti = 0; ti < grid.t.size(); ++ti)
      for (std::size_t wi = 0; wi < grid.w.size(); ++wi) {
        double sum = 0;
        for (std::size_t c = 0; c < cells.size(); ++c)
          if (cells[c].ni == ni && cells[c].ti == ti) sum += static_cast<double>(counts[c][wi]);
        rows.push_back({grid.n[ni], grid.t[ti], grid.w[wi], grid.seeds ? sum / grid.seeds : 0.0});
      }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "N,T,W,mean_count\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.4f", r.mean_count);
    out << r.n << ',' << r.t << ',' << r.w << ',' << buf << '\n';
  }
  return out.str();
}

std::vector<TemporalEdge> read_edge_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge file '" + path + "'");
  std::vector<TemporalEdge> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    TemporalEdge e{};
    if (!(ls >> e.u)) continue;
    std::string rest;
    if (!(ls >> e.v >> e.t) || (ls >> rest))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 'u v t'");
    out.push_back(e);
  }
  if (out.empty()) throw std::runtime_error("edge file '" + path + "' has no edges");
  return out;
}

EgoSample ego_sample(const std::vector<TemporalEdge>& edges, const EgoOptions& opts) {
  std::map<NodeId, std::set<NodeId>> adj;
  for (const auto& e : edges) {
    if (e.u == e.v) continue;
    adj[e.u].insert(e.v);
    adj[e.v].insert(e.u);
  }
  if (adj.empty()) throw std::runtime_error("input graph has no usable edges");
  if (opts.node_cap == 0) throw std::invalid_argument("node cap must be positive");
  NodeId center;
  if (opts.center) {
    if (!adj.count(*opts.center)) throw std::invalid_argument("center node " + std::to_string(*opts.center) + " not in graph");
    center = *opts.center;
  } else {
    Rng rng(opts.seed);
    auto it = adj.begin();
    std::advance(it, uniform(rng, 0, adj.size() - 1));
    center = it->first;
  }

  std::vector<NodeId> order{center};
  std::map<NodeId, std::size_t> label{{center, 0}};
  std::queue<std::pair<NodeId, std::size_t>> frontier;
  frontier.push({center, 0});
  while (!frontier.empty() && order.size() < opts.node_cap) {
    auto [x, d] = frontier.front();
    frontier.pop();
    if (d >= opts.hops) continue;
    for (NodeId y : adj[x]) {
      if (label.count(y)) continue;
      label[y] = order.size();
      order.push_back(y);
      frontier.push({y, d + 1});
      if (order.size() >= opts.node_cap) break;
    }
  }

  std::vector<EdgeEvent> ev;
  Timestamp t_min = 0;
  bool any = false;
  for (const auto& e : edges) {
    if (e.u == e.v || !label.count(e.u) || !label.count(e.v)) continue;
    t_min = any ? std::min(t_min, e.t) : e.t;
    any = true;
    ev.push_back({label[e.u], label[e.v], e.t, Op::Add});
  }
  for (auto& e : ev) e.t -= t_min;
  std::stable_sort(ev.begin(), ev.end(), event_order);
  return {DynamicGraph(std::move(ev)), order, t_min};
}

}  // namespace tmotif
