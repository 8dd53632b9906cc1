#include "tmotif/motif.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include <omp.h>

namespace tmotif {

namespace {

constexpr NodeId kUnbound = std::numeric_limits<NodeId>::max();

Timestamp saturating_add(Timestamp a, Timestamp b) {
  return a > std::numeric_limits<Timestamp>::max() - b ? std::numeric_limits<Timestamp>::max() : a + b;
}

struct CatalogEntry {
  const char* name;
  std::vector<PatternEdge> edges;
};

const std::vector<CatalogEntry>& catalog_table() {
  // Temporal rank = position in the list.
  static const std::vector<CatalogEntry> table = {
      {"3-star", {{0, 1}, {0, 2}, {0, 3}}},
      {"triangle", {{0, 1}, {1, 2}, {2, 0}}},
      {"4-path", {{0, 1}, {1, 2}, {2, 3}}},
      {"4-cycle", {{0, 1}, {1, 2}, {2, 3}, {3, 0}}},
      {"4-chordalcycle", {{0, 1}, {1, 2}, {2, 3}, {3, 1}, {3, 0}}},
      {"4-tailedtriangle", {{0, 1}, {1, 2}, {2, 3}, {3, 1}}},
      {"4-clique", {{0, 1}, {1, 2}, {2, 3}, {3, 1}, {3, 0}, {0, 2}}},
      {"bitriangle", {{0, 1}, {1, 3}, {3, 5}, {5, 4}, {4, 2}, {2, 0}}},
      {"butterfly", {{0, 1}, {1, 2}, {0, 3}, {2, 3}}},
  };
  return table;
}

// Pattern view that tolerates unused symbols; construct_completion matches prefixes with it.
struct RawPattern {
  int k = 0;
  std::vector<PatternEdge> edges;
  Timestamp delta = 0;

  static RawPattern of(const MotifPattern& m) { return {m.k(), m.edges(), m.delta()}; }
};

/// Backtracking search: rank-0 event fixes the first two symbols, every later
/// rank extends through static adjacency and picks an Add event on the mapped
/// pair inside (previous t, t_first + delta].
class Matcher {
 public:
  using Visitor = std::function<bool(const MotifInstance&)>;

  Matcher(const DynamicGraph& g, const RawPattern& p) : g_(g), p_(p) {
    mapping_.assign(static_cast<std::size_t>(p.k), kUnbound);
    chosen_.assign(p.edges.size(), 0);
  }

  /// Upper bound (exclusive) on every chosen timestamp; used to prune first-occurrence search.
  void set_time_limit(std::optional<Timestamp> limit) { limit_ = limit; }

  /// Visits instances whose rank-0 event is `start`. Returns false if the visitor stopped.
  bool run_from(std::size_t start, const Visitor& visit) {
    if (p_.edges.empty()) return true;
    const auto& e = g_.events()[start];
    if (e.op != Op::Add) return true;
    if (limit_ && e.t >= *limit_) return true;
    const auto& first = p_.edges[0];
    const NodeId ends[2][2] = {{e.u, e.v}, {e.v, e.u}};
    for (const auto& o : ends) {
      mapping_[first.a] = o[0];
      mapping_[first.b] = o[1];
      chosen_[0] = start;
      t_first_ = e.t;
      bool go = extend(1, e.t, visit);
      mapping_[first.a] = kUnbound;
      mapping_[first.b] = kUnbound;
      if (!go) return false;
    }
    return true;
  }

  bool run(const Visitor& visit) {
    for (std::size_t i = 0; i < g_.events().size(); ++i)
      if (!run_from(i, visit)) return false;
    return true;
  }

 private:
  bool node_used(NodeId n) const { return std::find(mapping_.begin(), mapping_.end(), n) != mapping_.end(); }

  bool extend(std::size_t rank, Timestamp prev, const Visitor& visit) {
    if (rank == p_.edges.size()) return emit(visit);
    const auto& pe = p_.edges[rank];
    NodeId x = mapping_[pe.a];
    NodeId y = mapping_[pe.b];
    if (x != kUnbound && y != kUnbound) return try_events(rank, NodePair::of(x, y), prev, visit);

    Symbol free_sym = x == kUnbound ? pe.a : pe.b;
    NodeId anchor = x == kUnbound ? y : x;
    if (anchor == kUnbound) return true;  // unreachable for connected patterns
    for (NodeId n : g_.neighbors(anchor)) {
      if (node_used(n)) continue;
      mapping_[free_sym] = n;
      bool go = try_events(rank, NodePair::of(anchor, n), prev, visit);
      mapping_[free_sym] = kUnbound;
      if (!go) return false;
    }
    return true;
  }

  bool try_events(std::size_t rank, NodePair pair, Timestamp prev, const Visitor& visit) {
    const auto* adds = g_.adds_on(pair);
    if (!adds) return true;
    Timestamp hi = saturating_add(t_first_, p_.delta);
    auto it = std::upper_bound(adds->begin(), adds->end(), prev,
                               [](Timestamp t, const AddRecord& r) { return t < r.t; });
    for (; it != adds->end() && it->t <= hi; ++it) {
      if (limit_ && it->t >= *limit_) break;
      chosen_[rank] = it->index;
      if (!extend(rank + 1, it->t, visit)) return false;
    }
    return true;
  }

  bool emit(const Visitor& visit) {
    MotifInstance inst;
    inst.mapping = mapping_;
    inst.event_indices = chosen_;
    inst.t_first = t_first_;
    inst.t_last = g_.events()[chosen_.back()].t;
    return visit(inst);
  }

  const DynamicGraph& g_;
  const RawPattern& p_;
  std::vector<NodeId> mapping_;
  std::vector<std::size_t> chosen_;
  Timestamp t_first_ = 0;
  std::optional<Timestamp> limit_;
};

std::vector<MotifInstance> enumerate_raw(const DynamicGraph& g, const RawPattern& p,
                                         std::optional<std::size_t> limit) {
  std::map<std::vector<std::size_t>, MotifInstance> unique;
  Matcher(g, p).run([&](const MotifInstance& inst) {
    unique.try_emplace(inst.sorted_indices(), inst);
    return true;
  });
  std::vector<MotifInstance> out;
  out.reserve(unique.size());
  for (auto& [key, inst] : unique) {
    if (limit && out.size() >= *limit) break;
    out.push_back(std::move(inst));
  }
  return out;
}

Symbol parse_symbol(const nlohmann::json& tok, char prefix, const std::string& path) {
  if (tok.is_number_integer() && tok.get<long long>() >= 0) return tok.get<Symbol>();
  if (tok.is_string()) {
    auto s = tok.get<std::string>();
    if (s.size() >= 2 && s[0] == prefix && std::all_of(s.begin() + 1, s.end(), ::isdigit)) return std::stoi(s.substr(1));
  }
  throw MotifError(path + ": expected token like \"" + std::string(1, prefix) + "0\", got " + tok.dump());
}

}  // namespace

MotifPattern MotifPattern::make(std::string name, std::vector<PatternEdge> edges, Timestamp delta) {
  if (edges.empty()) throw MotifError("motif '" + name + "' has no edges");
  std::set<Symbol> symbols;
  std::set<std::pair<Symbol, Symbol>> seen;
  for (const auto& e : edges) {
    if (e.a < 0 || e.b < 0) throw MotifError("motif '" + name + "': negative symbol");
    if (e.a == e.b) throw MotifError("motif '" + name + "': self-loop in pattern");
    if (!seen.insert(std::minmax(e.a, e.b)).second) throw MotifError("motif '" + name + "': repeated pattern edge");
    symbols.insert(e.a);
    symbols.insert(e.b);
  }
  int k = static_cast<int>(symbols.size());
  if (*symbols.rbegin() != k - 1) throw MotifError("motif '" + name + "': symbols must be exactly 0..k-1");
  std::set<Symbol> reached = {edges[0].a, edges[0].b};
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!reached.count(edges[i].a) && !reached.count(edges[i].b))
      throw MotifError("motif '" + name + "': edge " + std::to_string(i) + " breaks the connectivity constraint");
    reached.insert(edges[i].a);
    reached.insert(edges[i].b);
  }
  MotifPattern m;
  m.name_ = std::move(name);
  m.k_ = k;
  m.edges_ = std::move(edges);
  m.delta_ = delta;
  return m;
}

MotifPattern MotifPattern::with_delta(Timestamp delta) const {
  MotifPattern m = *this;
  m.delta_ = delta;
  return m;
}

const std::vector<std::string>& motif_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& e : catalog_table()) n.emplace_back(e.name);
    return n;
  }();
  return names;
}

bool is_catalog_motif(const std::string& name) {
  const auto& n = motif_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

MotifPattern catalog_motif(const std::string& name, Timestamp delta) {
  for (const auto& e : catalog_table())
    if (name == e.name) return MotifPattern::make(e.name, e.edges, delta);
  throw MotifError("unknown motif '" + name + "'");
}

MotifCatalog MotifCatalog::with_windows(const std::map<std::string, Timestamp>& windows) {
  std::vector<MotifPattern> motifs;
  for (const auto& name : motif_names()) {
    auto it = windows.find(name);
    if (it == windows.end()) throw MotifError("no window configured for motif '" + name + "'");
    motifs.push_back(catalog_motif(name, it->second));
  }
  return MotifCatalog(std::move(motifs));
}

const MotifPattern* MotifCatalog::find(const std::string& name) const {
  for (const auto& m : motifs_)
    if (m.name() == name) return &m;
  return nullptr;
}

nlohmann::ordered_json edge_pattern_to_json(const MotifPattern& m) {
  auto arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < m.edges().size(); ++i) {
    const auto& e = m.edges()[i];
    arr.push_back({"u" + std::to_string(e.a), "u" + std::to_string(e.b), "t" + std::to_string(i), "a"});
  }
  return arr;
}

nlohmann::ordered_json motif_to_json(const MotifPattern& m) {
  nlohmann::ordered_json j;
  j["name"] = m.name();
  j["edge_pattern"] = edge_pattern_to_json(m);
  j["time_window"] = m.delta();
  return j;
}

MotifPattern motif_from_definition(const std::string& name, const nlohmann::json& def, const std::string& path) {
  if (!def.is_object()) throw MotifError(path + ": expected an object with edge_pattern and time_window");
  if (!def.contains("edge_pattern")) throw MotifError(path + ".edge_pattern: missing field");
  if (!def.contains("time_window")) throw MotifError(path + ".time_window: missing field");
  const auto& tw = def.at("time_window");
  Timestamp delta = 0;
  if (tw.is_number_integer() && tw.get<long long>() >= 0) {
    delta = tw.get<Timestamp>();
  } else if (auto s = tw.is_string() ? tw.get<std::string>() : std::string();
             !s.empty() && s.size() < 19 && std::all_of(s.begin(), s.end(), ::isdigit)) {
    delta = std::stoull(s);
  } else {
    throw MotifError(path + ".time_window: expected a non-negative integer");
  }
  const auto& pat = def.at("edge_pattern");
  if (!pat.is_array() || pat.empty()) throw MotifError(path + ".edge_pattern: expected a non-empty list");

  struct Ranked {
    Symbol rank;
    PatternEdge edge;
  };
  std::vector<Ranked> ranked;
  std::set<Symbol> raw_symbols;
  for (std::size_t i = 0; i < pat.size(); ++i) {
    auto ipath = path + ".edge_pattern[" + std::to_string(i) + "]";
    const auto& item = pat[i];
    if (!item.is_array() || item.size() != 4) throw MotifError(ipath + ": expected a 4-element array");
    PatternEdge e{parse_symbol(item[0], 'u', ipath + "[0]"), parse_symbol(item[1], 'u', ipath + "[1]")};
    Symbol rank = parse_symbol(item[2], 't', ipath + "[2]");
    if (!item[3].is_string() || item[3].get<std::string>() != "a")
      throw MotifError(ipath + "[3]: motif edges must use operation \"a\"");
    raw_symbols.insert(e.a);
    raw_symbols.insert(e.b);
    ranked.push_back({rank, e});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& x, const Ranked& y) { return x.rank < y.rank; });
  for (std::size_t i = 1; i < ranked.size(); ++i)
    if (ranked[i].rank == ranked[i - 1].rank) throw MotifError(path + ".edge_pattern: repeated time token");
  // Dense relabel so that e.g. {u0, u1, u3} become {0, 1, 2}.
  std::map<Symbol, Symbol> dense;
  for (Symbol s : raw_symbols) dense.emplace(s, static_cast<Symbol>(dense.size()));
  std::vector<PatternEdge> edges;
  for (const auto& r : ranked) edges.push_back({dense[r.edge.a], dense[r.edge.b]});
  try {
    return MotifPattern::make(name, std::move(edges), delta);
  } catch (const MotifError& e) {
    throw MotifError(path + ".edge_pattern: " + e.what());
  }
}

MotifPattern motif_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("name") || !j.at("name").is_string())
    throw MotifError("motif record needs a string \"name\"");
  auto name = j.at("name").get<std::string>();
  return motif_from_definition(name, j, name);
}

std::string format_pattern(const MotifPattern& m) {
  std::string out = "[";
  for (std::size_t i = 0; i < m.edges().size(); ++i) {
    const auto& e = m.edges()[i];
    if (i) out += ", ";
    out += "(u" + std::to_string(e.a) + ", u" + std::to_string(e.b) + ", t" + std::to_string(i) + ", a)";
  }
  return out + "]";
}

std::vector<std::size_t> MotifInstance::sorted_indices() const {
  auto s = event_indices;
  std::sort(s.begin(), s.end());
  return s;
}

bool validate_instance(const DynamicGraph& g, const MotifPattern& m, const MotifInstance& inst) {
  if (inst.event_indices.size() != static_cast<std::size_t>(m.l())) return false;
  if (inst.mapping.size() != static_cast<std::size_t>(m.k())) return false;
  std::set<NodeId> image(inst.mapping.begin(), inst.mapping.end());
  if (image.size() != inst.mapping.size()) return false;
  std::set<std::size_t> distinct(inst.event_indices.begin(), inst.event_indices.end());
  if (distinct.size() != inst.event_indices.size()) return false;
  std::set<NodeId> seen_nodes;
  for (std::size_t i = 0; i < inst.event_indices.size(); ++i) {
    if (inst.event_indices[i] >= g.size()) return false;
    const auto& e = g.events()[inst.event_indices[i]];
    if (e.op != Op::Add) return false;
    const auto& pe = m.edges()[i];
    if (pair_of(e) != NodePair::of(inst.mapping[pe.a], inst.mapping[pe.b])) return false;
    if (i > 0 && e.t <= g.events()[inst.event_indices[i - 1]].t) return false;
    if (i > 0 && !seen_nodes.count(e.u) && !seen_nodes.count(e.v)) return false;
    seen_nodes.insert(e.u);
    seen_nodes.insert(e.v);
  }
  const auto& first = g.events()[inst.event_indices.front()];
  const auto& last = g.events()[inst.event_indices.back()];
  return last.t - first.t <= m.delta() && inst.t_first == first.t && inst.t_last == last.t;
}

bool classify_exact(const DynamicGraph& g, const MotifPattern& m) {
  if (g.add_count() != static_cast<std::size_t>(m.l())) return false;
  if (g.nodes().size() != static_cast<std::size_t>(m.k())) return false;
  return detect(g, m);
}

bool detect(const DynamicGraph& g, const MotifPattern& m) {
  auto raw = RawPattern::of(m);
  bool found = false;
  Matcher(g, raw).run([&](const MotifInstance&) {
    found = true;
    return false;
  });
  return found;
}

std::vector<MotifInstance> enumerate_instances(const DynamicGraph& g, const MotifPattern& m,
                                               std::optional<std::size_t> limit) {
  return enumerate_raw(g, RawPattern::of(m), limit);
}

std::size_t count_serial(const DynamicGraph& g, const MotifPattern& m) {
  return enumerate_raw(g, RawPattern::of(m), std::nullopt).size();
}

std::size_t count(const DynamicGraph& g, const MotifPattern& m) {
  // The rank-0 event of an instance is its unique earliest event, so instances
  // are partitioned by start event and deduplication stays thread-local.
  auto raw = RawPattern::of(m);
  const auto n = static_cast<std::int64_t>(g.size());
  std::size_t total = 0;
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : total)
  for (std::int64_t i = 0; i < n; ++i) {
    std::set<std::vector<std::size_t>> seen;
    Matcher(g, raw).run_from(static_cast<std::size_t>(i), [&](const MotifInstance& inst) {
      seen.insert(inst.sorted_indices());
      return true;
    });
    total += seen.size();
  }
  return total;
}

std::optional<Timestamp> first_occurrence(const DynamicGraph& g, const MotifPattern& m) {
  auto raw = RawPattern::of(m);
  std::optional<Timestamp> best;
  Matcher matcher(g, raw);
  // Any branch reaching a timestamp >= best cannot improve it.
  for (std::size_t i = 0; i < g.size(); ++i) {
    matcher.run_from(i, [&](const MotifInstance& inst) {
      if (!best || inst.t_last < *best) {
        best = inst.t_last;
        matcher.set_time_limit(best);
      }
      return true;
    });
  }
  return best;
}

std::optional<EdgeEvent> construct_completion(const DynamicGraph& g, const MotifPattern& m) {
  if (m.l() < 2) return std::nullopt;
  RawPattern prefix{m.k(), {m.edges().begin(), m.edges().end() - 1}, m.delta()};
  const auto& closing = m.edges().back();
  for (const auto& inst : enumerate_raw(g, prefix, std::nullopt)) {
    Timestamp t = inst.t_last + 1;
    if (t - inst.t_first > m.delta()) continue;
    auto fresh = [&]() -> NodeId {
      for (NodeId n : g.nodes())
        if (std::find(inst.mapping.begin(), inst.mapping.end(), n) == inst.mapping.end()) return n;
      return g.nodes().empty() ? 0 : g.nodes().back() + 1;
    };
    NodeId u = inst.mapping[closing.a] == kUnbound ? fresh() : inst.mapping[closing.a];
    NodeId v = inst.mapping[closing.b] == kUnbound ? fresh() : inst.mapping[closing.b];
    EdgeEvent e{u, v, t, Op::Add};
    if (detect(g.with_event(e), m)) return e;
  }
  return std::nullopt;
}

std::map<std::string, bool> multi_detect(const DynamicGraph& g, const MotifCatalog& catalog) {
  std::map<std::string, bool> out;
  for (const auto& m : catalog.motifs()) out[m.name()] = detect(g, m);
  return out;
}

std::map<std::string, Timestamp> multi_first_occurrence(const DynamicGraph& g, const MotifCatalog& catalog) {
  std::map<std::string, Timestamp> out;
  for (const auto& m : catalog.motifs())
    if (auto t = first_occurrence(g, m)) out[m.name()] = *t;
  return out;
}

std::map<std::string, std::size_t> multi_count(const DynamicGraph& g, const MotifCatalog& catalog) {
  std::map<std::string, std::size_t> out;
  for (const auto& m : catalog.motifs())
    if (auto c = count(g, m)) out[m.name()] = c;
  return out;
}

}  // namespace tmotif
