#include "tmotif/graph.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace tmotif {

char op_token(Op op) { return op == Op::Add ? 'a' : 'd'; }

ParseError::ParseError(const std::string& what, std::size_t position)
    : GraphError(what + " at position " + std::to_string(position)), position_(position) {}

DynamicGraph::DynamicGraph(std::vector<EdgeEvent> events) : events_(std::move(events)) {
  std::set<NodeId> nodes;
  std::map<NodeId, std::set<NodeId>> adj;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const auto& e = events_[i];
    if (e.u == e.v) throw GraphError("self-loop on node " + std::to_string(e.u) + " at event " + std::to_string(i));
    nodes.insert(e.u);
    nodes.insert(e.v);
    if (e.op == Op::Add) {
      add_index_[pair_of(e)].push_back({e.t, i});
      adj[e.u].insert(e.v);
      adj[e.v].insert(e.u);
      ++add_count_;
    }
  }
  nodes_.assign(nodes.begin(), nodes.end());
  for (auto& [pair, recs] : add_index_)
    std::stable_sort(recs.begin(), recs.end(), [](const AddRecord& a, const AddRecord& b) { return a.t < b.t; });
  for (auto& [n, s] : adj) adjacency_[n].assign(s.begin(), s.end());
}

const std::vector<NodeId>& DynamicGraph::neighbors(NodeId n) const {
  static const std::vector<NodeId> none;
  auto it = adjacency_.find(n);
  return it == adjacency_.end() ? none : it->second;
}

const std::vector<AddRecord>* DynamicGraph::adds_on(NodePair p) const {
  auto it = add_index_.find(p);
  return it == add_index_.end() ? nullptr : &it->second;
}

std::optional<Timestamp> DynamicGraph::max_timestamp() const {
  if (events_.empty()) return std::nullopt;
  Timestamp m = 0;
  for (const auto& e : events_) m = std::max(m, e.t);
  return m;
}

DynamicGraph DynamicGraph::with_event(const EdgeEvent& e) const {
  auto ev = events_;
  ev.push_back(e);
  return DynamicGraph(std::move(ev));
}

namespace {

class LiteralScanner {
 public:
  explicit LiteralScanner(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size();
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c) {
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
    ++pos_;
  }
  std::uint64_t integer() {
    skip_ws();
    std::size_t start = pos_;
    std::uint64_t value = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      std::uint64_t digit = static_cast<std::uint64_t>(s_[pos_] - '0');
      if (value > (UINT64_MAX - digit) / 10) throw ParseError("integer overflow", start);
      value = value * 10 + digit;
      ++pos_;
    }
    if (pos_ == start) throw ParseError("expected non-negative integer", start);
    return value;
  }
  Op op() {
    skip_ws();
    std::size_t start = pos_;
    bool quoted = pos_ < s_.size() && (s_[pos_] == '\'' || s_[pos_] == '"');
    char quote = quoted ? s_[pos_++] : '\0';
    if (pos_ >= s_.size()) throw ParseError("expected op token", start);
    char c = s_[pos_++];
    if (quoted) {
      if (pos_ >= s_.size() || s_[pos_] != quote) throw ParseError("unterminated op token", start);
      ++pos_;
    }
    if (c == 'a') return Op::Add;
    if (c == 'd') return Op::Delete;
    throw ParseError(std::string("unknown op token '") + c + "'", start);
  }
  std::size_t position() const { return pos_; }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<EdgeEvent> parse_events(std::string_view text) {
  LiteralScanner sc(text);
  std::vector<EdgeEvent> events;
  sc.expect('[');
  if (sc.peek(']')) {
    sc.expect(']');
  } else {
    while (true) {
      sc.expect('(');
      EdgeEvent e;
      e.u = sc.integer();
      sc.expect(',');
      e.v = sc.integer();
      sc.expect(',');
      e.t = sc.integer();
      sc.expect(',');
      e.op = sc.op();
      sc.expect(')');
      events.push_back(e);
      if (sc.peek(',')) {
        sc.expect(',');
        continue;
      }
      sc.expect(']');
      break;
    }
  }
  if (!sc.at_end()) throw ParseError("trailing characters", sc.position());
  return events;
}

DynamicGraph parse_graph(std::string_view text) { return DynamicGraph(parse_events(text)); }

std::string format_event(const EdgeEvent& e) {
  return "(" + std::to_string(e.u) + ", " + std::to_string(e.v) + ", " + std::to_string(e.t) + ", " +
         op_token(e.op) + ")";
}

std::string format_events(const std::vector<EdgeEvent>& events) {
  std::string out = "[";
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i) out += ", ";
    out += format_event(events[i]);
  }
  out += "]";
  return out;
}

nlohmann::ordered_json events_to_json(const std::vector<EdgeEvent>& events) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : events) arr.push_back({e.u, e.v, e.t, std::string(1, op_token(e.op))});
  return arr;
}

std::vector<EdgeEvent> events_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw GraphError("edge list must be an array");
  std::vector<EdgeEvent> events;
  events.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& item = j[i];
    auto where = "edge " + std::to_string(i);
    if (!item.is_array() || item.size() != 4) throw GraphError(where + ": expected a 4-element array");
    for (int k = 0; k < 3; ++k)
      if (!item[k].is_number_unsigned() && !(item[k].is_number_integer() && item[k].get<long long>() >= 0))
        throw GraphError(where + ": u, v and t must be non-negative integers");
    if (!item[3].is_string()) throw GraphError(where + ": operation must be a string");
    auto op = item[3].get<std::string>();
    if (op != "a" && op != "d") throw GraphError(where + ": unknown operation '" + op + "'");
    events.push_back({item[0].get<NodeId>(), item[1].get<NodeId>(), item[2].get<Timestamp>(),
                      op == "a" ? Op::Add : Op::Delete});
  }
  return events;
}

nlohmann::ordered_json graph_to_json(const DynamicGraph& g) {
  nlohmann::ordered_json j;
  j["events"] = events_to_json(g.events());
  return j;
}

DynamicGraph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("events")) throw GraphError("graph record needs an \"events\" field");
  return DynamicGraph(events_from_json(j.at("events")));
}

std::vector<EdgeEvent> sort_events(const DynamicGraph& g) {
  auto out = g.events();
  std::stable_sort(out.begin(), out.end(), [](const EdgeEvent& a, const EdgeEvent& b) { return a.t < b.t; });
  return out;
}

LinkDislink first_link_dislink(const DynamicGraph& g, NodeId u, NodeId v) {
  LinkDislink r;
  auto target = NodePair::of(u, v);
  for (const auto& e : g.events()) {
    if (pair_of(e) != target) continue;
    auto& slot = e.op == Op::Add ? r.link : r.dislink;
    if (!slot || e.t < *slot) slot = e.t;
  }
  return r;
}

std::set<NodePair> active_edges_at(const DynamicGraph& g, Timestamp t) {
  // Latest event per pair with timestamp <= t; ties go to the later index.
  std::map<NodePair, std::pair<Timestamp, Op>> latest;
  for (const auto& e : g.events()) {
    if (e.t > t) continue;
    auto [it, inserted] = latest.try_emplace(pair_of(e), e.t, e.op);
    if (!inserted && e.t >= it->second.first) it->second = {e.t, e.op};
  }
  std::set<NodePair> active;
  for (const auto& [p, last] : latest)
    if (last.second == Op::Add) active.insert(p);
  return active;
}

DynamicGraph reverse_graph(const DynamicGraph& g) {
  auto out = g.events();
  for (auto& e : out) e.op = e.op == Op::Add ? Op::Delete : Op::Add;
  std::stable_sort(out.begin(), out.end(), [](const EdgeEvent& a, const EdgeEvent& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.op == Op::Add && b.op == Op::Delete;
  });
  return DynamicGraph(std::move(out));
}

StaticProjection static_projection(const DynamicGraph& g) {
  StaticProjection sp;
  sp.nodes = g.nodes();
  for (const auto& [p, recs] : g.add_index()) sp.edges.push_back(p);

  std::vector<std::size_t> parent(sp.nodes.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto index_of = [&](NodeId n) {
    return static_cast<std::size_t>(std::lower_bound(sp.nodes.begin(), sp.nodes.end(), n) - sp.nodes.begin());
  };
  sp.components = sp.nodes.size();
  for (const auto& e : sp.edges) {
    auto a = find(index_of(e.lo));
    auto b = find(index_of(e.hi));
    if (a != b) {
      parent[a] = b;
      --sp.components;
    }
  }
  return sp;
}

}  // namespace tmotif
