#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace tmotif {

using NodeId = std::uint64_t;
using Timestamp = std::uint64_t;

enum class Op : std::uint8_t { Add, Delete };

char op_token(Op op);

struct EdgeEvent {
  NodeId u = 0;
  NodeId v = 0;
  Timestamp t = 0;
  Op op = Op::Add;

  friend auto operator<=>(const EdgeEvent&, const EdgeEvent&) = default;
};

/// Unordered node pair stored with lo <= hi.
struct NodePair {
  NodeId lo = 0;
  NodeId hi = 0;

  static NodePair of(NodeId a, NodeId b) { return a < b ? NodePair{a, b} : NodePair{b, a}; }
  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

inline NodePair pair_of(const EdgeEvent& e) { return NodePair::of(e.u, e.v); }

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public GraphError {
 public:
  ParseError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

struct AddRecord {
  Timestamp t = 0;
  std::size_t index = 0;
};

/// Immutable event sequence plus the views every algorithm reads:
/// the node set, per-pair Add timestamps, and static adjacency over Add pairs.
class DynamicGraph {
 public:
  DynamicGraph() = default;
  explicit DynamicGraph(std::vector<EdgeEvent> events);

  const std::vector<EdgeEvent>& events() const { return events_; }
  const std::vector<NodeId>& nodes() const { return nodes_; }
  const std::map<NodePair, std::vector<AddRecord>>& add_index() const { return add_index_; }

  /// Distinct neighbours through Add pairs, ascending.
  const std::vector<NodeId>& neighbors(NodeId n) const;
  const std::vector<AddRecord>* adds_on(NodePair p) const;

  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  std::size_t add_count() const { return add_count_; }
  std::optional<Timestamp> max_timestamp() const;

  /// Copy with one event appended at the end of the sequence.
  DynamicGraph with_event(const EdgeEvent& e) const;

 private:
  std::vector<EdgeEvent> events_;
  std::vector<NodeId> nodes_;
  std::map<NodePair, std::vector<AddRecord>> add_index_;
  std::map<NodeId, std::vector<NodeId>> adjacency_;
  std::size_t add_count_ = 0;
};

struct StaticProjection {
  std::vector<NodeId> nodes;
  std::vector<NodePair> edges;
  std::size_t components = 0;
};

// Quadruplet literal, e.g. "[(1, 2, 0, a), (0, 2, 1, a)]".
DynamicGraph parse_graph(std::string_view text);
std::vector<EdgeEvent> parse_events(std::string_view text);
std::string format_event(const EdgeEvent& e);
std::string format_events(const std::vector<EdgeEvent>& events);
inline std::string serialize_graph(const DynamicGraph& g) { return format_events(g.events()); }

// JSONL graph record: {"events": [[u, v, t, "a"], ...]}
nlohmann::ordered_json events_to_json(const std::vector<EdgeEvent>& events);
std::vector<EdgeEvent> events_from_json(const nlohmann::json& j);
nlohmann::ordered_json graph_to_json(const DynamicGraph& g);
DynamicGraph graph_from_json(const nlohmann::json& j);

// Level-0 ground truths.
std::vector<EdgeEvent> sort_events(const DynamicGraph& g);

struct LinkDislink {
  std::optional<Timestamp> link;
  std::optional<Timestamp> dislink;
  friend bool operator==(const LinkDislink&, const LinkDislink&) = default;
};
LinkDislink first_link_dislink(const DynamicGraph& g, NodeId u, NodeId v);

std::set<NodePair> active_edges_at(const DynamicGraph& g, Timestamp t);
DynamicGraph reverse_graph(const DynamicGraph& g);
StaticProjection static_projection(const DynamicGraph& g);

}  // namespace tmotif
