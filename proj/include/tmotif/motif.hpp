#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmotif/graph.hpp"

namespace tmotif {

using Symbol = int;

struct PatternEdge {
  Symbol a = 0;
  Symbol b = 0;
  friend bool operator==(const PatternEdge&, const PatternEdge&) = default;
};

class MotifError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A (k, l, delta) temporal motif. Position in `edges()` is the temporal rank.
class MotifPattern {
 public:
  /// Validates symbol coverage, distinct edges and the connectivity constraint.
  static MotifPattern make(std::string name, std::vector<PatternEdge> edges, Timestamp delta);

  const std::string& name() const { return name_; }
  int k() const { return k_; }
  int l() const { return static_cast<int>(edges_.size()); }
  Timestamp delta() const { return delta_; }
  const std::vector<PatternEdge>& edges() const { return edges_; }

  MotifPattern with_delta(Timestamp delta) const;

 private:
  MotifPattern() = default;
  std::string name_;
  int k_ = 0;
  std::vector<PatternEdge> edges_;
  Timestamp delta_ = 0;
};

/// The nine catalog motifs, in canonical order.
const std::vector<std::string>& motif_names();
MotifPattern catalog_motif(const std::string& name, Timestamp delta);
bool is_catalog_motif(const std::string& name);

/// Named motifs with per-entry windows; iteration follows insertion order.
class MotifCatalog {
 public:
  MotifCatalog() = default;
  explicit MotifCatalog(std::vector<MotifPattern> motifs) : motifs_(std::move(motifs)) {}

  /// All nine motifs with the given per-motif windows.
  static MotifCatalog with_windows(const std::map<std::string, Timestamp>& windows);

  const std::vector<MotifPattern>& motifs() const { return motifs_; }
  const MotifPattern* find(const std::string& name) const;
  std::size_t size() const { return motifs_.size(); }

 private:
  std::vector<MotifPattern> motifs_;
};

// Motif definition record: {"name", "edge_pattern": [["u0","u1","t0","a"], ...], "time_window"}
nlohmann::ordered_json edge_pattern_to_json(const MotifPattern& m);
nlohmann::ordered_json motif_to_json(const MotifPattern& m);
MotifPattern motif_from_json(const nlohmann::json& j);
/// Builds a pattern from the agent wire form; `path` prefixes error messages.
MotifPattern motif_from_definition(const std::string& name, const nlohmann::json& def, const std::string& path);
/// Symbolic edge list as shown in prompts: "[(u0, u1, t0, a), (u1, u2, t1, a)]".
std::string format_pattern(const MotifPattern& m);

struct MotifInstance {
  std::vector<NodeId> mapping;             // symbol -> node
  std::vector<std::size_t> event_indices;  // by pattern rank
  Timestamp t_first = 0;
  Timestamp t_last = 0;

  std::vector<std::size_t> sorted_indices() const;
};

/// Re-checks all four constraints for a reported instance.
bool validate_instance(const DynamicGraph& g, const MotifPattern& m, const MotifInstance& inst);

bool classify_exact(const DynamicGraph& g, const MotifPattern& m);
bool detect(const DynamicGraph& g, const MotifPattern& m);
std::vector<MotifInstance> enumerate_instances(const DynamicGraph& g, const MotifPattern& m,
                                               std::optional<std::size_t> limit = std::nullopt);

/// Serial reference count.
std::size_t count_serial(const DynamicGraph& g, const MotifPattern& m);
/// OpenMP kernel over rank-0 start events; equal to count_serial.
std::size_t count(const DynamicGraph& g, const MotifPattern& m);

std::optional<Timestamp> first_occurrence(const DynamicGraph& g, const MotifPattern& m);
std::optional<EdgeEvent> construct_completion(const DynamicGraph& g, const MotifPattern& m);

std::map<std::string, bool> multi_detect(const DynamicGraph& g, const MotifCatalog& catalog);
std::map<std::string, Timestamp> multi_first_occurrence(const DynamicGraph& g, const MotifCatalog& catalog);
std::map<std::string, std::size_t> multi_count(const DynamicGraph& g, const MotifCatalog& catalog);

}  // namespace tmotif
