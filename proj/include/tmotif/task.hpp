#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmotif/graph.hpp"
#include "tmotif/motif.hpp"

namespace tmotif {

enum class TaskKind {
  Classification,
  Detection,
  Construction,
  MultiDetect,
  Occurrence,
  MultiCount,
  SortEdge,
  WhenLink,
  WhatEdges,
  ReverseGraph,
};

std::string to_string(TaskKind kind);
TaskKind task_from_string(const std::string& s);
const std::vector<TaskKind>& all_tasks();
bool is_level2(TaskKind kind);
bool is_level0(TaskKind kind);

enum class Violation { Structural, Temporal, Duration };
std::string to_string(Violation v);
Violation violation_from_string(const std::string& s);

struct GenParams {
  std::size_t n = 10;
  double p = 0.3;
  Timestamp t_span = 5;
  Timestamp window = 5;
  double del_prob = 0.2;
  std::uint64_t seed = 0;
  std::optional<std::size_t> m;  // exact static edge count instead of ER sampling

  void validate() const;
};

nlohmann::ordered_json to_json(const GenParams& p);
GenParams gen_params_from_json(const nlohmann::json& j);

/// One generated benchmark item. `motifs` holds the query motif (Level 1) or
/// the full windowed catalog (Level 2); Level-0 tasks carry none.
struct TaskInstance {
  std::string id;
  TaskKind task = TaskKind::Detection;
  std::string motif;  // motif name, "all" for Level 2, empty for Level 0
  DynamicGraph graph;
  std::vector<MotifPattern> motifs;
  nlohmann::ordered_json query = nlohmann::ordered_json::object();
  nlohmann::ordered_json ground_truth = nlohmann::ordered_json::object();
  GenParams gen;
  std::optional<Violation> violation;
  /// Negatives only: (event index, original event) pairs that undo the perturbation.
  std::vector<std::pair<std::size_t, EdgeEvent>> restore;

  const MotifPattern& query_motif() const;
  MotifCatalog catalog() const { return MotifCatalog(motifs); }
};

nlohmann::ordered_json to_json(const TaskInstance& inst);
TaskInstance instance_from_json(const nlohmann::ordered_json& j);
std::string to_jsonl(const std::vector<TaskInstance>& instances);
std::vector<TaskInstance> read_instances(const std::string& path);

/// Ground truth recomputed from graph + motifs + query through the matcher.
nlohmann::ordered_json compute_ground_truth(const TaskInstance& inst);

/// Data-generation settings per task and motif.
namespace settings {

struct ClassificationRow {
  std::size_t n;
  std::size_t m;
  Timestamp t;
  Timestamp w;
};
struct Row {
  std::size_t n;
  Timestamp t;
  Timestamp w;
};

inline constexpr double kEdgeProb = 0.3;
inline constexpr double kDefaultDeleteProb = 0.2;

ClassificationRow classification(const std::string& motif);
Row detection(const std::string& motif);
/// Only 4-cycle, 4-tailedtriangle, 4-chordalcycle, 4-clique and bitriangle have rows.
Row construction(const std::string& motif);
const std::vector<std::string>& construction_motifs();
std::map<std::string, Timestamp> level2_windows();
inline constexpr Row kLevel2{20, 15, 0};
inline constexpr Row kLevel0{10, 5, 0};

}  // namespace settings

}  // namespace tmotif
