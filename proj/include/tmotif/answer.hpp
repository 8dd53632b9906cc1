#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmotif/task.hpp"

namespace tmotif {

struct ParseFailure {
  std::string reason;
  friend bool operator==(const ParseFailure&, const ParseFailure&) = default;
};

using LinkTimes = std::pair<std::optional<Timestamp>, std::optional<Timestamp>>;

/// Task-specific payload; ParseFailure scores 0.
using Payload = std::variant<ParseFailure,
                             bool,                                  // classification, detection
                             std::vector<EdgeEvent>,                // construction, sort_edge, reverse_graph
                             std::set<std::string>,                 // multi_detect
                             std::map<std::string, std::uint64_t>,  // occurrence, multi_count
                             LinkTimes,                             // when_link
                             std::set<NodePair>>;                   // what_edges

/// Text after the last "Answer:" marker, trimmed; the whole text if absent.
std::string answer_region(const std::string& raw);
Payload parse_answer(const std::string& raw, TaskKind task);
bool is_failure(const Payload& p);
nlohmann::ordered_json payload_to_json(const Payload& p);

struct Score {
  TaskKind task = TaskKind::Detection;
  double value = 0.0;
  std::map<std::string, double> per_motif;  // Level 2 only
};

/// Pure function of the instance's ground truth (and graph, for construction).
Score score_instance(const TaskInstance& inst, const Payload& payload);

}  // namespace tmotif
