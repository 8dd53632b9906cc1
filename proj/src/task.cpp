#include "tmotif/task.hpp"

#include <fstream>
#include <map>

namespace tmotif {

namespace {

const std::vector<std::pair<TaskKind, const char*>>& task_names() {
  static const std::vector<std::pair<TaskKind, const char*>> names = {
      {TaskKind::Classification, "classification"}, {TaskKind::Detection, "detection"},
      {TaskKind::Construction, "construction"},     {TaskKind::MultiDetect, "multi_detect"},
      {TaskKind::Occurrence, "occurrence"},         {TaskKind::MultiCount, "multi_count"},
      {TaskKind::SortEdge, "sort_edge"},            {TaskKind::WhenLink, "when_link"},
      {TaskKind::WhatEdges, "what_edges"},          {TaskKind::ReverseGraph, "reverse_graph"},
  };
  return names;
}

template <class Map>
nlohmann::ordered_json map_json(const Map& m) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

}  // namespace

std::string to_string(TaskKind kind) {
  for (const auto& [k, n] : task_names())
    if (k == kind) return n;
  return "unknown";
}

TaskKind task_from_string(const std::string& s) {
  for (const auto& [k, n] : task_names())
    if (s == n) return k;
  throw std::invalid_argument("unknown task kind '" + s + "'");
}

const std::vector<TaskKind>& all_tasks() {
  static const std::vector<TaskKind> tasks = [] {
    std::vector<TaskKind> t;
    for (const auto& [k, n] : task_names()) t.push_back(k);
    return t;
  }();
  return tasks;
}

bool is_level2(TaskKind k) {
  return k == TaskKind::MultiDetect || k == TaskKind::Occurrence || k == TaskKind::MultiCount;
}

bool is_level0(TaskKind k) {
  return k == TaskKind::SortEdge || k == TaskKind::WhenLink || k == TaskKind::WhatEdges || k == TaskKind::ReverseGraph;
}

std::string to_string(Violation v) {
  switch (v) {
    case Violation::Structural: return "structural";
    case Violation::Temporal: return "temporal";
    case Violation::Duration: return "duration";
  }
  return "unknown";
}

Violation violation_from_string(const std::string& s) {
  if (s == "structural") return Violation::Structural;
  if (s == "temporal") return Violation::Temporal;
  if (s == "duration") return Violation::Duration;
  throw std::invalid_argument("unknown violation tag '" + s + "'");
}

void GenParams::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("edge probability must lie in [0, 1]");
  if (!(del_prob >= 0.0 && del_prob <= 1.0)) throw std::invalid_argument("deletion probability must lie in [0, 1]");
  if (t_span < 1) throw std::invalid_argument("time span must be >= 1");
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  if (m && *m > n * (n - 1) / 2) throw std::invalid_argument("edge count exceeds n(n-1)/2");
}

nlohmann::ordered_json to_json(const GenParams& p) {
  nlohmann::ordered_json j;
  j["n"] = p.n;
  if (p.m) j["m"] = *p.m;
  j["p"] = p.p;
  j["t_span"] = p.t_span;
  j["window"] = p.window;
  j["del_prob"] = p.del_prob;
  j["seed"] = p.seed;
  return j;
}

GenParams gen_params_from_json(const nlohmann::json& j) {
  GenParams p;
  p.n = j.at("n").get<std::size_t>();
  if (j.contains("m")) p.m = j.at("m").get<std::size_t>();
  p.p = j.at("p").get<double>();
  p.t_span = j.at("t_span").get<Timestamp>();
  p.window = j.at("window").get<Timestamp>();
  p.del_prob = j.at("del_prob").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

const MotifPattern& TaskInstance::query_motif() const {
  if (motifs.empty()) throw std::logic_error("instance " + id + " has no motif");
  return motifs.front();
}

nlohmann::ordered_json to_json(const TaskInstance& inst) {
  nlohmann::ordered_json j;
  j["id"] = inst.id;
  j["task"] = to_string(inst.task);
  j["motif"] = inst.motif;
  j["graph"] = graph_to_json(inst.graph);
  auto defs = nlohmann::ordered_json::object();
  for (const auto& m : inst.motifs) {
    nlohmann::ordered_json d;
    d["edge_pattern"] = edge_pattern_to_json(m);
    d["time_window"] = m.delta();
    defs[m.name()] = d;
  }
  j["motifs"] = defs;
  j["query"] = inst.query;
  j["ground_truth"] = inst.ground_truth;
  j["gen"] = to_json(inst.gen);
  if (inst.violation) j["violation_tag"] = to_string(*inst.violation);
  if (!inst.restore.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [idx, e] : inst.restore) arr.push_back({idx, events_to_json({e})[0]});
    j["restore"] = arr;
  }
  return j;
}

TaskInstance instance_from_json(const nlohmann::ordered_json& j) {
  TaskInstance inst;
  inst.id = j.at("id").get<std::string>();
  inst.task = task_from_string(j.at("task").get<std::string>());
  inst.motif = j.value("motif", "");
  inst.graph = graph_from_json(nlohmann::json::parse(j.at("graph").dump()));
  if (j.contains("motifs"))
    for (const auto& [name, def] : j.at("motifs").items())
      inst.motifs.push_back(motif_from_definition(name, nlohmann::json::parse(def.dump()), "motifs." + name));
  if (j.contains("query")) inst.query = j.at("query");
  if (j.contains("ground_truth")) inst.ground_truth = j.at("ground_truth");
  if (j.contains("gen")) inst.gen = gen_params_from_json(nlohmann::json::parse(j.at("gen").dump()));
  if (j.contains("violation_tag")) inst.violation = violation_from_string(j.at("violation_tag").get<std::string>());
  if (j.contains("restore"))
    for (const auto& r : j.at("restore")) {
      auto ev = events_from_json(nlohmann::json::parse("[" + r.at(1).dump() + "]"));
      inst.restore.emplace_back(r.at(0).get<std::size_t>(), ev.at(0));
    }
  return inst;
}

std::string to_jsonl(const std::vector<TaskInstance>& instances) {
  std::string out;
  for (const auto& inst : instances) {
    out += to_json(inst).dump();
    out += '\n';
  }
  return out;
}

std::vector<TaskInstance> read_instances(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file '" + path + "'");
  std::vector<TaskInstance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(instance_from_json(nlohmann::ordered_json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

nlohmann::ordered_json compute_ground_truth(const TaskInstance& inst) {
  nlohmann::ordered_json gt;
  const auto& g = inst.graph;
  switch (inst.task) {
    case TaskKind::Classification:
      gt["label"] = classify_exact(g, inst.query_motif());
      break;
    case TaskKind::Detection:
      gt["label"] = detect(g, inst.query_motif());
      break;
    case TaskKind::Construction: {
      auto c = construct_completion(g, inst.query_motif());
      gt["completion"] = c ? events_to_json({*c}) : nlohmann::ordered_json::array();
      break;
    }
    case TaskKind::MultiDetect:
    case TaskKind::Occurrence:
    case TaskKind::MultiCount: {
      auto cat = inst.catalog();
      gt["detect"] = map_json(multi_detect(g, cat));
      gt["first_occurrence"] = map_json(multi_first_occurrence(g, cat));
      gt["count"] = map_json(multi_count(g, cat));
      break;
    }
    case TaskKind::SortEdge:
      gt["events"] = events_to_json(sort_events(g));
      break;
    case TaskKind::WhenLink: {
      auto r = first_link_dislink(g, inst.query.at("u").get<NodeId>(), inst.query.at("v").get<NodeId>());
      gt["link"] = r.link ? nlohmann::ordered_json(*r.link) : nlohmann::ordered_json(nullptr);
      gt["dislink"] = r.dislink ? nlohmann::ordered_json(*r.dislink) : nlohmann::ordered_json(nullptr);
      break;
    }
    case TaskKind::WhatEdges: {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& p : active_edges_at(g, inst.query.at("t").get<Timestamp>())) arr.push_back({p.lo, p.hi});
      gt["edges"] = arr;
      break;
    }
    case TaskKind::ReverseGraph:
      gt["events"] = events_to_json(reverse_graph(g).events());
      break;
  }
  return gt;
}

namespace settings {

ClassificationRow classification(const std::string& motif) {
  static const std::map<std::string, ClassificationRow> rows = {
      {"3-star", {4, 3, 5, 5}},          {"triangle", {3, 3, 5, 5}},   {"4-path", {4, 3, 5, 5}},
      {"4-cycle", {4, 4, 5, 5}},         {"4-chordalcycle", {4, 5, 10, 10}},
      {"4-tailedtriangle", {4, 4, 5, 5}}, {"4-clique", {4, 6, 10, 10}}, {"bitriangle", {6, 6, 10, 10}},
      {"butterfly", {4, 4, 5, 5}},
  };
  auto it = rows.find(motif);
  if (it == rows.end()) throw std::invalid_argument("no classification settings for '" + motif + "'");
  return it->second;
}

Row detection(const std::string& motif) {
  static const std::map<std::string, Row> rows = {
      {"3-star", {10, 5, 3}},          {"triangle", {10, 5, 4}},        {"4-path", {10, 5, 3}},
      {"4-cycle", {15, 10, 6}},        {"4-chordalcycle", {20, 15, 14}}, {"4-tailedtriangle", {15, 10, 7}},
      {"4-clique", {35, 30, 27}},      {"bitriangle", {25, 20, 14}},    {"butterfly", {15, 10, 6}},
  };
  auto it = rows.find(motif);
  if (it == rows.end()) throw std::invalid_argument("no detection settings for '" + motif + "'");
  return it->second;
}

Row construction(const std::string& motif) {
  static const std::map<std::string, Row> rows = {
      {"4-cycle", {10, 10, 5}},  {"4-tailedtriangle", {10, 10, 5}}, {"4-chordalcycle", {10, 15, 10}},
      {"4-clique", {10, 15, 10}}, {"bitriangle", {10, 15, 10}},
  };
  auto it = rows.find(motif);
  if (it == rows.end()) throw std::invalid_argument("no construction settings for '" + motif + "'");
  return it->second;
}

const std::vector<std::string>& construction_motifs() {
  static const std::vector<std::string> m = {"4-cycle", "4-tailedtriangle", "4-chordalcycle", "4-clique",
                                             "bitriangle"};
  return m;
}

std::map<std::string, Timestamp> level2_windows() {
  return {{"3-star", 3},           {"triangle", 3},  {"4-path", 3},      {"4-cycle", 6},    {"4-chordalcycle", 14},
          {"4-tailedtriangle", 6}, {"4-clique", 15}, {"bitriangle", 15}, {"butterfly", 6}};
}

}  // namespace settings

}  // namespace tmotif
