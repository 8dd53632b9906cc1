#include "tmotif/agent.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tmotif/literal.hpp"
#include "tmotif/motif.hpp"

namespace tmotif {

namespace {

const char* kDetection = "Motif_Detection";
const char* kConstruction = "Motif_Construction";
const char* kMultiDetection = "Multi_Motif_Detection";
const char* kOccurrence = "Motif_Occurrence_Prediction";
const char* kMultiCount = "Multi_Motif_Count";

const ToolParam kEdgeList{"edge_list", "list of 4-element arrays (u, v, t, operation); operation is \"a\" or \"d\""};
const ToolParam kMotifList{"motif_list",
                           "dictionary mapping one motif name to {\"edge_pattern\": [...], \"time_window\": int}"};
const ToolParam kMotifDefs{"motif_definitions",
                           "dictionary mapping each motif name to {\"edge_pattern\": [...], \"time_window\": int}"};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trim(std::string s) {
  auto issp = [](unsigned char c) { return std::isspace(c); };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), issp));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), issp).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::uint64_t as_uint(const nlohmann::json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (!s.empty() && s.size() < 19 && std::all_of(s.begin(), s.end(), ::isdigit)) return std::stoull(s);
  }
  throw SchemaError(path + ": expected a non-negative integer");
}

const nlohmann::json& field(const nlohmann::json& input, const std::string& key) {
  auto it = input.find(key);
  if (it == input.end()) throw SchemaError(key + ": missing field");
  return *it;
}

DynamicGraph edge_list(const nlohmann::json& input) {
  const auto& list = field(input, "edge_list");
  if (!list.is_array()) throw SchemaError("edge_list: expected a list of 4-element arrays");
  std::vector<EdgeEvent> events;
  for (std::size_t i = 0; i < list.size(); ++i) {
    auto path = "edge_list[" + std::to_string(i) + "]";
    const auto& e = list[i];
    if (!e.is_array() || e.size() != 4) throw SchemaError(path + ": expected a 4-element array");
    EdgeEvent ev{as_uint(e[0], path + "[0]"), as_uint(e[1], path + "[1]"), as_uint(e[2], path + "[2]"), Op::Add};
    auto op = e[3].is_string() ? lower(e[3].get<std::string>()) : std::string();
    if (op == "a")
      ev.op = Op::Add;
    else if (op == "d")
      ev.op = Op::Delete;
    else
      throw SchemaError(path + "[3]: expected \"a\" or \"d\"");
    events.push_back(ev);
  }
  try {
    return DynamicGraph(std::move(events));
  } catch (const GraphError& e) {
    throw SchemaError(std::string("edge_list: ") + e.what());
  }
}

std::vector<MotifPattern> motifs(const nlohmann::json& input, const std::string& key) {
  const auto& defs = field(input, key);
  if (!defs.is_object() || defs.empty())
    throw SchemaError(key + ": expected a dictionary mapping motif names to definitions");
  std::vector<MotifPattern> out;
  for (const auto& [name, def] : defs.items()) {
    try {
      out.push_back(motif_from_definition(name, def, key + "." + name));
    } catch (const MotifError& e) {
      throw SchemaError(e.what());
    }
  }
  return out;
}

MotifPattern single_motif(const nlohmann::json& input) {
  auto ms = motifs(input, "motif_list");
  if (ms.size() != 1)
    throw SchemaError("motif_list: expected exactly one motif, got " + std::to_string(ms.size()));
  return ms.front();
}

std::string name_list(const std::vector<std::string>& names) {
  std::string out = "[";
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? ", " : "") + names[i];
  return out + "]";
}

template <class Map>
std::string pair_list(const Map& m) {
  std::string out = "[";
  bool first = true;
  for (const auto& [name, v] : m) {
    out += (first ? "(" : ", (") + name + ", " + std::to_string(v) + ")";
    first = false;
  }
  return out + "]";
}

std::string run_tool(const std::string& name, const nlohmann::json& input) {
  if (!input.is_object()) throw SchemaError("input: expected a dictionary");
  auto g = edge_list(input);
  if (name == kDetection) return detect(g, single_motif(input)) ? "Yes" : "No";
  if (name == kConstruction) {
    auto c = construct_completion(g, single_motif(input));
    return c ? "[" + format_event(*c) + "]" : "[]";
  }
  MotifCatalog cat(motifs(input, "motif_definitions"));
  if (name == kMultiDetection) {
    std::vector<std::string> present;
    for (const auto& [m, yes] : multi_detect(g, cat))
      if (yes) present.push_back(m);
    return name_list(present);
  }
  if (name == kOccurrence) return pair_list(multi_first_occurrence(g, cat));
  return pair_list(multi_count(g, cat));
}

nlohmann::json definition(const MotifPattern& m) {
  return {{"edge_pattern", nlohmann::json::parse(edge_pattern_to_json(m).dump())}, {"time_window", m.delta()}};
}

/// Last occurrence of `key`, exact case first.
std::size_t rfind_marker(const std::string& text, const std::string& key) {
  auto pos = text.rfind(key);
  if (pos != std::string::npos) return pos;
  return lower(text).rfind(lower(key));
}

std::size_t find_marker(const std::string& text, const std::string& key, std::size_t from) {
  auto pos = text.find(key, from);
  if (pos != std::string::npos) return pos;
  return lower(text).find(lower(key), from);
}

std::string strip_thought(std::string s) {
  s = trim(std::move(s));
  if (lower(s.substr(0, 8)) == "thought:") s = trim(s.substr(8));
  return s;
}

std::string clean_action(std::string s) {
  s = trim(s.substr(0, s.find('\n')));
  auto junk = [](unsigned char c) { return std::isspace(c) || c == '*' || c == '`' || c == '[' || c == ']' || c == '"' || c == '\''; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), junk));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), junk).base(), s.end());
  return s;
}

/// The part of a model turn to keep in the scratchpad: anything the model
/// invented after its action input is dropped.
std::string turn_text(const std::string& text) {
  auto obs = find_marker(text, "Observation:", 0);
  return trim(obs == std::string::npos ? text : text.substr(0, obs));
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw TemplateError("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

const std::vector<ToolSpec>& tool_registry() {
  static const std::vector<ToolSpec> specs{
      {kDetection, "Determine whether the dynamic graph contains the temporal motif. Returns Yes or No.",
       {kEdgeList, kMotifList}},
      {kConstruction,
       "Find one edge to add to the dynamic graph so that it contains the temporal motif. Returns [(u, v, t, a)].",
       {kEdgeList, kMotifList}},
      {kMultiDetection, "Determine which of the temporal motifs occur in the dynamic graph. Returns [name, ...].",
       {kEdgeList, kMotifDefs}},
      {kOccurrence,
       "For each temporal motif that occurs, the time at which its first instance is completed. Returns [(name, t), ...].",
       {kEdgeList, kMotifDefs}},
      {kMultiCount, "Count the instances of each temporal motif in the dynamic graph. Returns [(name, count), ...].",
       {kEdgeList, kMotifDefs}},
  };
  return specs;
}

const ToolSpec* find_tool(const std::string& name) {
  const auto& specs = tool_registry();
  for (const auto& s : specs)
    if (s.name == name) return &s;
  for (const auto& s : specs)
    if (lower(s.name) == lower(name)) return &s;
  return nullptr;
}

std::string describe_tools() {
  std::string out;
  for (const auto& s : tool_registry()) {
    out += "\n" + s.name + "(";
    for (std::size_t i = 0; i < s.params.size(); ++i) out += (i ? ", " : "") + s.params[i].name;
    out += "): " + s.description;
    for (const auto& p : s.params) out += "\n    " + p.name + ": " + p.description;
  }
  return out;
}

std::string tool_names() {
  std::string out;
  for (const auto& s : tool_registry()) out += (out.empty() ? "" : ", ") + s.name;
  return out;
}

ToolObservation call_tool(const std::string& name, const nlohmann::json& input) {
  const auto* spec = find_tool(name);
  if (!spec) return {"Error: unknown tool \"" + name + "\". Available tools: " + tool_names() + ".", true};
  try {
    return {run_tool(spec->name, input), false};
  } catch (const SchemaError& e) {
    return {std::string("Error: invalid input: ") + e.what(), true};
  }
}

std::optional<std::string> tool_for_task(TaskKind task) {
  switch (task) {
    case TaskKind::Classification:
    case TaskKind::Detection: return kDetection;
    case TaskKind::Construction: return kConstruction;
    case TaskKind::MultiDetect: return kMultiDetection;
    case TaskKind::Occurrence: return kOccurrence;
    case TaskKind::MultiCount: return kMultiCount;
    default: return std::nullopt;
  }
}

nlohmann::json tool_input_for(const TaskInstance& inst) {
  nlohmann::json in;
  in["edge_list"] = nlohmann::json::array();
  for (const auto& e : inst.graph.events())
    in["edge_list"].push_back({e.u, e.v, e.t, e.op == Op::Add ? "a" : "d"});
  if (is_level2(inst.task)) {
    auto& defs = in["motif_definitions"] = nlohmann::json::object();
    for (const auto& m : inst.motifs) defs[m.name()] = definition(m);
  } else {
    const auto& m = inst.query_motif();
    in["motif_list"] = {{m.name(), definition(m)}};
  }
  return in;
}

ReactStep parse_react_step(const std::string& text) {
  ReactStep step;
  step.raw = text;
  if (auto fa = rfind_marker(text, "Final Answer:"); fa != std::string::npos) {
    step.thought = strip_thought(turn_text(text.substr(0, fa)));
    step.final_answer = trim(text.substr(fa + 13));
    return step;
  }
  auto act = rfind_marker(text, "Action:");
  if (act == std::string::npos) {
    step.parse_error = "no Action or Final Answer found";
    return step;
  }
  step.thought = strip_thought(text.substr(0, act));
  auto name = clean_action(text.substr(act + 7));
  if (name.empty()) {
    step.parse_error = "Action is empty";
    return step;
  }
  step.action = name;
  auto in = find_marker(text, "Action Input:", act);
  if (in == std::string::npos) {
    step.parse_error = "Action Input is missing";
    return step;
  }
  auto body = turn_text(text.substr(in + 13));
  auto open = body.find('{');
  if (open == std::string::npos) {
    step.parse_error = "Action Input must be a dictionary";
    return step;
  }
  auto end = literal_extent(body, open);
  if (end == std::string::npos) {
    step.parse_error = "Action Input has unbalanced brackets";
    return step;
  }
  try {
    step.action_input = parse_literal(std::string_view(body).substr(open, end - open));
  } catch (const ParseError& e) {
    step.parse_error = std::string("Action Input: ") + e.what() + " at offset " + std::to_string(e.position());
  }
  return step;
}

AgentPrompt AgentPrompt::load(const std::string& dir) {
  return AgentPrompt(trim(read_file(std::filesystem::path(dir) / "agent.txt")));
}

std::string AgentPrompt::render(const std::string& question, const std::string& scratchpad) const {
  return fill(text_, {{"tools", describe_tools()},
                      {"tool_names", tool_names()},
                      {"input", question},
                      {"agent_scratchpad", scratchpad}});
}

std::string agent_question(const PromptTemplates& t, const TaskInstance& inst) {
  auto p = render_prompt(t, inst, Strategy::ZeroShot);
  return p.system.empty() ? p.user : p.system + "\n\n" + p.user;
}

AgentResult run_agent(const std::string& question, ChatModel& model, const AgentPrompt& prompt,
                      const AgentOptions& opts) {
  if (opts.max_steps == 0) throw std::invalid_argument("max_steps must be at least 1");
  AgentResult result;
  std::string scratchpad;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < opts.max_steps; ++i) {
    auto c = model.complete({{"user", prompt.render(question, scratchpad)}}, {"\nObservation:"});
    if (i == 0)
      result.usage = c.usage;
    else
      result.usage += c.usage;
    result.latency_ms += c.latency_ms;

    auto step = parse_react_step(c.text);
    step.usage = c.usage;
    if (step.final_answer) {
      result.final_answer = step.final_answer;
      result.stop_reason = "final_answer";
      result.transcript.push_back(std::move(step));
      return result;
    }
    if (step.failed()) {
      ++failures;
      step.observation = "Invalid format: " + *step.parse_error +
                         ". Reply with Thought, Action and Action Input, or with Final Answer.";
    } else {
      failures = 0;
      step.observation = call_tool(*step.action, *step.action_input).text;
    }
    scratchpad += " " + turn_text(c.text) + "\nObservation: " + *step.observation + "\nThought:";
    result.transcript.push_back(std::move(step));
    if (failures >= opts.max_parse_failures) {
      result.stop_reason = "parse_failures";
      return result;
    }
  }
  result.stop_reason = "max_steps";
  return result;
}

nlohmann::ordered_json transcript_json(const AgentResult& r) {
  auto steps = nlohmann::ordered_json::array();
  auto opt = [](const std::optional<std::uint64_t>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  for (const auto& s : r.transcript) {
    nlohmann::ordered_json j;
    j["thought"] = s.thought;
    if (s.action) j["action"] = *s.action;
    if (s.action_input) j["action_input"] = *s.action_input;
    if (s.observation) j["observation"] = *s.observation;
    if (s.final_answer) j["final_answer"] = *s.final_answer;
    if (s.parse_error) j["parse_error"] = *s.parse_error;
    j["prompt_tokens"] = opt(s.usage.prompt_tokens);
    j["completion_tokens"] = opt(s.usage.completion_tokens);
    steps.push_back(std::move(j));
  }
  nlohmann::ordered_json out;
  out["resolved"] = r.resolved();
  out["final_answer"] = r.final_answer ? nlohmann::ordered_json(*r.final_answer) : nlohmann::ordered_json(nullptr);
  out["stop_reason"] = r.stop_reason;
  out["prompt_tokens"] = opt(r.usage.prompt_tokens);
  out["completion_tokens"] = opt(r.usage.completion_tokens);
  out["steps"] = std::move(steps);
  return out;
}

Attempt AgentSolver::solve(const TaskInstance& inst) {
  auto r = run_agent(agent_question(templates_, inst), *model_, prompt_, opts_);
  Attempt a{r.final_answer ? "Answer: " + *r.final_answer : std::string(), r.usage, r.latency_ms};
  if (on_episode) on_episode(inst, r);
  last_ = std::move(r);
  return a;
}

}  // namespace tmotif
