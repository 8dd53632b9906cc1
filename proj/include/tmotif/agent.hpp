#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmotif/harness.hpp"
#include "tmotif/llm.hpp"
#include "tmotif/prompt.hpp"
#include "tmotif/task.hpp"

namespace tmotif {

struct ToolParam {
  std::string name;
  std::string description;
};

struct ToolSpec {
  std::string name;
  std::string description;
  std::vector<ToolParam> params;
};

/// The five motif tools, in a fixed order.
const std::vector<ToolSpec>& tool_registry();
const ToolSpec* find_tool(const std::string& name);
/// "{name}({params}): {description}" per line, for the agent prompt.
std::string describe_tools();
/// Comma separated tool names.
std::string tool_names();

struct ToolObservation {
  std::string text;
  bool error = false;
};

/// Runs a tool on its dictionary input. Unknown names and schema violations
/// come back as error observations naming the failing path.
ToolObservation call_tool(const std::string& name, const nlohmann::json& input);

/// The tool that answers a task, if any.
std::optional<std::string> tool_for_task(TaskKind task);
/// Dictionary input for that tool built from the instance.
nlohmann::json tool_input_for(const TaskInstance& inst);

struct ReactStep {
  std::string thought;
  std::optional<std::string> action;
  std::optional<nlohmann::json> action_input;
  std::optional<std::string> observation;
  std::optional<std::string> final_answer;
  std::optional<std::string> parse_error;
  std::string raw;
  Usage usage;

  bool failed() const { return parse_error.has_value(); }
};

/// Reads one model turn. A Final Answer wins over any Action in the same text.
ReactStep parse_react_step(const std::string& text);

struct AgentOptions {
  std::size_t max_steps = 5;
  std::size_t max_parse_failures = 2;
};

struct AgentResult {
  std::optional<std::string> final_answer;  // absent = unresolved
  std::vector<ReactStep> transcript;
  Usage usage;
  double latency_ms = 0.0;
  std::string stop_reason;  // "final_answer" | "max_steps" | "parse_failures"

  bool resolved() const { return final_answer.has_value(); }
};

class AgentPrompt {
 public:
  /// agent.txt from a prompt directory.
  static AgentPrompt load(const std::string& dir);
  explicit AgentPrompt(std::string text) : text_(std::move(text)) {}
  std::string render(const std::string& question, const std::string& scratchpad) const;

 private:
  std::string text_;
};

/// The question the agent sees: the zero-shot prompt of the instance.
std::string agent_question(const PromptTemplates& t, const TaskInstance& inst);

AgentResult run_agent(const std::string& question, ChatModel& model, const AgentPrompt& prompt,
                      const AgentOptions& opts = {});

nlohmann::ordered_json transcript_json(const AgentResult& r);

/// Harness adapter; an unresolved episode yields an empty answer.
class AgentSolver : public Solver {
 public:
  AgentSolver(std::unique_ptr<ChatModel> model, const PromptTemplates& templates, AgentPrompt prompt,
              AgentOptions opts = {})
      : model_(std::move(model)), templates_(templates), prompt_(std::move(prompt)), opts_(opts) {}
  Attempt solve(const TaskInstance& inst) override;
  const std::optional<AgentResult>& last() const { return last_; }
  /// Called after every episode, e.g. to log transcripts.
  std::function<void(const TaskInstance&, const AgentResult&)> on_episode;

 private:
  std::unique_ptr<ChatModel> model_;
  const PromptTemplates& templates_;
  AgentPrompt prompt_;
  AgentOptions opts_;
  std::optional<AgentResult> last_;
};

/// HTTP front end for the tools: POST /tools/<name> with a JSON body returns
/// {"observation": ...} or {"error": ...}; GET /tools lists the registry.
class ToolServer {
 public:
  ToolServer();
  ~ToolServer();
  /// Binds without serving; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tmotif
