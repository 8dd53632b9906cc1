#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmotif/task.hpp"

namespace tmotif {

enum class Strategy { ZeroShot, OneShot, ZeroShotCot, OneShotCot };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct PromptBundle {
  std::string system;
  std::string user;
};

/// A worked example for one task, used by the one-shot strategies.
struct Exemplar {
  TaskInstance instance;  // graph, motifs and query; ground truth recomputed
  std::string answer;
  std::vector<std::string> reasoning;
};

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Prompt text loaded from an asset directory:
///   common.txt, tasks/<task>.txt (sections [instruction] [answer] [question]),
///   exemplars.json.
class PromptTemplates {
 public:
  static PromptTemplates load(const std::string& dir);
  /// $TMOTIF_PROMPTS if set, else the directory baked in at build time.
  static std::string default_dir();

  const std::string& common(const std::string& section) const;
  const std::string& task_section(TaskKind task, const std::string& section) const;
  const Exemplar& exemplar(TaskKind task) const;
  bool has_task(TaskKind task) const { return tasks_.count(task) > 0; }

 private:
  std::map<std::string, std::string> common_;
  std::map<TaskKind, std::map<std::string, std::string>> tasks_;
  std::map<TaskKind, Exemplar> exemplars_;
};

/// Splits "[name]\ntext..." blocks; text is trimmed of surrounding newlines.
std::map<std::string, std::string> parse_sections(const std::string& text);

/// Replaces every {key} with vars.at(key); unknown keys are left as is.
std::string fill(std::string text, const std::map<std::string, std::string>& vars);

/// The question line for an instance, with all placeholders filled.
std::string render_question(const PromptTemplates& t, const TaskInstance& inst);

PromptBundle render_prompt(const PromptTemplates& t, const TaskInstance& inst, Strategy strategy);

}  // namespace tmotif
