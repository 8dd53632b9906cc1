#include "tmotif/prompt.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifndef TMOTIF_PROMPT_DIR
#define TMOTIF_PROMPT_DIR "assets/prompts"
#endif

namespace tmotif {

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw TemplateError("cannot read prompt asset " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim_newlines(const std::string& s) {
  auto b = s.find_first_not_of("\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of("\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::ZeroShot: return "zero_shot";
    case Strategy::OneShot: return "one_shot";
    case Strategy::ZeroShotCot: return "zero_shot_cot";
    case Strategy::OneShotCot: return "one_shot_cot";
  }
  return "unknown";
}

Strategy strategy_from_string(const std::string& s) {
  for (auto st : {Strategy::ZeroShot, Strategy::OneShot, Strategy::ZeroShotCot, Strategy::OneShotCot})
    if (to_string(st) == s) return st;
  throw std::invalid_argument("unknown strategy '" + s + "'");
}

std::map<std::string, std::string> parse_sections(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line, name, body;
  bool open = false;
  auto flush = [&] {
    if (open) out[name] = trim_newlines(body);
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() > 2 && line.front() == '[' && line.back() == ']' && line.find(' ') == std::string::npos) {
      flush();
      name = line.substr(1, line.size() - 2);
      body.clear();
      open = true;
    } else if (open) {
      body += line;
      body += '\n';
    }
  }
  flush();
  return out;
}

std::string fill(std::string text, const std::map<std::string, std::string>& vars) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      auto close = text.find('}', i);
      if (close != std::string::npos) {
        auto it = vars.find(text.substr(i + 1, close - i - 1));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += text[i++];
  }
  return out;
}

std::string PromptTemplates::default_dir() {
  if (const char* env = std::getenv("TMOTIF_PROMPTS"); env && *env) return env;
  return TMOTIF_PROMPT_DIR;
}

PromptTemplates PromptTemplates::load(const std::string& dir) {
  namespace fs = std::filesystem;
  PromptTemplates t;
  t.common_ = parse_sections(read_file(fs::path(dir) / "common.txt"));
  for (const char* key : {"dyg", "motif", "cot_hint", "motif_list_header", "motif_list_entry", "example_header",
                          "cot_header", "cot_trigger", "question_header"})
    if (!t.common_.count(key)) throw TemplateError(std::string("common.txt: missing section [") + key + "]");
  for (auto task : all_tasks()) {
    auto path = fs::path(dir) / "tasks" / (to_string(task) + ".txt");
    if (!fs::exists(path)) continue;
    auto sections = parse_sections(read_file(path));
    for (const char* key : {"instruction", "answer", "question"})
      if (!sections.count(key)) throw TemplateError(path.string() + ": missing section [" + key + "]");
    t.tasks_[task] = std::move(sections);
  }

  auto ex_path = fs::path(dir) / "exemplars.json";
  if (fs::exists(ex_path)) {
    auto j = nlohmann::json::parse(read_file(ex_path));
    for (const auto& [name, e] : j.items()) {
      Exemplar ex;
      auto& inst = ex.instance;
      inst.task = task_from_string(name);
      inst.id = "exemplar-" + name;
      inst.graph = parse_graph(e.at("graph").get<std::string>());
      if (e.contains("motif")) {
        inst.motif = e.at("motif").get<std::string>();
        inst.motifs = {catalog_motif(inst.motif, e.at("window").get<Timestamp>())};
      } else if (is_level2(inst.task)) {
        inst.motif = "all";
        inst.motifs = MotifCatalog::with_windows(settings::level2_windows()).motifs();
      }
      if (e.contains("query")) inst.query = nlohmann::ordered_json::parse(e.at("query").dump());
      inst.ground_truth = compute_ground_truth(inst);
      ex.answer = e.at("answer").get<std::string>();
      for (const auto& line : e.at("reasoning")) ex.reasoning.push_back(line.get<std::string>());
      t.exemplars_[inst.task] = std::move(ex);
    }
  }
  return t;
}

const std::string& PromptTemplates::common(const std::string& section) const {
  auto it = common_.find(section);
  if (it == common_.end()) throw TemplateError("no common section '" + section + "'");
  return it->second;
}

const std::string& PromptTemplates::task_section(TaskKind task, const std::string& section) const {
  auto it = tasks_.find(task);
  if (it == tasks_.end()) throw TemplateError("no prompt template for task " + to_string(task));
  auto s = it->second.find(section);
  if (s == it->second.end()) throw TemplateError("template for " + to_string(task) + " lacks [" + section + "]");
  return s->second;
}

const Exemplar& PromptTemplates::exemplar(TaskKind task) const {
  auto it = exemplars_.find(task);
  if (it == exemplars_.end()) throw TemplateError("no exemplar for task " + to_string(task));
  return it->second;
}

std::string render_question(const PromptTemplates& t, const TaskInstance& inst) {
  std::map<std::string, std::string> vars{{"graph", serialize_graph(inst.graph)}};
  if (!is_level0(inst.task) && !is_level2(inst.task)) {
    const auto& m = inst.query_motif();
    vars["name"] = m.name();
    vars["k"] = std::to_string(m.k());
    vars["l"] = std::to_string(m.l());
    vars["delta"] = std::to_string(m.delta());
    vars["pattern"] = format_pattern(m);
  }
  for (const auto& [k, v] : inst.query.items()) vars[k] = v.is_string() ? v.get<std::string>() : v.dump();
  return fill(t.task_section(inst.task, "question"), vars);
}

PromptBundle render_prompt(const PromptTemplates& t, const TaskInstance& inst, Strategy strategy) {
  const bool cot = strategy == Strategy::ZeroShotCot || strategy == Strategy::OneShotCot;
  const bool shot = strategy == Strategy::OneShot || strategy == Strategy::OneShotCot;
  std::vector<std::string> parts{t.common("dyg")};
  if (!is_level0(inst.task)) parts.push_back(cot ? t.common("motif") + " " + t.common("cot_hint") : t.common("motif"));
  if (is_level2(inst.task)) {
    std::string list = t.common("motif_list_header");
    for (const auto& m : inst.motifs)
      list += "\n" + fill(t.common("motif_list_entry"), {{"name", m.name()},
                                                         {"k", std::to_string(m.k())},
                                                         {"l", std::to_string(m.l())},
                                                         {"delta", std::to_string(m.delta())},
                                                         {"pattern", format_pattern(m)}});
    parts.push_back(list);
  }
  parts.push_back(t.task_section(inst.task, "instruction"));
  parts.push_back(t.task_section(inst.task, "answer"));
  if (shot) {
    const auto& ex = t.exemplar(inst.task);
    std::string block = t.common("example_header") + "\n" + render_question(t, ex.instance);
    if (cot) {
      block += "\n" + t.common("cot_header");
      for (const auto& line : ex.reasoning) block += "\n" + line;
    }
    block += "\nAnswer: " + ex.answer;
    parts.push_back(block);
  } else if (cot) {
    parts.push_back(t.common("cot_trigger"));
  }
  parts.push_back(t.common("question_header") + render_question(t, inst));

  PromptBundle b;
  for (std::size_t i = 0; i < parts.size(); ++i) b.user += (i ? "\n\n" : "") + parts[i];
  return b;
}

}  // namespace tmotif
