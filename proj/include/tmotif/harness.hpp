#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmotif/answer.hpp"
#include "tmotif/llm.hpp"
#include "tmotif/prompt.hpp"
#include "tmotif/task.hpp"

namespace tmotif {

/// One model attempt at an instance. `raw` is parsed with parse_answer.
struct Attempt {
  std::string raw;
  Usage usage;
  double latency_ms = 0.0;
};

class Solver {
 public:
  virtual ~Solver() = default;
  virtual Attempt solve(const TaskInstance& inst) = 0;
};

/// Renders the prompt and makes a single completion call.
class DirectSolver : public Solver {
 public:
  DirectSolver(std::unique_ptr<ChatModel> model, const PromptTemplates& templates, Strategy strategy)
      : model_(std::move(model)), templates_(templates), strategy_(strategy) {}
  Attempt solve(const TaskInstance& inst) override;

 private:
  std::unique_ptr<ChatModel> model_;
  const PromptTemplates& templates_;
  Strategy strategy_;
};

/// Called once per worker; each worker owns its solver (and network session).
using SolverFactory = std::function<std::unique_ptr<Solver>()>;

struct RunOptions {
  std::size_t concurrency = 4;
  std::string out_path;      // per-instance JSONL, appended
  std::string summary_path;  // CSV; empty = out_path with ".summary.csv"
};

struct RunRecord {
  std::string id;
  TaskKind task = TaskKind::Detection;
  std::string motif;
  std::string answer_raw;
  nlohmann::ordered_json parsed;
  double score = 0.0;
  Usage usage;
  double latency_ms = 0.0;
  std::optional<std::string> error;
};

nlohmann::ordered_json to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::ordered_json& j);

/// Solves and scores one instance; solver exceptions become an errored record.
RunRecord evaluate_instance(Solver& solver, const TaskInstance& inst);

struct SummaryRow {
  std::string task;
  std::string motif;
  std::size_t n = 0;
  double accuracy = 0.0;
  std::optional<double> avg_tokens;
};

/// Latest record per id, grouped by (task, motif) in first-seen order.
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);
std::string summary_csv(const std::vector<SummaryRow>& rows);

/// Records already in a result file; a torn trailing line is ignored.
std::vector<RunRecord> read_records(const std::string& path);

struct RunReport {
  std::size_t total = 0;
  std::size_t skipped = 0;  // answered in an earlier run
  std::size_t attempted = 0;
  std::size_t errored = 0;
  std::vector<SummaryRow> summary;
};

/// Evaluates every instance whose id has no error-free record in out_path,
/// appending records as they complete, then rewrites the summary CSV.
RunReport run_benchmark(const std::vector<TaskInstance>& instances, const SolverFactory& factory,
                        const RunOptions& opts);

}  // namespace tmotif
