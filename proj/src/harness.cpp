#include "tmotif/harness.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace tmotif {

namespace {

nlohmann::ordered_json opt_json(const std::optional<std::uint64_t>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::optional<std::uint64_t> opt_from(const nlohmann::ordered_json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::uint64_t>();
}

}  // namespace

Attempt DirectSolver::solve(const TaskInstance& inst) {
  auto prompt = render_prompt(templates_, inst, strategy_);
  std::vector<ChatMessage> msgs;
  if (!prompt.system.empty()) msgs.push_back({"system", prompt.system});
  msgs.push_back({"user", prompt.user});
  auto c = model_->complete(msgs);
  return {c.text, c.usage, c.latency_ms};
}

nlohmann::ordered_json to_json(const RunRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["task"] = to_string(r.task);
  j["motif"] = r.motif;
  j["answer_raw"] = r.answer_raw;
  j["parsed"] = r.parsed;
  j["score"] = r.score;
  j["prompt_tokens"] = opt_json(r.usage.prompt_tokens);
  j["completion_tokens"] = opt_json(r.usage.completion_tokens);
  j["latency_ms"] = r.latency_ms;
  if (r.error) j["error"] = *r.error;
  return j;
}

RunRecord record_from_json(const nlohmann::ordered_json& j) {
  RunRecord r;
  r.id = j.at("id").get<std::string>();
  r.task = task_from_string(j.at("task").get<std::string>());
  r.motif = j.value("motif", "");
  r.answer_raw = j.value("answer_raw", "");
  if (j.contains("parsed")) r.parsed = j.at("parsed");
  r.score = j.value("score", 0.0);
  r.usage.prompt_tokens = opt_from(j, "prompt_tokens");
  r.usage.completion_tokens = opt_from(j, "completion_tokens");
  r.latency_ms = j.value("latency_ms", 0.0);
  if (j.contains("error")) r.error = j.at("error").get<std::string>();
  return r;
}

RunRecord evaluate_instance(Solver& solver, const TaskInstance& inst) {
  RunRecord r;
  r.id = inst.id;
  r.task = inst.task;
  r.motif = inst.motif;
  try {
    auto a = solver.solve(inst);
    r.answer_raw = a.raw;
    r.usage = a.usage;
    r.latency_ms = a.latency_ms;
    auto payload = parse_answer(a.raw, inst.task);
    r.parsed = payload_to_json(payload);
    r.score = score_instance(inst, payload).value;
  } catch (const LlmError& e) {
    r.error = to_string(e.kind()) + ": " + e.what();
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  std::map<std::string, const RunRecord*> latest;
  std::vector<std::string> order;
  for (const auto& r : records) {
    if (!latest.count(r.id)) order.push_back(r.id);
    latest[r.id] = &r;
  }
  struct Acc {
    std::size_t n = 0, with_tokens = 0;
    double score = 0, tokens = 0;
  };
  std::vector<std::pair<std::string, std::string>> groups;
  std::map<std::pair<std::string, std::string>, Acc> acc;
  for (const auto& id : order) {
    const auto& r = *latest[id];
    auto key = std::make_pair(to_string(r.task), r.motif);
    if (!acc.count(key)) groups.push_back(key);
    auto& a = acc[key];
    ++a.n;
    a.score += r.score;
    if (auto t = r.usage.total()) {
      ++a.with_tokens;
      a.tokens += static_cast<double>(*t);
    }
  }
  std::vector<SummaryRow> rows;
  for (const auto& key : groups) {
    const auto& a = acc[key];
    SummaryRow row{key.first, key.second, a.n, a.score / static_cast<double>(a.n), std::nullopt};
    if (a.with_tokens) row.avg_tokens = a.tokens / static_cast<double>(a.with_tokens);
    rows.push_back(row);
  }
  return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "task,motif,accuracy,avg_tokens\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.4f", r.accuracy);
    out << r.task << ',' << r.motif << ',' << buf << ',';
    if (r.avg_tokens) {
      std::snprintf(buf, sizeof buf, "%.1f", *r.avg_tokens);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::vector<RunRecord> read_records(const std::string& path) {
  std::vector<RunRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(nlohmann::ordered_json::parse(line)));
    } catch (const std::exception&) {
      // Interrupted write.
    }
  }
  return out;
}

RunReport run_benchmark(const std::vector<TaskInstance>& instances, const SolverFactory& factory,
                        const RunOptions& opts) {
  if (opts.out_path.empty()) throw std::invalid_argument("run needs an output path");
  RunReport report;
  report.total = instances.size();

  auto records = read_records(opts.out_path);
  std::set<std::string> done;
  for (const auto& r : records)
    if (!r.error) done.insert(r.id);

  std::vector<const TaskInstance*> todo;
  for (const auto& inst : instances) {
    if (done.count(inst.id))
      ++report.skipped;
    else
      todo.push_back(&inst);
  }

  std::ofstream out(opts.out_path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + opts.out_path + " for appending");
  std::mutex write_mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr io_error;

  auto worker = [&] {
    std::unique_ptr<Solver> solver;
    try {
      solver = factory();
    } catch (...) {
      std::lock_guard lock(write_mu);
      if (!io_error) io_error = std::current_exception();
      return;
    }
    for (std::size_t i; (i = next.fetch_add(1)) < todo.size();) {
      auto rec = evaluate_instance(*solver, *todo[i]);
      std::lock_guard lock(write_mu);
      if (io_error) return;
      out << to_json(rec).dump() << '\n';
      out.flush();
      if (!out) {
        io_error = std::make_exception_ptr(std::runtime_error("write to " + opts.out_path + " failed"));
        return;
      }
      ++report.attempted;
      if (rec.error) ++report.errored;
      records.push_back(std::move(rec));
    }
  };

  const std::size_t n = std::max<std::size_t>(1, std::min(opts.concurrency, todo.size()));
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < n && !todo.empty(); ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  out.close();
  if (io_error) std::rethrow_exception(io_error);

  report.summary = summarize(records);
  auto summary_path = opts.summary_path.empty() ? opts.out_path + ".summary.csv" : opts.summary_path;
  std::ofstream(summary_path) << summary_csv(report.summary);
  return report;
}

}  // namespace tmotif
