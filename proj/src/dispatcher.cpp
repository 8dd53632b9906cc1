#include "tmotif/dispatcher.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "tmotif/generator.hpp"

namespace tmotif {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

const char* kLabelHeader = "num_edges,cyclomatic,ratio_eq_2,ratio_ge_3,edge_locality,label";

}  // namespace

LabelDataset build_label_dataset(const std::vector<TaskInstance>& instances, const std::vector<RunRecord>& records) {
  std::map<std::string, const RunRecord*> latest;
  for (const auto& r : records) latest[r.id] = &r;
  LabelDataset ds;
  for (const auto& inst : instances) {
    auto it = latest.find(inst.id);
    if (it == latest.end() || it->second->error) {
      ++ds.skipped;
      continue;
    }
    ds.rows.push_back({inst.id, extract_features(inst.graph), it->second->score < 1.0 - 1e-9 ? 1 : 0});
  }
  return ds;
}

std::string label_csv(const std::vector<LabeledRow>& rows) {
  std::ostringstream out;
  out << kLabelHeader << '\n';
  for (const auto& r : rows) {
    const auto& f = r.features;
    out << f.num_edges << ',' << f.cyclomatic << ',' << num(f.ratio_eq_2) << ',' << num(f.ratio_ge_3) << ','
        << num(f.edge_locality) << ',' << r.label << '\n';
  }
  return out.str();
}

std::vector<LabeledRow> parse_label_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.substr(0, line.find_last_not_of("\r") + 1) != kLabelHeader)
    throw ModelError(std::string("label CSV must start with ") + kLabelHeader);
  std::vector<LabeledRow> rows;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() != kNumFeatures + 1) throw ModelError("label CSV line " + std::to_string(lineno) + ": expected 6 fields");
    try {
      LabeledRow r;
      r.features.num_edges = std::stoull(cells[0]);
      r.features.cyclomatic = std::stoll(cells[1]);
      r.features.ratio_eq_2 = std::stod(cells[2]);
      r.features.ratio_ge_3 = std::stod(cells[3]);
      r.features.edge_locality = std::stod(cells[4]);
      r.label = std::stoi(cells[5]);
      if (r.label != 0 && r.label != 1) throw std::invalid_argument("label");
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ModelError("label CSV line " + std::to_string(lineno) + ": bad value");
    }
  }
  return rows;
}

std::string to_string(Route r) { return r == Route::Agent ? "agent" : "direct"; }

RouteDecision predict_difficulty(const DifficultyModel& model, const std::vector<double>& features) {
  if (features.size() != kNumFeatures)
    throw ModelError("expected " + std::to_string(kNumFeatures) + " features, got " + std::to_string(features.size()));
  std::array<double, kNumFeatures> x{};
  std::copy(features.begin(), features.end(), x.begin());
  double p = model.p_hard(x);
  return {p, p >= model.threshold ? Route::Agent : Route::Direct};
}

RouteDecision predict_difficulty(const DifficultyModel& model, const FeatureVector& features) {
  auto v = features.values();
  return predict_difficulty(model, std::vector<double>(v.begin(), v.end()));
}

RoutePolicy model_policy(const DifficultyModel& model, std::optional<double> threshold) {
  auto m = std::make_shared<DifficultyModel>(model);
  if (threshold) m->threshold = *threshold;
  return [m](const TaskInstance& inst) { return predict_difficulty(*m, extract_features(inst.graph)); };
}

RoutePolicy random_policy(double agent_fraction, std::uint64_t seed) {
  return [agent_fraction, seed](const TaskInstance& inst) {
    double u = static_cast<double>(derive_seed(seed, fnv1a(inst.id)) >> 11) * 0x1.0p-53;
    return RouteDecision{u, u < agent_fraction ? Route::Agent : Route::Direct};
  };
}

nlohmann::ordered_json to_json(const RoutedRecord& r) {
  auto j = to_json(r.record);
  j["route"] = to_string(r.decision.route);
  j["p_hard"] = r.decision.p_hard;
  if (r.fell_back) j["fell_back"] = true;
  return j;
}

RoutedRecord route_and_solve(const TaskInstance& inst, const RoutePolicy& policy, Solver& direct, Solver& agent,
                             bool fallback) {
  RoutedRecord out;
  out.decision = policy(inst);
  const bool to_agent = out.decision.route == Route::Agent;
  out.record = evaluate_instance(to_agent ? agent : direct, inst);
  if (out.record.error && fallback) {
    out.record = evaluate_instance(to_agent ? direct : agent, inst);
    out.fell_back = true;
  }
  return out;
}

RouteSummary summarize_routes(const std::vector<RoutedRecord>& records) {
  RouteSummary s;
  s.n = records.size();
  std::size_t with_tokens = 0;
  double score = 0, tokens = 0;
  for (const auto& r : records) {
    s.to_agent += r.decision.route == Route::Agent;
    s.errored += r.record.error.has_value();
    score += r.record.score;
    if (auto t = r.record.usage.total()) {
      ++with_tokens;
      tokens += static_cast<double>(*t);
    }
  }
  if (s.n) s.accuracy = score / static_cast<double>(s.n);
  if (with_tokens) s.avg_tokens = tokens / static_cast<double>(with_tokens);
  return s;
}

std::vector<RoutedRecord> route_benchmark(const std::vector<TaskInstance>& instances, const RoutePolicy& policy,
                                          const SolverFactory& direct, const SolverFactory& agent,
                                          const RouteOptions& opts) {
  std::vector<RoutedRecord> out(instances.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&] {
    try {
      auto d = direct();
      auto a = agent();
      for (std::size_t i; (i = next.fetch_add(1)) < instances.size();)
        out[i] = route_and_solve(instances[i], policy, *d, *a, opts.fallback);
    } catch (...) {
      std::lock_guard lock(mu);
      if (!failure) failure = std::current_exception();
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(opts.concurrency, instances.size()));
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < n && !instances.empty(); ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  if (!opts.out_path.empty()) {
    std::ofstream f(opts.out_path);
    for (const auto& r : out) f << to_json(r).dump() << '\n';
    if (!f) throw std::runtime_error("write to " + opts.out_path + " failed");
  }
  return out;
}

}  // namespace tmotif
