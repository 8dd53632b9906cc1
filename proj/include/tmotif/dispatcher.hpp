#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tmotif/graph.hpp"
#include "tmotif/harness.hpp"
#include "tmotif/task.hpp"

namespace tmotif {

constexpr std::size_t kNumFeatures = 5;

struct FeatureVector {
  std::size_t num_edges = 0;  // every event, Adds and Deletes
  long long cyclomatic = 0;   // E - N + P over the Add projection
  double ratio_eq_2 = 0.0;    // nodes with exactly two distinct neighbours
  double ratio_ge_3 = 0.0;
  double edge_locality = 0.0;

  std::array<double, kNumFeatures> values() const;
};

const std::array<const char*, kNumFeatures>& feature_names();

FeatureVector extract_features(const DynamicGraph& g);

struct LabeledRow {
  std::string id;
  FeatureVector features;
  int label = 0;  // 1 = the direct path got it wrong
};

struct LabelDataset {
  std::vector<LabeledRow> rows;
  std::size_t skipped = 0;  // instances without a usable record
};

/// Joins instances with direct-path records (latest per id); a record counts
/// as correct only with score 1. Errored records are treated as missing.
LabelDataset build_label_dataset(const std::vector<TaskInstance>& instances, const std::vector<RunRecord>& records);

std::string label_csv(const std::vector<LabeledRow>& rows);
/// Reads the CSV written by label_csv; ids are left empty.
std::vector<LabeledRow> parse_label_csv(const std::string& text);

struct GbdtParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 3;
  double learning_rate = 0.1;
  double lambda = 1.0;            // L2 on leaf weights
  double min_child_weight = 1e-3;  // hessian sum per child
  double subsample = 1.0;
  double holdout = 0.2;
  std::uint64_t seed = 0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;     // x[feature] < threshold
  int right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;
  double predict(const std::array<double, kNumFeatures>& x) const;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DifficultyModel {
 public:
  double base_score = 0.0;
  double learning_rate = 0.1;
  double threshold = 0.5;
  std::vector<Tree> trees;
  std::size_t samples = 0;
  std::vector<std::string> motifs;

  double margin(const std::array<double, kNumFeatures>& x) const;
  double p_hard(const FeatureVector& f) const { return p_hard(f.values()); }
  double p_hard(const std::array<double, kNumFeatures>& x) const;

  std::string save() const;
  static DifficultyModel load(std::string_view text);
  void save_file(const std::string& path) const;
  static DifficultyModel load_file(const std::string& path);
};

struct TrainReport {
  DifficultyModel model;
  std::size_t n_train = 0;
  std::size_t n_holdout = 0;
  double train_accuracy = 0.0;
  double holdout_accuracy = 0.0;  // NaN without a holdout split
};

/// Logistic-loss gradient boosting with second-order leaf weights.
/// Rows are shuffled with `seed` and the last `holdout` fraction is held out.
TrainReport train_classifier(const std::vector<LabeledRow>& rows, const GbdtParams& params = {});

double accuracy(const DifficultyModel& model, const std::vector<LabeledRow>& rows);

enum class Route { Direct, Agent };
std::string to_string(Route r);

struct RouteDecision {
  double p_hard = 0.0;
  Route route = Route::Direct;
};

RouteDecision predict_difficulty(const DifficultyModel& model, const std::vector<double>& features);
RouteDecision predict_difficulty(const DifficultyModel& model, const FeatureVector& features);

using RoutePolicy = std::function<RouteDecision(const TaskInstance&)>;

/// The trained model, with its threshold overridden when given.
RoutePolicy model_policy(const DifficultyModel& model, std::optional<double> threshold = std::nullopt);
/// Sends a fixed fraction to the agent, chosen by a hash of the id and seed.
RoutePolicy random_policy(double agent_fraction, std::uint64_t seed);

struct RoutedRecord {
  RunRecord record;
  RouteDecision decision;
  bool fell_back = false;
};

nlohmann::ordered_json to_json(const RoutedRecord& r);

struct RouteOptions {
  bool fallback = false;  // retry on the other path when the chosen one errors
  std::size_t concurrency = 4;
  std::string out_path;   // JSONL, optional
};

/// Runs exactly one path per instance (two only with fallback on an error).
RoutedRecord route_and_solve(const TaskInstance& inst, const RoutePolicy& policy, Solver& direct, Solver& agent,
                             bool fallback = false);

struct RouteSummary {
  std::size_t n = 0;
  std::size_t to_agent = 0;
  std::size_t errored = 0;
  double accuracy = 0.0;
  double avg_tokens = 0.0;  // over records that report usage
};

RouteSummary summarize_routes(const std::vector<RoutedRecord>& records);

/// Routes every instance in parallel; results keep the input order.
std::vector<RoutedRecord> route_benchmark(const std::vector<TaskInstance>& instances, const RoutePolicy& policy,
                                          const SolverFactory& direct, const SolverFactory& agent,
                                          const RouteOptions& opts = {});

}  // namespace tmotif
