#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tmotif/graph.hpp"
#include "tmotif/motif.hpp"
#include "tmotif/task.hpp"

namespace tmotif {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The single PRNG used by every generator: 64-bit Mersenne Twister seeded
/// from splitmix64-derived seeds.
using Rng = std::mt19937_64;

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// ER(n, p) (or exactly `m` edges), one Add per edge uniform in [0, T-1], and
/// with probability q one Delete uniform in [t_add + 1, T]. Events are sorted
/// by (t, Add before Delete, pair).
DynamicGraph gen_dynamic_graph(const GenParams& params);

TaskInstance gen_classification_instance(const std::string& motif, const GenParams& params, bool positive,
                                         std::optional<Violation> violation = std::nullopt);
TaskInstance gen_detection_instance(const std::string& motif, const GenParams& params);
TaskInstance gen_construction_instance(const std::string& motif, const GenParams& params);
/// Level-2 graph shared by multi-detect, occurrence and multi-count.
TaskInstance gen_level2_instance(TaskKind task, const GenParams& params);
TaskInstance gen_level0_instance(TaskKind task, const GenParams& params);

/// Default parameters for (task, motif) from the settings tables.
GenParams default_params(TaskKind task, const std::string& motif, std::uint64_t seed);

struct BatchRequest {
  TaskKind task = TaskKind::Detection;
  std::string motif;  // ignored for Level 0 / Level 2
  GenParams params;   // params.seed is the base seed
  std::size_t count = 20;
};

/// Generates `count` instances in parallel. Instance i uses derive_seed(base, i),
/// so output is independent of thread count. Classification batches are
/// balanced: first half positive, negatives cycle structural/temporal/duration.
std::vector<TaskInstance> generate_batch(const BatchRequest& req);

struct SweepRow {
  std::size_t n;
  Timestamp t;
  Timestamp w;
  double mean_count;
};

struct SweepGrid {
  std::vector<std::size_t> n;
  std::vector<Timestamp> t;
  std::vector<Timestamp> w;
  std::size_t seeds = 10;
  std::uint64_t base_seed = 0;
  double p = settings::kEdgeProb;
  double del_prob = settings::kDefaultDeleteProb;
};

/// Mean motif count per grid cell over seeds base_seed .. base_seed + seeds - 1.
/// The graph for (N, T, seed) does not depend on W.
std::vector<SweepRow> parameter_sweep(const std::string& motif, const SweepGrid& grid, bool parallel = true);
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct EgoOptions {
  std::optional<NodeId> center;
  std::size_t hops = 1;
  std::size_t node_cap = 20;
  std::uint64_t seed = 0;
};

struct TemporalEdge {
  NodeId u;
  NodeId v;
  Timestamp t;
};

struct EgoSample {
  DynamicGraph graph;
  std::vector<NodeId> original_ids;  // new id -> source id
  Timestamp time_offset = 0;         // subtracted from every source timestamp
};

/// Whitespace-separated `u v t` lines; blank lines and '#' comments skipped.
std::vector<TemporalEdge> read_edge_file(const std::string& path);
/// BFS ego-graph around a given or sampled center, induced on the visited
/// nodes; nodes relabelled 0..n-1 in BFS order, timestamps shifted so the
/// minimum is 0, all events Add.
EgoSample ego_sample(const std::vector<TemporalEdge>& edges, const EgoOptions& opts);

}  // namespace tmotif
