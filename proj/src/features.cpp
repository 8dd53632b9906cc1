#include <cmath>
#include <map>

#include "tmotif/dispatcher.hpp"

namespace tmotif {

std::array<double, kNumFeatures> FeatureVector::values() const {
  return {static_cast<double>(num_edges), static_cast<double>(cyclomatic), ratio_eq_2, ratio_ge_3, edge_locality};
}

const std::array<const char*, kNumFeatures>& feature_names() {
  static const std::array<const char*, kNumFeatures> names{"num_edges", "cyclomatic", "ratio_eq_2", "ratio_ge_3",
                                                           "edge_locality"};
  return names;
}

FeatureVector extract_features(const DynamicGraph& g) {
  FeatureVector f;
  if (g.empty()) return f;
  f.num_edges = g.size();
  auto sp = static_projection(g);
  const auto n = static_cast<long long>(sp.nodes.size());
  f.cyclomatic = static_cast<long long>(sp.edges.size()) - n + static_cast<long long>(sp.components);

  std::map<NodeId, std::vector<std::size_t>> incident;
  for (std::size_t i = 0; i < g.size(); ++i) {
    incident[g.events()[i].u].push_back(i);
    incident[g.events()[i].v].push_back(i);
  }
  std::size_t eq2 = 0, ge3 = 0, core = 0;
  double spread = 0.0;
  for (NodeId v : sp.nodes) {
    auto d = g.neighbors(v).size();
    if (d == 2) ++eq2;
    if (d >= 3) ++ge3;
    if (d < 2) continue;
    ++core;
    const auto& s = incident[v];
    double mean = 0.0;
    for (auto i : s) mean += static_cast<double>(i);
    mean /= static_cast<double>(s.size());
    double var = 0.0;
    for (auto i : s) var += (static_cast<double>(i) - mean) * (static_cast<double>(i) - mean);
    spread += std::sqrt(var / static_cast<double>(s.size()));
  }
  f.ratio_eq_2 = static_cast<double>(eq2) / static_cast<double>(n);
  f.ratio_ge_3 = static_cast<double>(ge3) / static_cast<double>(n);
  f.edge_locality = core ? spread / static_cast<double>(core) : 0.0;
  return f;
}

}  // namespace tmotif
