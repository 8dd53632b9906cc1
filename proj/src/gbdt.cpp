#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "tmotif/dispatcher.hpp"

namespace tmotif {

namespace {

using Row = std::array<double, kNumFeatures>;

double sigmoid(double m) { return 1.0 / (1.0 + std::exp(-std::clamp(m, -30.0, 30.0))); }

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<Row>& x, const std::vector<double>& g, const std::vector<double>& h,
              const GbdtParams& p)
      : x_(x), g_(g), h_(h), p_(p) {}

  Tree build(std::vector<std::size_t> rows) {
    Tree t;
    grow(t, std::move(rows), 0);
    return t;
  }

 private:
  int grow(Tree& t, std::vector<std::size_t> rows, std::size_t depth) {
    double G = 0, H = 0;
    for (auto i : rows) {
      G += g_[i];
      H += h_[i];
    }
    int id = static_cast<int>(t.nodes.size());
    t.nodes.push_back({});
    t.nodes[id].value = -G / (H + p_.lambda) * p_.learning_rate;
    if (depth >= p_.max_depth || rows.size() < 2) return id;

    const double parent = G * G / (H + p_.lambda);
    double best_gain = 1e-12;
    int best_f = -1;
    double best_thr = 0;
    std::vector<std::size_t> order = rows;
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x_[a][f] < x_[b][f]; });
      double gl = 0, hl = 0;
      for (std::size_t k = 1; k < order.size(); ++k) {
        gl += g_[order[k - 1]];
        hl += h_[order[k - 1]];
        double lo = x_[order[k - 1]][f], hi = x_[order[k]][f];
        if (!(lo < hi)) continue;
        double gr = G - gl, hr = H - hl;
        if (hl < p_.min_child_weight || hr < p_.min_child_weight) continue;
        double gain = gl * gl / (hl + p_.lambda) + gr * gr / (hr + p_.lambda) - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_f = static_cast<int>(f);
          best_thr = lo + (hi - lo) / 2;
        }
      }
    }
    if (best_f < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto i : rows) (x_[i][best_f] < best_thr ? left : right).push_back(i);
    t.nodes[id].feature = best_f;
    t.nodes[id].threshold = best_thr;
    int l = grow(t, std::move(left), depth + 1);
    int r = grow(t, std::move(right), depth + 1);
    t.nodes[id].left = l;
    t.nodes[id].right = r;
    return id;
  }

  const std::vector<Row>& x_;
  const std::vector<double>& g_;
  const std::vector<double>& h_;
  const GbdtParams& p_;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void expect_word(std::istream& in, const std::string& word) {
  std::string w;
  if (!(in >> w) || w != word) throw ModelError("model file: expected '" + word + "', got '" + w + "'");
}

template <class T>
T read_value(std::istream& in, const std::string& what) {
  T v{};
  if (!(in >> v)) throw ModelError("model file: bad " + what);
  return v;
}

}  // namespace

double Tree::predict(const std::array<double, kNumFeatures>& x) const {
  int i = 0;
  while (nodes[i].feature >= 0) i = x[nodes[i].feature] < nodes[i].threshold ? nodes[i].left : nodes[i].right;
  return nodes[i].value;
}

double DifficultyModel::margin(const std::array<double, kNumFeatures>& x) const {
  double m = base_score;
  for (const auto& t : trees) m += t.predict(x);
  return m;
}

double DifficultyModel::p_hard(const std::array<double, kNumFeatures>& x) const { return sigmoid(margin(x)); }

std::string DifficultyModel::save() const {
  std::ostringstream out;
  out << "tmotif-gbdt 1\nfeatures " << kNumFeatures;
  for (auto* n : feature_names()) out << ' ' << n;
  out << "\nthreshold " << fmt(threshold) << "\nlearning_rate " << fmt(learning_rate) << "\nbase_score "
      << fmt(base_score) << "\nsamples " << samples << "\nmotifs " << motifs.size();
  for (const auto& m : motifs) out << ' ' << m;
  out << "\ntrees " << trees.size() << '\n';
  for (const auto& t : trees) {
    out << "tree " << t.nodes.size() << '\n';
    for (const auto& n : t.nodes)
      out << n.feature << ' ' << fmt(n.threshold) << ' ' << n.left << ' ' << n.right << ' ' << fmt(n.value) << '\n';
  }
  return out.str();
}

DifficultyModel DifficultyModel::load(std::string_view text) {
  std::istringstream in{std::string(text)};
  DifficultyModel m;
  expect_word(in, "tmotif-gbdt");
  if (read_value<int>(in, "version") != 1) throw ModelError("model file: unsupported version");
  expect_word(in, "features");
  if (read_value<std::size_t>(in, "feature count") != kNumFeatures) throw ModelError("model file: feature arity");
  for (auto* n : feature_names()) expect_word(in, n);
  expect_word(in, "threshold");
  m.threshold = read_value<double>(in, "threshold");
  expect_word(in, "learning_rate");
  m.learning_rate = read_value<double>(in, "learning_rate");
  expect_word(in, "base_score");
  m.base_score = read_value<double>(in, "base_score");
  expect_word(in, "samples");
  m.samples = read_value<std::size_t>(in, "samples");
  expect_word(in, "motifs");
  m.motifs.resize(read_value<std::size_t>(in, "motif count"));
  for (auto& s : m.motifs) s = read_value<std::string>(in, "motif name");
  expect_word(in, "trees");
  m.trees.resize(read_value<std::size_t>(in, "tree count"));
  for (auto& t : m.trees) {
    expect_word(in, "tree");
    t.nodes.resize(read_value<std::size_t>(in, "node count"));
    if (t.nodes.empty()) throw ModelError("model file: empty tree");
    for (auto& n : t.nodes) {
      n.feature = read_value<int>(in, "feature index");
      n.threshold = read_value<double>(in, "threshold");
      n.left = read_value<int>(in, "child");
      n.right = read_value<int>(in, "child");
      n.value = read_value<double>(in, "leaf value");
    }
    const int size = static_cast<int>(t.nodes.size());
    for (const auto& n : t.nodes) {
      if (n.feature >= static_cast<int>(kNumFeatures)) throw ModelError("model file: feature index out of range");
      if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size))
        throw ModelError("model file: child index out of range");
    }
  }
  return m;
}

void DifficultyModel::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!(out << save())) throw ModelError("cannot write " + path);
}

DifficultyModel DifficultyModel::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return load(s.str());
}

double accuracy(const DifficultyModel& model, const std::vector<LabeledRow>& rows) {
  if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t ok = 0;
  for (const auto& r : rows) ok += (model.p_hard(r.features) >= model.threshold) == (r.label == 1);
  return static_cast<double>(ok) / static_cast<double>(rows.size());
}

TrainReport train_classifier(const std::vector<LabeledRow>& rows, const GbdtParams& params) {
  if (params.n_trees == 0 || params.learning_rate <= 0 || params.lambda < 0 || params.subsample <= 0 ||
      params.subsample > 1 || params.holdout < 0 || params.holdout >= 1)
    throw ModelError("invalid boosting parameters");
  std::size_t pos = 0;
  for (const auto& r : rows) pos += r.label == 1;
  if (pos == 0 || pos == rows.size()) throw ModelError("training rows must contain both labels");

  std::vector<std::size_t> perm(rows.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(params.seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n_hold = static_cast<std::size_t>(std::floor(static_cast<double>(rows.size()) * params.holdout));
  std::vector<LabeledRow> train, hold;
  for (std::size_t i = 0; i < perm.size(); ++i) (i < perm.size() - n_hold ? train : hold).push_back(rows[perm[i]]);

  std::vector<Row> x;
  std::vector<double> y;
  for (const auto& r : train) {
    x.push_back(r.features.values());
    y.push_back(r.label == 1 ? 1.0 : 0.0);
  }
  const double rate = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  if (rate == 0.0 || rate == 1.0) throw ModelError("training split lost one of the labels; lower the holdout");

  TrainReport rep;
  auto& m = rep.model;
  m.base_score = std::log(rate / (1 - rate));
  m.learning_rate = params.learning_rate;
  m.samples = train.size();

  std::vector<double> margin(x.size(), m.base_score), g(x.size()), h(x.size());
  std::bernoulli_distribution keep(params.subsample);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      double p = sigmoid(margin[i]);
      g[i] = p - y[i];
      h[i] = std::max(p * (1 - p), 1e-16);
    }
    std::vector<std::size_t> sample;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (params.subsample >= 1.0 || keep(rng)) sample.push_back(i);
    if (sample.empty()) sample.push_back(0);
    auto tree = TreeBuilder(x, g, h, params).build(std::move(sample));
    for (std::size_t i = 0; i < x.size(); ++i) margin[i] += tree.predict(x[i]);
    m.trees.push_back(std::move(tree));
  }
  rep.n_train = train.size();
  rep.n_holdout = hold.size();
  rep.train_accuracy = accuracy(m, train);
  rep.holdout_accuracy = accuracy(m, hold);
  return rep;
}

}  // namespace tmotif
