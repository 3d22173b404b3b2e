#include "gridshap/gbt.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

namespace gridshap {
namespace {

using nlohmann::json;

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  int left_count = 0;
};

// Candidate threshold between two consecutive distinct sorted values. The
// midpoint is nudged up to the higher value when rounding collapses it onto
// the lower one, so "x < threshold" always separates the two.
double split_threshold(double lo, double hi) {
  double t = lo + (hi - lo) * 0.5;
  if (!(t > lo)) t = hi;
  if (t > hi) t = hi;
  return t;
}

class TreeBuilder {
public:
  TreeBuilder(const Matrix& columns, std::span<const double> g, std::span<const double> h,
              const Hyperparams& hp)
      : columns_(columns), g_(g), h_(h), hp_(hp) {}

  std::unique_ptr<TreeNode> build() {
    const int n = static_cast<int>(g_.size());
    const int f = columns_.rows;  // columns_ is stored feature-major

    // Per-feature row order, sorted once and partitioned as the tree grows.
    std::vector<std::vector<int>> order(static_cast<size_t>(f));
    for (int c = 0; c < f; ++c) {
      auto& ord = order[static_cast<size_t>(c)];
      ord.resize(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) ord[static_cast<size_t>(i)] = i;
      const double* col = columns_.row(c).data();
      std::sort(ord.begin(), ord.end(), [col](int a, int b) {
        if (col[a] != col[b]) return col[a] < col[b];
        return a < b;
      });
    }

    double g_sum = 0.0, h_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      g_sum += g_[static_cast<size_t>(i)];
      h_sum += h_[static_cast<size_t>(i)];
    }
    return grow(std::move(order), n, g_sum, h_sum, 0);
  }

private:
  std::unique_ptr<TreeNode> grow(std::vector<std::vector<int>> order, int n, double g_sum,
                                 double h_sum, int depth) {
    auto node = std::make_unique<TreeNode>();
    SplitChoice best;
    if (depth < hp_.max_depth && n >= 2) best = find_best_split(order, g_sum, h_sum);

    if (!best.found) {
      node->is_leaf = true;
      node->weight = -hp_.learning_rate * g_sum / (h_sum + hp_.lambda);
      return node;
    }

    const double* col = columns_.row(best.feature).data();
    std::vector<char> goes_left(columns_.cols, 0);
    double gl = 0.0, hl = 0.0;
    for (int i : order[static_cast<size_t>(best.feature)]) {
      if (col[i] < best.threshold) {
        goes_left[static_cast<size_t>(i)] = 1;
        gl += g_[static_cast<size_t>(i)];
        hl += h_[static_cast<size_t>(i)];
      }
    }

    // Stable partition of every feature's order into the two children.
    const int f = columns_.rows;
    std::vector<std::vector<int>> left_order(static_cast<size_t>(f));
    std::vector<std::vector<int>> right_order(static_cast<size_t>(f));
    for (int c = 0; c < f; ++c) {
      auto& lo = left_order[static_cast<size_t>(c)];
      auto& ro = right_order[static_cast<size_t>(c)];
      lo.reserve(static_cast<size_t>(best.left_count));
      ro.reserve(static_cast<size_t>(n - best.left_count));
      for (int i : order[static_cast<size_t>(c)]) {
        if (goes_left[static_cast<size_t>(i)])
          lo.push_back(i);
        else
          ro.push_back(i);
      }
      order[static_cast<size_t>(c)].clear();
      order[static_cast<size_t>(c)].shrink_to_fit();
    }

    node->is_leaf = false;
    node->feature = best.feature;
    node->threshold = best.threshold;
    node->default_left = true;
    node->left = grow(std::move(left_order), best.left_count, gl, hl, depth + 1);
    node->right =
        grow(std::move(right_order), n - best.left_count, g_sum - gl, h_sum - hl, depth + 1);
    return node;
  }

  // Exact greedy search over midpoints of consecutive distinct values.
  // Features and thresholds are scanned in ascending order with a strict
  // improvement test, so equal gains resolve to the lower feature index and
  // lower threshold.
  SplitChoice find_best_split(const std::vector<std::vector<int>>& order, double g_sum,
                              double h_sum) const {
    SplitChoice best;
    const double parent_score = g_sum * g_sum / (h_sum + hp_.lambda);

    for (int c = 0; c < columns_.rows; ++c) {
      const double* col = columns_.row(c).data();
      const auto& ord = order[static_cast<size_t>(c)];
      double gl = 0.0, hl = 0.0;
      for (size_t i = 0; i + 1 < ord.size(); ++i) {
        const int row = ord[i];
        gl += g_[static_cast<size_t>(row)];
        hl += h_[static_cast<size_t>(row)];
        const double lo = col[row];
        const double hi = col[ord[i + 1]];
        if (!(hi > lo)) continue;

        const double hr = h_sum - hl;
        if (hl < hp_.min_child_weight || hr < hp_.min_child_weight) continue;
        const double gr = g_sum - gl;
        const double gain = 0.5 * (gl * gl / (hl + hp_.lambda) + gr * gr / (hr + hp_.lambda) -
                                   parent_score) -
                            hp_.gamma;
        if (gain <= 0.0) continue;
        if (!best.found || gain > best.gain) {
          best.found = true;
          best.feature = c;
          best.threshold = split_threshold(lo, hi);
          best.gain = gain;
          best.left_count = static_cast<int>(i) + 1;
        }
      }
    }
    return best;
  }

  const Matrix& columns_;
  std::span<const double> g_;
  std::span<const double> h_;
  const Hyperparams& hp_;
};

double route_weight(const TreeNode* node, std::span<const double> row) {
  while (!node->is_leaf)
    node = row[static_cast<size_t>(node->feature)] < node->threshold ? node->left.get()
                                                                     : node->right.get();
  return node->weight;
}

json node_to_json(const TreeNode& node) {
  json j;
  if (node.is_leaf) {
    j["weight"] = node.weight;
    return j;
  }
  j["feature"] = node.feature;
  j["threshold"] = node.threshold;
  j["default_left"] = node.default_left;
  j["left"] = node_to_json(*node.left);
  j["right"] = node_to_json(*node.right);
  return j;
}

std::unique_ptr<TreeNode> node_from_json(const json& j, int feature_count) {
  auto node = std::make_unique<TreeNode>();
  if (j.contains("weight")) {
    node->is_leaf = true;
    node->weight = j.at("weight").get<double>();
    return node;
  }
  node->is_leaf = false;
  node->feature = j.at("feature").get<int>();
  if (node->feature < 0 || node->feature >= feature_count)
    fail(ErrorCode::CacheFormat, fmt::format("tree references feature {}", node->feature));
  node->threshold = j.at("threshold").get<double>();
  node->default_left = j.at("default_left").get<bool>();
  node->left = node_from_json(j.at("left"), feature_count);
  node->right = node_from_json(j.at("right"), feature_count);
  return node;
}

}  // namespace

void Hyperparams::validate() const {
  if (rounds < 0) fail(ErrorCode::InvalidArgument, "rounds must be >= 0");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0))
    fail(ErrorCode::InvalidArgument, "learning_rate must be in (0,1]");
  if (max_depth < 0) fail(ErrorCode::InvalidArgument, "max_depth must be >= 0");
  if (lambda < 0.0) fail(ErrorCode::InvalidArgument, "lambda must be >= 0");
  if (gamma < 0.0) fail(ErrorCode::InvalidArgument, "gamma must be >= 0");
  if (min_child_weight < 0.0) fail(ErrorCode::InvalidArgument, "min_child_weight must be >= 0");
  if (!(base_score > 0.0 && base_score < 1.0))
    fail(ErrorCode::InvalidArgument, "base_score must be in (0,1)");
}

std::unique_ptr<TreeNode> TreeNode::clone() const {
  auto copy = std::make_unique<TreeNode>();
  copy->is_leaf = is_leaf;
  copy->weight = weight;
  copy->feature = feature;
  copy->threshold = threshold;
  copy->default_left = default_left;
  if (left) copy->left = left->clone();
  if (right) copy->right = right->clone();
  return copy;
}

TreeEnsemble train(const EventTable& train_table, const std::vector<int>& codes,
                   const Hyperparams& hp, std::uint64_t seed) {
  hp.validate();
  const int n = train_table.rows();
  if (static_cast<int>(codes.size()) != n)
    fail(ErrorCode::LengthMismatch,
         fmt::format("{} codes for {} rows", codes.size(), n));

  bool has[2] = {false, false};
  for (int code : codes) {
    if (code != 0 && code != 1)
      fail(ErrorCode::CodeOutOfRange, fmt::format("code {} in binary training", code));
    has[code] = true;
  }
  // Pure-class input is meaningful at depth 0 (intercept-style leaves; the
  // gradients are identical so no split could help anyway). With real trees
  // requested it almost always means pair extraction upstream went wrong.
  if ((!has[0] || !has[1]) && hp.max_depth > 0)
    fail(ErrorCode::SingleClassInput, "training set must contain both classes");
  for (double v : train_table.values.data)
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteFeature, "training matrix has non-finite cells");

  // Feature-major copy of the matrix; split scans walk one column at a time.
  const int f = train_table.cols();
  Matrix columns(f, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < f; ++c) columns.at(c, r) = train_table.values.at(r, c);

  TreeEnsemble model;
  model.base_margin = logit(hp.base_score);
  model.feature_count = f;
  model.feature_names = train_table.feature_names();
  model.hyperparams = hp;
  model.seed = seed;

  std::vector<double> margins(static_cast<size_t>(n), model.base_margin);
  std::vector<double> g(static_cast<size_t>(n));
  std::vector<double> h(static_cast<size_t>(n));

  for (int round = 0; round < hp.rounds; ++round) {
    for (int i = 0; i < n; ++i) {
      const double p = sigmoid(margins[static_cast<size_t>(i)]);
      g[static_cast<size_t>(i)] = p - static_cast<double>(codes[static_cast<size_t>(i)]);
      h[static_cast<size_t>(i)] = p * (1.0 - p);
    }
    TreeBuilder builder(columns, g, h, hp);
    auto tree = builder.build();
    for (int i = 0; i < n; ++i)
      margins[static_cast<size_t>(i)] += route_weight(tree.get(), train_table.values.row(i));
    model.trees.push_back(std::move(tree));
  }
  return model;
}

double predict_margin(const TreeEnsemble& m, std::span<const double> row) {
  return predict_margin_prefix(m, row, static_cast<int>(m.trees.size()));
}

double predict_margin_prefix(const TreeEnsemble& m, std::span<const double> row, int n_trees) {
  if (static_cast<int>(row.size()) != m.feature_count)
    fail(ErrorCode::DimensionMismatch,
         fmt::format("row has {} values, model expects {}", row.size(), m.feature_count));
  double margin = m.base_margin;
  const int limit = std::min<int>(n_trees, static_cast<int>(m.trees.size()));
  for (int t = 0; t < limit; ++t) margin += route_weight(m.trees[static_cast<size_t>(t)].get(), row);
  return margin;
}

double predict_proba(const TreeEnsemble& m, std::span<const double> row) {
  return sigmoid(predict_margin(m, row));
}

int predict_class(const TreeEnsemble& m, std::span<const double> row, double cutoff) {
  return predict_proba(m, row) >= cutoff ? 1 : 0;
}

std::string ensemble_to_json(const TreeEnsemble& m) {
  json j;
  json hp;
  hp["rounds"] = m.hyperparams.rounds;
  hp["learning_rate"] = m.hyperparams.learning_rate;
  hp["max_depth"] = m.hyperparams.max_depth;
  hp["lambda"] = m.hyperparams.lambda;
  hp["gamma"] = m.hyperparams.gamma;
  hp["min_child_weight"] = m.hyperparams.min_child_weight;
  hp["base_score"] = m.hyperparams.base_score;
  j["hyperparams"] = hp;
  j["base_margin"] = m.base_margin;
  j["feature_count"] = m.feature_count;
  j["feature_names"] = m.feature_names;
  j["label_classes"] = m.label_classes;
  j["seed"] = m.seed;
  json trees = json::array();
  for (const auto& t : m.trees) trees.push_back(node_to_json(*t));
  j["trees"] = std::move(trees);
  return j.dump(2);
}

TreeEnsemble ensemble_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::CacheFormat, "model file is not valid JSON");
  TreeEnsemble m;
  const json& hp = j.at("hyperparams");
  m.hyperparams.rounds = hp.at("rounds").get<int>();
  m.hyperparams.learning_rate = hp.at("learning_rate").get<double>();
  m.hyperparams.max_depth = hp.at("max_depth").get<int>();
  m.hyperparams.lambda = hp.at("lambda").get<double>();
  m.hyperparams.gamma = hp.at("gamma").get<double>();
  m.hyperparams.min_child_weight = hp.at("min_child_weight").get<double>();
  m.hyperparams.base_score = hp.at("base_score").get<double>();
  m.base_margin = j.at("base_margin").get<double>();
  m.feature_count = j.at("feature_count").get<int>();
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.label_classes = j.at("label_classes").get<std::vector<std::string>>();
  m.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& t : j.at("trees")) m.trees.push_back(node_from_json(t, m.feature_count));
  return m;
}

void save_ensemble(const TreeEnsemble& m, const std::string& path) {
  std::ofstream f(path, std::ios::trunc | std::ios::binary);
  if (!f) fail(ErrorCode::IoFailure, fmt::format("cannot write '{}'", path));
  f << ensemble_to_json(m) << '\n';
}

TreeEnsemble load_ensemble(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoFailure, fmt::format("cannot open '{}'", path));
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return ensemble_from_json(text);
}

int tree_leaf_count(const TreeNode& node) {
  if (node.is_leaf) return 1;
  return tree_leaf_count(*node.left) + tree_leaf_count(*node.right);
}

int tree_depth(const TreeNode& node) {
  if (node.is_leaf) return 0;
  return 1 + std::max(tree_depth(*node.left), tree_depth(*node.right));
}

}  // namespace gridshap
