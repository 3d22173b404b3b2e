#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gridshap/dataset.hpp"

namespace gridshap {

struct Hyperparams {
  int rounds = 200;
  double learning_rate = 0.1;
  int max_depth = 4;
  double lambda = 1.0;            // leaf weight L2 penalty
  double gamma = 0.0;             // minimum split gain
  double min_child_weight = 1.0;  // minimum hessian sum per child
  double base_score = 0.5;

  void validate() const;
};

// Split routes left when x[feature] < threshold (strict). default_left is
// carried for forward compatibility; cleaned tables have no missing values.
struct TreeNode {
  bool is_leaf = true;
  double weight = 0.0;  // leaf value, learning rate already applied

  int feature = -1;
  double threshold = 0.0;
  bool default_left = true;
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;

  std::unique_ptr<TreeNode> clone() const;
};

struct TreeEnsemble {
  std::vector<std::unique_ptr<TreeNode>> trees;
  double base_margin = 0.0;  // logit(base_score)
  int feature_count = 0;
  std::vector<std::string> feature_names;
  std::vector<std::string> label_classes;  // code order
  Hyperparams hyperparams;
  std::uint64_t seed = 0;
};

// Second-order boosting with logistic loss: per round, g = p - y and
// h = p (1 - p) at the current margins, one tree grown by exact greedy split
// search, leaf weight -learning_rate * G / (H + lambda).
TreeEnsemble train(const EventTable& train_table, const std::vector<int>& codes,
                   const Hyperparams& hp, std::uint64_t seed = 0);

double predict_margin(const TreeEnsemble& m, std::span<const double> row);
double predict_proba(const TreeEnsemble& m, std::span<const double> row);
int predict_class(const TreeEnsemble& m, std::span<const double> row, double cutoff = 0.5);

// Margin using only the first n_trees trees (round-by-round diagnostics).
double predict_margin_prefix(const TreeEnsemble& m, std::span<const double> row, int n_trees);

std::string ensemble_to_json(const TreeEnsemble& m);
TreeEnsemble ensemble_from_json(const std::string& text);
void save_ensemble(const TreeEnsemble& m, const std::string& path);
TreeEnsemble load_ensemble(const std::string& path);

int tree_leaf_count(const TreeNode& node);
int tree_depth(const TreeNode& node);

}  // namespace gridshap
