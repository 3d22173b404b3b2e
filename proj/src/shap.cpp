#include "gridshap/shap.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>

namespace gridshap {
namespace {

// Interventional Shapley values decompose per (tree, leaf, background row).
// A leaf is reached by the hybrid input (explained row on coalition S,
// background row elsewhere) iff every feature used on its path is satisfied
// by whichever side supplies it. Classifying each path feature by whether the
// explained row (x) and the background row (b) pass all of its splits leaves
// three live cases:
//
//   x passes, b passes  -> feature irrelevant to this leaf
//   x passes, b fails   -> feature must be inside S   (set P, size p)
//   x fails,  b passes  -> feature must be outside S  (set N, size q)
//
// (both fail prunes the subtree). Reachability is then an AND over P and
// negated N, and the Shapley value of that conjunction game is
//   phi_j = +w * (p-1)! q! / (p+q)!   for j in P
//   phi_j = -w * p! (q-1)! / (p+q)!   for j in N
// which this walker accumulates over leaves, trees, and background rows.
class LeafPathWalker {
public:
  LeafPathWalker(int feature_count, std::span<const double> x, std::span<double> phi)
      : x_(x), phi_(phi), depth_on_path_(static_cast<size_t>(feature_count), 0),
        x_ok_(static_cast<size_t>(feature_count), 1), b_ok_(static_cast<size_t>(feature_count), 1) {
    factorials_[0] = 1.0;
    for (size_t i = 1; i < factorials_.size(); ++i)
      factorials_[i] = factorials_[i - 1] * static_cast<double>(i);
  }

  void run(const TreeNode& root, std::span<const double> background_row) {
    b_ = background_row;
    walk(root);
  }

private:
  void walk(const TreeNode& node) {
    if (node.is_leaf) {
      score_leaf(node.weight);
      return;
    }
    const bool x_left = x_[static_cast<size_t>(node.feature)] < node.threshold;
    const bool b_left = b_[static_cast<size_t>(node.feature)] < node.threshold;
    descend(*node.left, node.feature, x_left, b_left);
    descend(*node.right, node.feature, !x_left, !b_left);
  }

  void descend(const TreeNode& child, int feature, bool x_pass, bool b_pass) {
    const size_t f = static_cast<size_t>(feature);
    const char prev_x = x_ok_[f];
    const char prev_b = b_ok_[f];
    const char next_x = static_cast<char>(prev_x & (x_pass ? 1 : 0));
    const char next_b = static_cast<char>(prev_b & (b_pass ? 1 : 0));
    if (!next_x && !next_b) return;  // leaf unreachable for every coalition

    if (depth_on_path_[f]++ == 0) path_features_.push_back(feature);
    x_ok_[f] = next_x;
    b_ok_[f] = next_b;

    walk(child);

    x_ok_[f] = prev_x;
    b_ok_[f] = prev_b;
    if (--depth_on_path_[f] == 0) path_features_.pop_back();
  }

  void score_leaf(double weight) {
    int p = 0, q = 0;
    for (int feature : path_features_) {
      const size_t f = static_cast<size_t>(feature);
      p += x_ok_[f] && !b_ok_[f];
      q += !x_ok_[f] && b_ok_[f];
    }
    if (p == 0 && q == 0) return;  // reached by x and b alike; no attribution

    const double denom = factorials_[static_cast<size_t>(p + q)];
    const double w_pos = p > 0 ? weight * factorials_[static_cast<size_t>(p - 1)] *
                                     factorials_[static_cast<size_t>(q)] / denom
                               : 0.0;
    const double w_neg = q > 0 ? weight * factorials_[static_cast<size_t>(p)] *
                                     factorials_[static_cast<size_t>(q - 1)] / denom
                               : 0.0;
    for (int feature : path_features_) {
      const size_t f = static_cast<size_t>(feature);
      if (x_ok_[f] && !b_ok_[f])
        phi_[f] += w_pos;
      else if (!x_ok_[f] && b_ok_[f])
        phi_[f] -= w_neg;
    }
  }

  std::span<const double> x_;
  std::span<const double> b_;
  std::span<double> phi_;
  std::vector<int> path_features_;    // distinct features on the current path
  std::vector<int> depth_on_path_;    // per feature, split count on the path
  std::vector<char> x_ok_;
  std::vector<char> b_ok_;
  std::array<double, 64> factorials_{};
};

// Spearman rank correlation; ties get their average rank.
std::vector<double> average_ranks(std::span<const double> values) {
  const size_t n = values.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (values[static_cast<size_t>(a)] != values[static_cast<size_t>(b)])
      return values[static_cast<size_t>(a)] < values[static_cast<size_t>(b)];
    return a < b;
  });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[static_cast<size_t>(order[j + 1])] ==
                            values[static_cast<size_t>(order[i])])
      ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[static_cast<size_t>(order[k])] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson_of(std::span<const double> a, std::span<const double> b) {
  const size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

double ShapExplanation::additivity_gap() const {
  double sum = base_value;
  for (double v : phi) sum += v;
  return std::abs(sum - fx);
}

ShapExplanation explain(const TreeEnsemble& m, const EventTable& background,
                        std::span<const double> row, int row_ref) {
  if (background.rows() == 0) fail(ErrorCode::EmptyBackground, "background table is empty");
  if (background.cols() != m.feature_count)
    fail(ErrorCode::DimensionMismatch,
         fmt::format("background has {} columns, model expects {}", background.cols(),
                     m.feature_count));
  if (static_cast<int>(row.size()) != m.feature_count)
    fail(ErrorCode::DimensionMismatch,
         fmt::format("row has {} values, model expects {}", row.size(), m.feature_count));

  ShapExplanation e;
  e.row_ref = row_ref;
  e.phi.assign(static_cast<size_t>(m.feature_count), 0.0);
  e.fx = predict_margin(m, row);

  LeafPathWalker walker(m.feature_count, row, e.phi);
  double base_sum = 0.0;
  for (int b = 0; b < background.rows(); ++b) {
    auto bg_row = background.values.row(b);
    base_sum += predict_margin(m, bg_row);
    for (const auto& tree : m.trees) walker.run(*tree, bg_row);
  }
  const double inv = 1.0 / static_cast<double>(background.rows());
  for (double& v : e.phi) v *= inv;
  e.base_value = base_sum * inv;
  return e;
}

std::vector<ShapExplanation> explain_all(const TreeEnsemble& m, const EventTable& background,
                                         const EventTable& table, int threads) {
  std::vector<ShapExplanation> out(static_cast<size_t>(table.rows()));
  parallel_for(table.rows(), threads, [&](int r) {
    out[static_cast<size_t>(r)] = explain(m, background, table.values.row(r), r);
  });
  return out;
}

ImportanceRanking mean_abs_shap(std::span<const ShapExplanation> explanations,
                                std::span<const std::string> feature_names) {
  if (explanations.empty()) fail(ErrorCode::EmptyInput, "no explanations to rank");
  const size_t f = feature_names.size();
  for (const auto& e : explanations)
    if (e.phi.size() != f)
      fail(ErrorCode::DimensionMismatch,
           fmt::format("explanation has {} features, expected {}", e.phi.size(), f));

  std::vector<double> mean(f, 0.0);
  for (const auto& e : explanations)
    for (size_t c = 0; c < f; ++c) mean[c] += std::abs(e.phi[c]);
  for (double& v : mean) v /= static_cast<double>(explanations.size());

  ImportanceRanking ranking;
  ranking.entries.reserve(f);
  for (size_t c = 0; c < f; ++c) ranking.entries.emplace_back(feature_names[c], mean[c]);
  std::sort(ranking.entries.begin(), ranking.entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return ranking;
}

std::vector<std::string> select_top_k(const ImportanceRanking& ranking, int k) {
  if (k < 1 || k > static_cast<int>(ranking.entries.size()))
    fail(ErrorCode::KOutOfRange,
         fmt::format("k={} with {} ranked features", k, ranking.entries.size()));
  std::vector<std::string> names;
  names.reserve(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) names.push_back(ranking.entries[static_cast<size_t>(i)].first);
  return names;
}

int interaction_partner(std::span<const ShapExplanation> explanations, const EventTable& table,
                        int feature) {
  const int n = table.rows();
  const int f = table.cols();
  if (n < 10) fail(ErrorCode::TooFewRows, fmt::format("{} rows, need at least 10", n));
  if (f < 2) fail(ErrorCode::InvalidArgument, "need at least 2 features");
  if (feature < 0 || feature >= f)
    fail(ErrorCode::UnknownFeature, fmt::format("feature index {}", feature));
  if (static_cast<int>(explanations.size()) != n)
    fail(ErrorCode::LengthMismatch, "one explanation per table row required");

  // Decile bins over x_j: sort rows by value (row index tie-break), cut into
  // ten near-equal runs.
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double va = table.values.at(a, feature);
    const double vb = table.values.at(b, feature);
    if (va != vb) return va < vb;
    return a < b;
  });
  constexpr int kBins = 10;
  std::vector<std::vector<int>> bins(kBins);
  const int base_size = n / kBins;
  const int extra = n % kBins;
  int pos = 0;
  for (int bin = 0; bin < kBins; ++bin) {
    const int size = base_size + (bin < extra ? 1 : 0);
    for (int i = 0; i < size; ++i) bins[static_cast<size_t>(bin)].push_back(order[static_cast<size_t>(pos++)]);
  }

  double best_score = -1.0;
  int best_feature = -1;
  for (int k = 0; k < f; ++k) {
    if (k == feature) continue;
    double score = 0.0;
    int counted = 0;
    for (const auto& bin : bins) {
      if (bin.size() < 2) continue;
      std::vector<double> phi_j, x_k;
      phi_j.reserve(bin.size());
      x_k.reserve(bin.size());
      for (int r : bin) {
        phi_j.push_back(explanations[static_cast<size_t>(r)].phi[static_cast<size_t>(feature)]);
        x_k.push_back(table.values.at(r, k));
      }
      double mean = 0.0;
      for (double v : phi_j) mean += v;
      mean /= static_cast<double>(phi_j.size());
      double var = 0.0;
      for (double v : phi_j) var += (v - mean) * (v - mean);
      var /= static_cast<double>(phi_j.size());

      const double rho = pearson_of(average_ranks(phi_j), average_ranks(x_k));
      score += rho * rho * var;
      ++counted;
    }
    if (counted > 0) score /= static_cast<double>(counted);
    if (score > best_score) {
      best_score = score;
      best_feature = k;
    }
  }
  return best_feature;
}

std::string explanations_csv(std::span<const ShapExplanation> explanations,
                             std::span<const std::string> feature_names) {
  std::string out = "row_ref,base_value,fx";
  for (const auto& name : feature_names) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (const auto& e : explanations) {
    out += fmt::format("{},{},{}", e.row_ref, format_double(e.base_value), format_double(e.fx));
    for (double v : e.phi) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

void write_explanations_csv(std::span<const ShapExplanation> explanations,
                            std::span<const std::string> feature_names,
                            const std::string& path) {
  std::ofstream f(path, std::ios::trunc | std::ios::binary);
  if (!f) fail(ErrorCode::IoFailure, fmt::format("cannot write '{}'", path));
  f << explanations_csv(explanations, feature_names);
}

}  // namespace gridshap
