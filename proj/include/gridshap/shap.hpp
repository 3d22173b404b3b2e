#pragma once

#include <span>
#include <string>
#include <vector>

#include "gridshap/gbt.hpp"

namespace gridshap {

// Attributions target the margin (log-odds), so base_value + sum(phi) equals
// the explained row's margin.
struct ShapExplanation {
  std::vector<double> phi;
  double base_value = 0.0;  // mean background margin
  double fx = 0.0;          // explained row's margin
  int row_ref = -1;

  double additivity_gap() const;  // |base_value + sum(phi) - fx|
};

// Exact interventional Shapley values of the ensemble margin, averaged over
// the background table, computed by a per-tree leaf-path algorithm (no subset
// enumeration).
ShapExplanation explain(const TreeEnsemble& m, const EventTable& background,
                        std::span<const double> row, int row_ref = -1);

std::vector<ShapExplanation> explain_all(const TreeEnsemble& m, const EventTable& background,
                                         const EventTable& table, int threads = 1);

struct ImportanceRanking {
  // (feature name, mean |phi|), descending; ties in lexicographic name order.
  std::vector<std::pair<std::string, double>> entries;
};

ImportanceRanking mean_abs_shap(std::span<const ShapExplanation> explanations,
                                std::span<const std::string> feature_names);

std::vector<std::string> select_top_k(const ImportanceRanking& ranking, int k);

// Dependence-plot coloring partner: the feature whose within-decile rank
// correlation explains the most variance of phi_j. Ties resolve to the lowest
// feature index.
int interaction_partner(std::span<const ShapExplanation> explanations, const EventTable& table,
                        int feature);

std::string explanations_csv(std::span<const ShapExplanation> explanations,
                             std::span<const std::string> feature_names);
void write_explanations_csv(std::span<const ShapExplanation> explanations,
                            std::span<const std::string> feature_names,
                            const std::string& path);

}  // namespace gridshap
