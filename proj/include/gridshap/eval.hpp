#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gridshap/dataset.hpp"

namespace gridshap {

struct ConfusionMatrix {
  int k = 0;
  std::vector<std::int64_t> counts;  // row-major, [actual][predicted]
  std::vector<std::string> class_names;

  std::int64_t at(int actual, int predicted) const {
    return counts[static_cast<size_t>(actual) * k + predicted];
  }
  std::int64_t& at(int actual, int predicted) {
    return counts[static_cast<size_t>(actual) * k + predicted];
  }
  std::int64_t total() const;
  std::int64_t row_sum(int i) const;
  std::int64_t col_sum(int j) const;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int k,
                          std::vector<std::string> class_names = {});

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

struct EvalReport {
  std::vector<ClassMetrics> per_class;
  std::vector<std::string> class_names;
  double accuracy = 0.0;
  ClassMetrics macro;     // unweighted means, support = total
  ClassMetrics weighted;  // support-proportional means, support = total
  bool zero_division = false;  // some precision/recall had an empty denominator
};

EvalReport report(const ConfusionMatrix& cm);

// Aligned classification-report table, metrics at 2 decimals.
std::string report_text(const EvalReport& r);
std::string confusion_text(const ConfusionMatrix& cm);
nlohmann::json report_json(const EvalReport& r);
nlohmann::json confusion_json(const ConfusionMatrix& cm);

struct CorrelationMatrix {
  int n = 0;
  std::vector<double> r;  // row-major
  std::vector<bool> constant;
  std::vector<std::string> names;

  double at(int i, int j) const { return r[static_cast<size_t>(i) * n + j]; }
  double& at(int i, int j) { return r[static_cast<size_t>(i) * n + j]; }
};

// Pearson coefficients per feature pair. Constant columns correlate 0
// off-diagonal; their diagonal stays 1 but is flagged.
CorrelationMatrix pearson(const EventTable& table, std::span<const std::string> features);

}  // namespace gridshap
