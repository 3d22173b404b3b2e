#include "gridshap/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gridshap/common.hpp"

namespace gridshap {

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::row_sum(int i) const {
  std::int64_t s = 0;
  for (int j = 0; j < k; ++j) s += at(i, j);
  return s;
}

std::int64_t ConfusionMatrix::col_sum(int j) const {
  std::int64_t s = 0;
  for (int i = 0; i < k; ++i) s += at(i, j);
  return s;
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int k,
                          std::vector<std::string> class_names) {
  if (y_true.size() != y_pred.size())
    fail(ErrorCode::LengthMismatch,
         fmt::format("confusion: {} labels vs {} predictions", y_true.size(), y_pred.size()));
  if (k <= 0) fail(ErrorCode::CodeOutOfRange, "confusion: class count must be positive");

  ConfusionMatrix cm;
  cm.k = k;
  cm.counts.assign(static_cast<size_t>(k) * k, 0);
  if (class_names.empty()) {
    for (int i = 0; i < k; ++i) cm.class_names.push_back(fmt::format("class {}", i));
  } else {
    if (static_cast<int>(class_names.size()) != k)
      fail(ErrorCode::LengthMismatch, "confusion: class name count does not match k");
    cm.class_names = std::move(class_names);
  }
  for (size_t i = 0; i < y_true.size(); ++i) {
    const int a = y_true[i];
    const int p = y_pred[i];
    if (a < 0 || a >= k || p < 0 || p >= k)
      fail(ErrorCode::CodeOutOfRange,
           fmt::format("confusion: code ({}, {}) outside 0..{}", a, p, k - 1));
    ++cm.at(a, p);
  }
  return cm;
}

EvalReport report(const ConfusionMatrix& cm) {
  if (cm.k <= 0 || cm.counts.empty()) fail(ErrorCode::EmptyMatrix, "report: empty confusion matrix");
  const std::int64_t total = cm.total();
  if (total == 0) fail(ErrorCode::EmptyMatrix, "report: confusion matrix has no observations");

  EvalReport r;
  r.class_names = cm.class_names;
  std::int64_t trace = 0;
  for (int i = 0; i < cm.k; ++i) {
    const std::int64_t tp = cm.at(i, i);
    const std::int64_t col = cm.col_sum(i);
    const std::int64_t row = cm.row_sum(i);
    trace += tp;

    ClassMetrics m;
    m.support = row;
    if (col > 0) {
      m.precision = static_cast<double>(tp) / static_cast<double>(col);
    } else {
      r.zero_division = true;
    }
    if (row > 0) {
      m.recall = static_cast<double>(tp) / static_cast<double>(row);
    } else {
      r.zero_division = true;
    }
    const double pr = m.precision + m.recall;
    m.f1 = pr > 0.0 ? 2.0 * m.precision * m.recall / pr : 0.0;
    r.per_class.push_back(m);
  }
  r.accuracy = static_cast<double>(trace) / static_cast<double>(total);

  r.macro.support = total;
  r.weighted.support = total;
  for (const auto& m : r.per_class) {
    r.macro.precision += m.precision;
    r.macro.recall += m.recall;
    r.macro.f1 += m.f1;
    const double w = static_cast<double>(m.support) / static_cast<double>(total);
    r.weighted.precision += w * m.precision;
    r.weighted.recall += w * m.recall;
    r.weighted.f1 += w * m.f1;
  }
  r.macro.precision /= cm.k;
  r.macro.recall /= cm.k;
  r.macro.f1 /= cm.k;
  return r;
}

std::string report_text(const EvalReport& r) {
  size_t label_width = 12;  // fits "weighted avg"
  for (const auto& name : r.class_names) label_width = std::max(label_width, name.size());

  std::string out;
  out += fmt::format("{:>{}}  {:>9}  {:>9}  {:>9}  {:>9}\n", "", label_width, "precision",
                     "recall", "f1-score", "support");
  out += "\n";
  for (size_t i = 0; i < r.per_class.size(); ++i) {
    const auto& m = r.per_class[i];
    out += fmt::format("{:>{}}  {:>9.2f}  {:>9.2f}  {:>9.2f}  {:>9}\n", r.class_names[i],
                       label_width, m.precision, m.recall, m.f1, m.support);
  }
  out += "\n";
  out += fmt::format("{:>{}}  {:>9}  {:>9}  {:>9.2f}  {:>9}\n", "accuracy", label_width, "", "",
                     r.accuracy, r.macro.support);
  out += fmt::format("{:>{}}  {:>9.2f}  {:>9.2f}  {:>9.2f}  {:>9}\n", "macro avg", label_width,
                     r.macro.precision, r.macro.recall, r.macro.f1, r.macro.support);
  out += fmt::format("{:>{}}  {:>9.2f}  {:>9.2f}  {:>9.2f}  {:>9}\n", "weighted avg", label_width,
                     r.weighted.precision, r.weighted.recall, r.weighted.f1, r.weighted.support);
  return out;
}

std::string confusion_text(const ConfusionMatrix& cm) {
  size_t label_width = 9;  // fits "predicted"
  for (const auto& name : cm.class_names) label_width = std::max(label_width, name.size());
  size_t cell_width = 6;
  for (const auto& name : cm.class_names) cell_width = std::max(cell_width, name.size());

  std::string out = fmt::format("{:>{}} |", "actual \\ predicted", label_width + 10);
  for (int j = 0; j < cm.k; ++j) out += fmt::format(" {:>{}}", cm.class_names[j], cell_width);
  out += "\n";
  out += fmt::format("{:->{}}\n", "", label_width + 12 + (cell_width + 1) * cm.k);
  for (int i = 0; i < cm.k; ++i) {
    out += fmt::format("{:>{}} |", cm.class_names[i], label_width + 10);
    for (int j = 0; j < cm.k; ++j) out += fmt::format(" {:>{}}", cm.at(i, j), cell_width);
    out += "\n";
  }
  return out;
}

nlohmann::json report_json(const EvalReport& r) {
  nlohmann::json per_class = nlohmann::json::object();
  for (size_t i = 0; i < r.per_class.size(); ++i) {
    const auto& m = r.per_class[i];
    per_class[r.class_names[i]] = {{"precision", m.precision},
                                   {"recall", m.recall},
                                   {"f1", m.f1},
                                   {"support", m.support}};
  }
  auto avg = [](const ClassMetrics& m) {
    return nlohmann::json{{"precision", m.precision},
                          {"recall", m.recall},
                          {"f1", m.f1},
                          {"support", m.support}};
  };
  return nlohmann::json{{"per_class", per_class},
                        {"accuracy", r.accuracy},
                        {"macro_avg", avg(r.macro)},
                        {"weighted_avg", avg(r.weighted)},
                        {"zero_division", r.zero_division}};
}

nlohmann::json confusion_json(const ConfusionMatrix& cm) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < cm.k; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < cm.k; ++j) row.push_back(cm.at(i, j));
    rows.push_back(row);
  }
  return nlohmann::json{{"classes", cm.class_names}, {"counts", rows}};
}

CorrelationMatrix pearson(const EventTable& table, std::span<const std::string> features) {
  if (table.rows() < 2) fail(ErrorCode::TooFewRows, "pearson: need at least 2 rows");

  std::vector<int> cols;
  cols.reserve(features.size());
  for (const auto& name : features) {
    const int idx = table.feature_index(name);
    if (idx < 0) fail(ErrorCode::UnknownFeature, fmt::format("pearson: no feature named {}", name));
    cols.push_back(idx);
  }

  const int n = static_cast<int>(cols.size());
  const int rows = table.rows();
  CorrelationMatrix c;
  c.n = n;
  c.r.assign(static_cast<size_t>(n) * n, 0.0);
  c.constant.assign(static_cast<size_t>(n), false);
  c.names.assign(features.begin(), features.end());

  // Center each selected column once; flag the degenerate ones.
  std::vector<std::vector<double>> centered(static_cast<size_t>(n));
  std::vector<double> norms(static_cast<size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    auto& col = centered[static_cast<size_t>(j)];
    col.resize(static_cast<size_t>(rows));
    double mean = 0.0;
    for (int i = 0; i < rows; ++i) mean += table.values.at(i, cols[static_cast<size_t>(j)]);
    mean /= rows;
    double ss = 0.0;
    for (int i = 0; i < rows; ++i) {
      const double d = table.values.at(i, cols[static_cast<size_t>(j)]) - mean;
      col[static_cast<size_t>(i)] = d;
      ss += d * d;
    }
    norms[static_cast<size_t>(j)] = std::sqrt(ss);
    if (norms[static_cast<size_t>(j)] < 1e-12) c.constant[static_cast<size_t>(j)] = true;
  }

  for (int a = 0; a < n; ++a) {
    c.at(a, a) = 1.0;
    for (int b = a + 1; b < n; ++b) {
      double r = 0.0;
      if (!c.constant[static_cast<size_t>(a)] && !c.constant[static_cast<size_t>(b)]) {
        double dot = 0.0;
        for (int i = 0; i < rows; ++i)
          dot += centered[static_cast<size_t>(a)][static_cast<size_t>(i)] *
                 centered[static_cast<size_t>(b)][static_cast<size_t>(i)];
        r = dot / (norms[static_cast<size_t>(a)] * norms[static_cast<size_t>(b)]);
        r = std::clamp(r, -1.0, 1.0);
      }
      c.at(a, b) = r;
      c.at(b, a) = r;
    }
  }
  return c;
}

}  // namespace gridshap
