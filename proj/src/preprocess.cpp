#include "gridshap/preprocess.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace gridshap {
namespace {

EventTable take_rows(const EventTable& table, const std::vector<int>& rows) {
  EventTable out;
  out.features = table.features;
  out.values = Matrix(static_cast<int>(rows.size()), table.cols());
  out.source = table.source;
  for (size_t i = 0; i < rows.size(); ++i) {
    int r = rows[i];
    std::copy(table.values.row(r).begin(), table.values.row(r).end(),
              out.values.row(static_cast<int>(i)).begin());
    out.labels.push_back(table.labels[static_cast<size_t>(r)]);
    out.row_ids.push_back(table.row_ids[static_cast<size_t>(r)]);
  }
  return out;
}

}  // namespace

std::pair<EventTable, EventTable> split(const EventTable& table, const SplitSpec& spec) {
  if (table.rows() < 2)
    fail(ErrorCode::TooFewRows, fmt::format("{} row(s), need at least 2", table.rows()));
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    fail(ErrorCode::InvalidArgument,
         fmt::format("train_fraction {} outside (0,1)", spec.train_fraction));

  Rng rng(spec.seed);
  std::vector<int> train_rows;
  std::vector<int> test_rows;

  if (!spec.stratified) {
    std::vector<int> order(static_cast<size_t>(table.rows()));
    for (int i = 0; i < table.rows(); ++i) order[static_cast<size_t>(i)] = i;
    rng.shuffle(order);
    const int n_train =
        static_cast<int>(std::floor(static_cast<double>(table.rows()) * spec.train_fraction));
    train_rows.assign(order.begin(), order.begin() + n_train);
    test_rows.assign(order.begin() + n_train, order.end());
  } else {
    // Per-class shuffle and floor allocation, classes in code order.
    for (int c = 0; c < 3; ++c) {
      std::vector<int> members;
      for (int r = 0; r < table.rows(); ++r)
        if (static_cast<int>(table.labels[static_cast<size_t>(r)]) == c) members.push_back(r);
      if (members.empty()) continue;
      rng.shuffle(members);
      const int n_train = static_cast<int>(
          std::floor(static_cast<double>(members.size()) * spec.train_fraction));
      train_rows.insert(train_rows.end(), members.begin(), members.begin() + n_train);
      test_rows.insert(test_rows.end(), members.begin() + n_train, members.end());
    }
  }

  return {take_rows(table, train_rows), take_rows(table, test_rows)};
}

ScalerParams fit_scaler(const EventTable& train) {
  if (train.rows() == 0) fail(ErrorCode::EmptyInput, "cannot fit a scaler on an empty table");
  const int n = train.rows();
  const int f = train.cols();

  ScalerParams params;
  params.means.resize(static_cast<size_t>(f), 0.0);
  params.stds.resize(static_cast<size_t>(f), 0.0);
  params.constant.resize(static_cast<size_t>(f), false);

  for (int c = 0; c < f; ++c) {
    double sum = 0.0;
    for (int r = 0; r < n; ++r) sum += train.values.at(r, c);
    const double mean = sum / n;
    double sq = 0.0;
    for (int r = 0; r < n; ++r) {
      const double d = train.values.at(r, c) - mean;
      sq += d * d;
    }
    const double std_dev = std::sqrt(sq / n);
    params.means[static_cast<size_t>(c)] = mean;
    params.stds[static_cast<size_t>(c)] = std_dev;
    params.constant[static_cast<size_t>(c)] = std_dev < ScalerParams::kConstantEps;
  }
  return params;
}

EventTable transform(const ScalerParams& params, const EventTable& table) {
  if (params.cols() != table.cols())
    fail(ErrorCode::ColumnMismatch,
         fmt::format("scaler has {} columns, table has {}", params.cols(), table.cols()));

  EventTable out = table;
  for (int c = 0; c < table.cols(); ++c) {
    if (params.constant[static_cast<size_t>(c)]) {
      for (int r = 0; r < table.rows(); ++r) out.values.at(r, c) = 0.0;
      continue;
    }
    const double mean = params.means[static_cast<size_t>(c)];
    const double inv = 1.0 / params.stds[static_cast<size_t>(c)];
    for (int r = 0; r < table.rows(); ++r)
      out.values.at(r, c) = (table.values.at(r, c) - mean) * inv;
  }
  return out;
}

void save_scaler(const ScalerParams& params, const std::string& path) {
  nlohmann::json j;
  j["means"] = params.means;
  j["stds"] = params.stds;
  std::vector<int> flags;
  flags.reserve(params.constant.size());
  for (bool b : params.constant) flags.push_back(b ? 1 : 0);
  j["constant_flags"] = flags;
  std::ofstream f(path, std::ios::trunc);
  if (!f) fail(ErrorCode::IoFailure, fmt::format("cannot write '{}'", path));
  f << j.dump(2) << '\n';
}

ScalerParams load_scaler(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::IoFailure, fmt::format("cannot open '{}'", path));
  nlohmann::json j = nlohmann::json::parse(f, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::ConfigError, fmt::format("'{}' is not JSON", path));
  ScalerParams params;
  params.means = j.at("means").get<std::vector<double>>();
  params.stds = j.at("stds").get<std::vector<double>>();
  for (int flag : j.at("constant_flags").get<std::vector<int>>())
    params.constant.push_back(flag != 0);
  if (params.stds.size() != params.means.size() ||
      params.constant.size() != params.means.size())
    fail(ErrorCode::ConfigError, "scaler arrays disagree in length");
  return params;
}

}  // namespace gridshap
