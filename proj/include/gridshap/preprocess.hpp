#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gridshap/dataset.hpp"

namespace gridshap {

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  // Off by default: a plain shuffle, not per-class allocation.
  bool stratified = false;
};

// Seeded uniform shuffle (mt19937_64 Fisher-Yates); the first
// floor(rows * train_fraction) shuffled rows become the training table.
// Deterministic for a fixed seed on every platform and thread count.
std::pair<EventTable, EventTable> split(const EventTable& table, const SplitSpec& spec);

struct ScalerParams {
  std::vector<double> means;
  std::vector<double> stds;  // population standard deviation
  std::vector<bool> constant;

  static constexpr double kConstantEps = 1e-12;
  int cols() const { return static_cast<int>(means.size()); }
};

ScalerParams fit_scaler(const EventTable& train);

// (x - mean) / std per column; constant columns map to exactly 0.
EventTable transform(const ScalerParams& params, const EventTable& table);

// JSON sidecar {means[], stds[], constant_flags[]}.
void save_scaler(const ScalerParams& params, const std::string& path);
ScalerParams load_scaler(const std::string& path);

}  // namespace gridshap
