#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gridshap/dataset.hpp"
#include "gridshap/gbt.hpp"

namespace gridshap {

struct PairSpec {
  EventClass a = EventClass::Attack;
  EventClass b = EventClass::Natural;

  bool operator==(const PairSpec&) const = default;
};

// Lowercase canonical slug, e.g. "attack_natural"; class order follows the
// label codes.
std::string pair_slug(const PairSpec& pair);

// Accepts "attack_natural", "Natural/NoEvents", "attack+no-events", ...
PairSpec parse_pair(std::string_view token);

struct RunConfig {
  // [data]
  std::string input;
  std::string cache;
  std::string schema_manifest;
  std::string label_column = "marker";
  std::string marker_map;

  // [split]
  std::uint64_t seed = 42;
  double train_fraction = 0.8;
  bool stratified = false;

  // [model]
  Hyperparams hyperparams;

  // [shap]
  int top_k = 10;
  int background_size = 256;
  int explain_row = 0;
  int dependence_plots = 5;

  // [run]
  std::vector<PairSpec> pairs;  // default: all three pairings
  std::string out = "out";
  int threads = 0;  // 0 = one worker per hardware thread

  void validate() const;  // throws ConfigError
};

RunConfig default_config();

// Plain-text sections of "key = value" lines; '#' starts a comment.
RunConfig parse_config(std::string_view text, const std::string& source);
RunConfig load_config(const std::string& path);

// Canonical printable form; parse_config(config_text(c)) reproduces c.
std::string config_text(const RunConfig& c);

// FNV-1a over the canonical text, rendered as 16 hex digits.
std::string config_hash(const RunConfig& c);

}  // namespace gridshap
