#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gridshap::testing {

// Synthetic PMU-style event corpus: 127 feature columns plus the trailing
// "marker" label column. Three classes at roughly 60/30/10, a handful of
// planted informative columns (including one interaction and one constant),
// optional non-finite cells at fixed slots so ingestion has rows to drop.
struct FixtureSpec {
  int rows = 320;
  std::uint64_t seed = 7;
  bool inject_inf = true;
};

std::vector<std::string> fixture_feature_names();

std::string fixture_csv(const FixtureSpec& spec);

void write_fixture(const std::string& path, const FixtureSpec& spec);

// Row indices the loader should drop when inject_inf is on (slots that fit
// within spec.rows).
std::vector<int> fixture_inf_rows(const FixtureSpec& spec);

}  // namespace gridshap::testing
