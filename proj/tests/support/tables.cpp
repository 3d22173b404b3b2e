#include "support/tables.hpp"

#include <fmt/format.h>

#include "gridshap/common.hpp"

namespace gridshap::testing {

EventTable make_table_named(const std::vector<std::string>& names,
                            const std::vector<std::vector<double>>& rows,
                            const std::vector<EventClass>& labels) {
  EventTable t;
  t.source = "<test>";
  const int r = static_cast<int>(rows.size());
  const int c = static_cast<int>(names.size());
  for (const auto& name : names) {
    auto parsed = try_parse_feature_name(name);
    t.features.push_back(parsed ? *parsed : FeatureName::unstructured(name));
  }
  t.values = Matrix(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows[static_cast<size_t>(i)].size()) != c)
      fail(ErrorCode::LengthMismatch, "make_table row width");
    for (int j = 0; j < c; ++j)
      t.values.at(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    t.labels.push_back(labels.empty()
                           ? (i % 2 == 0 ? EventClass::Attack : EventClass::Natural)
                           : labels[static_cast<size_t>(i)]);
    t.row_ids.push_back(i);
  }
  return t;
}

EventTable make_table(const std::vector<std::vector<double>>& rows,
                      const std::vector<EventClass>& labels) {
  const int c = rows.empty() ? 0 : static_cast<int>(rows.front().size());
  std::vector<std::string> names;
  for (int j = 0; j < c; ++j) names.push_back(fmt::format("f{}", j));
  return make_table_named(names, rows, labels);
}

}  // namespace gridshap::testing
