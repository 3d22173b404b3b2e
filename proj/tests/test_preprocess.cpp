#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gridshap/preprocess.hpp"

#include "support/oracle.hpp"
#include "support/tables.hpp"
#include "support/tmpdir.hpp"

using namespace gridshap;
using gridshap::testing::make_table;

TEST_CASE("scaler matches hand-computed population moments") {
  const EventTable t = make_table({{2.0}, {4.0}, {6.0}});
  const ScalerParams p = fit_scaler(t);
  REQUIRE(p.cols() == 1);
  CHECK(p.means[0] == 4.0);
  // population sigma of {2,4,6} = sqrt(8/3)
  CHECK(p.stds[0] == doctest::Approx(1.632993161855452).epsilon(1e-15));
  CHECK_FALSE(p.constant[0]);

  const EventTable z = transform(p, t);
  CHECK(z.values.at(0, 0) == doctest::Approx(-1.224744871391589).epsilon(1e-15));
  CHECK(z.values.at(1, 0) == 0.0);
  CHECK(z.values.at(2, 0) == doctest::Approx(1.224744871391589).epsilon(1e-15));
}

TEST_CASE("constant column flagged and mapped to exact zero") {
  const EventTable t = make_table({{5.0, 1.0}, {5.0, 2.0}, {5.0, 3.0}});
  const ScalerParams p = fit_scaler(t);
  CHECK(p.constant[0]);
  CHECK_FALSE(p.constant[1]);
  CHECK(p.means[0] == 5.0);
  const EventTable z = transform(p, t);
  for (int r = 0; r < 3; ++r) CHECK(z.values.at(r, 0) == 0.0);
}

TEST_CASE("zero features is a no-op scaler") {
  EventTable t;
  t.values = Matrix(2, 0);
  t.labels = {EventClass::Attack, EventClass::Natural};
  t.row_ids = {0, 1};
  const ScalerParams p = fit_scaler(t);
  CHECK(p.cols() == 0);
  const EventTable z = transform(p, t);
  CHECK(z.rows() == 2);
}

TEST_CASE("identity params leave values untouched") {
  const EventTable t = make_table({{1.5, -2.0}, {0.25, 7.0}});
  ScalerParams p;
  p.means = {0.0, 0.0};
  p.stds = {1.0, 1.0};
  p.constant = {false, false};
  const EventTable z = transform(p, t);
  CHECK(z.values.data == t.values.data);
}

TEST_CASE("column count mismatch throws") {
  const EventTable t = make_table({{1.0, 2.0}});
  ScalerParams p;
  p.means = {0.0};
  p.stds = {1.0};
  p.constant = {false};
  CHECK_THROWS_AS(transform(p, t), Error);
  try {
    transform(p, t);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ColumnMismatch);
  }
}

TEST_CASE("fit then transform standardizes to machine precision") {
  Rng rng(99);
  std::vector<std::vector<double>> rows(200, std::vector<double>(6));
  for (auto& row : rows)
    for (double& v : row) v = testing::uniform(rng, -40.0, 75.0);
  const EventTable t = make_table(rows);
  const ScalerParams p = fit_scaler(t);
  const EventTable z = transform(p, t);

  for (int c = 0; c < 6; ++c) {
    double sum = 0.0, sq = 0.0;
    for (int r = 0; r < 200; ++r) sum += z.values.at(r, c);
    const double mean = sum / 200.0;
    for (int r = 0; r < 200; ++r) sq += (z.values.at(r, c) - mean) * (z.values.at(r, c) - mean);
    const double sd = std::sqrt(sq / 200.0);
    CHECK(std::abs(mean) <= 1e-9);
    CHECK(std::abs(sd - 1.0) <= 1e-9);
  }
}

TEST_CASE("standardization is affine-invariant") {
  Rng rng(7);
  std::vector<std::vector<double>> rows(64, std::vector<double>(1));
  for (auto& row : rows) row[0] = testing::uniform(rng, -3.0, 3.0);
  const EventTable base = make_table(rows);

  for (auto& row : rows) row[0] = 12.5 * row[0] - 400.0;
  const EventTable scaled = make_table(rows);

  const EventTable za = transform(fit_scaler(base), base);
  const EventTable zb = transform(fit_scaler(scaled), scaled);
  for (int r = 0; r < 64; ++r)
    CHECK(za.values.at(r, 0) == doctest::Approx(zb.values.at(r, 0)).epsilon(1e-9));
}

TEST_CASE("scaler JSON sidecar round-trips exactly") {
  const EventTable t = make_table({{0.1, 3.0, 5.0}, {0.2, -3.0, 5.0}, {0.7, 0.30000000000000004, 5.0}});
  const ScalerParams p = fit_scaler(t);
  const std::string path = gridshap::testing::tmp_path("scaler.json");
  save_scaler(p, path);
  const ScalerParams back = load_scaler(path);
  CHECK(back.means == p.means);
  CHECK(back.stds == p.stds);
  CHECK(back.constant == p.constant);
}

TEST_CASE("split sizes follow floor arithmetic") {
  std::vector<std::vector<double>> rows(4966, std::vector<double>(1));
  for (size_t i = 0; i < rows.size(); ++i) rows[i][0] = static_cast<double>(i);
  const EventTable t = make_table(rows);
  auto [train, test] = split(t, {.train_fraction = 0.8, .seed = 3});
  CHECK(train.rows() == 3972);
  CHECK(test.rows() == 994);
}

TEST_CASE("split is a deterministic partition") {
  std::vector<std::vector<double>> rows(57, std::vector<double>(1));
  for (size_t i = 0; i < rows.size(); ++i) rows[i][0] = static_cast<double>(i);
  const EventTable t = make_table(rows);

  auto [train1, test1] = split(t, {.train_fraction = 0.8, .seed = 42});
  auto [train2, test2] = split(t, {.train_fraction = 0.8, .seed = 42});
  CHECK(train1.row_ids == train2.row_ids);
  CHECK(test1.row_ids == test2.row_ids);

  // Disjoint union of the original rows.
  std::vector<int> all = train1.row_ids;
  all.insert(all.end(), test1.row_ids.begin(), test1.row_ids.end());
  std::sort(all.begin(), all.end());
  CHECK(all == t.row_ids);

  // Values travel with their ids.
  CHECK(train1.values.at(0, 0) == static_cast<double>(train1.row_ids[0]));

  auto [train3, test3] = split(t, {.train_fraction = 0.8, .seed = 43});
  CHECK(train3.row_ids != train1.row_ids);
}

TEST_CASE("stratified split allocates floor per class") {
  std::vector<std::vector<double>> rows;
  std::vector<EventClass> labels;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({static_cast<double>(i)});
    labels.push_back(EventClass::Attack);
  }
  for (int i = 0; i < 5; ++i) {
    rows.push_back({static_cast<double>(100 + i)});
    labels.push_back(EventClass::Natural);
  }
  for (int i = 0; i < 3; ++i) {
    rows.push_back({static_cast<double>(200 + i)});
    labels.push_back(EventClass::NoEvents);
  }
  const EventTable t = make_table(rows, labels);
  auto [train, test] = split(t, {.train_fraction = 0.8, .seed = 5, .stratified = true});

  auto count = [](const EventTable& x, EventClass c) {
    return std::count(x.labels.begin(), x.labels.end(), c);
  };
  CHECK(count(train, EventClass::Attack) == 8);
  CHECK(count(train, EventClass::Natural) == 4);
  CHECK(count(train, EventClass::NoEvents) == 2);
  CHECK(train.rows() == 14);
  CHECK(test.rows() == 4);
}

TEST_CASE("split refuses degenerate inputs") {
  const EventTable t = make_table({{1.0}});
  CHECK_THROWS_AS(split(t, {.train_fraction = 0.8, .seed = 1}), Error);
}
