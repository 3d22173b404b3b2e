#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "gridshap/viz.hpp"

#include "support/csvread.hpp"
#include "support/oracle.hpp"
#include "support/tables.hpp"
#include "support/tmpdir.hpp"
#include "support/xmlcheck.hpp"

using namespace gridshap;
using gridshap::testing::make_table;
using gridshap::testing::read_csv;
using gridshap::testing::uniform;
using gridshap::testing::xml_error;

namespace {

ShapExplanation make_explanation(std::vector<double> phi, double base) {
  ShapExplanation e;
  e.base_value = base;
  e.fx = base;
  for (double p : phi) e.fx += p;
  e.phi = std::move(phi);
  e.row_ref = 0;
  return e;
}

ImportanceRanking small_ranking() {
  ImportanceRanking r;
  r.entries = {{"R1-PM5:I", 3.5}, {"R2-PA:ZH", 1.25}, {"R3-PM1:V", 0.5}};
  return r;
}

void check_clean(const PlotSpec& spec) {
  const std::string svg = render_svg(spec);
  const auto err = xml_error(svg);
  if (err) {
    CAPTURE(*err);
    FAIL("SVG failed the well-formedness scan");
  }
  CHECK(render_svg(spec) == svg);  // byte determinism
}

// Every numeric field in the CSV must re-parse to the exact double.
void check_number(const std::string& cell, double want) {
  const auto got = parse_double(cell);
  REQUIRE(got.has_value());
  CHECK(*got == want);
}

}  // namespace

TEST_CASE("summary bar renders, clamps, and exports its payload") {
  const PlotSpec spec = summary_bar(small_ranking(), 10);
  const auto& data = std::get<SummaryBarData>(spec.data);
  REQUIRE(data.bars.size() == 3);  // top_n clamped to available entries
  CHECK(data.bars[0].label == "R1-PM5:I");
  CHECK(data.bars[0].value == 3.5);
  check_clean(spec);

  const PlotSpec two = summary_bar(small_ranking(), 2);
  CHECK(std::get<SummaryBarData>(two.data).bars.size() == 2);

  const auto cells = read_csv(plot_csv(spec));
  REQUIRE(cells.size() == 4);
  CHECK(cells[0] == std::vector<std::string>{"feature", "mean_abs_shap"});
  CHECK(cells[1][0] == "R1-PM5:I");
  check_number(cells[1][1], 3.5);
  check_number(cells[3][1], 0.5);
}

TEST_CASE("force plot drops zero stripes and annotates endpoints") {
  const std::vector<std::string> names = {"a", "b", "c"};
  const ShapExplanation zero = make_explanation({0.0, 0.0, 0.0}, -1.25);
  const PlotSpec quiet = force(zero, names);
  CHECK(std::get<ForceData>(quiet.data).items.empty());
  check_clean(quiet);

  const ShapExplanation one = make_explanation({0.0, 0.75, 0.0}, 0.5);
  const std::vector<double> row = {9.0, -3.5, 2.0};
  const PlotSpec single = force(one, names, row);
  const auto& data = std::get<ForceData>(single.data);
  REQUIRE(data.items.size() == 1);
  CHECK(data.items[0].label == "b");
  CHECK(data.items[0].phi == 0.75);
  REQUIRE(data.items[0].value.has_value());
  CHECK(*data.items[0].value == -3.5);
  CHECK(data.fx == doctest::Approx(data.base_value + 0.75).epsilon(1e-12));
  check_clean(single);

  const auto cells = read_csv(plot_csv(single));
  REQUIRE(cells.size() == 4);  // base, fx, header, one stripe
  CHECK(cells[0][0] == "base_value");
  check_number(cells[0][1], 0.5);
  CHECK(cells[1][0] == "fx");
  check_number(cells[1][1], one.fx);
  CHECK(cells[3][0] == "b");
  check_number(cells[3][1], 0.75);
  check_number(cells[3][2], -3.5);
}

TEST_CASE("force validates name and value lengths") {
  const ShapExplanation e = make_explanation({0.1, 0.2}, 0.0);
  const std::vector<std::string> short_names = {"only"};
  CHECK_THROWS_AS(force(e, short_names), Error);
  const std::vector<std::string> names = {"a", "b"};
  const std::vector<double> bad_row = {1.0};
  CHECK_THROWS_AS(force(e, names, bad_row), Error);
}

TEST_CASE("waterfall track runs from base to fx") {
  const std::vector<std::string> names = {"a", "b", "c", "d", "e"};
  const ShapExplanation e = make_explanation({0.4, -1.2, 0.05, 0.3, -0.02}, -2.5);

  const PlotSpec full = waterfall(e, names, 10);
  const auto& data = std::get<WaterfallData>(full.data);
  REQUIRE(data.bars.size() == 5);  // no others bar when everything fits
  CHECK(data.bars[0].label == "b");  // |phi| descending
  double cum = data.base_value;
  for (const auto& bar : data.bars) cum += bar.phi;
  CHECK(std::abs(cum - data.fx) <= 1e-6);
  for (const auto& bar : data.bars) CHECK(bar.label.find("others") == std::string::npos);
  check_clean(full);

  const PlotSpec capped = waterfall(e, names, 2);
  const auto& cdata = std::get<WaterfallData>(capped.data);
  REQUIRE(cdata.bars.size() == 3);
  CHECK(cdata.bars[2].label == "3 others");
  CHECK(cdata.bars[2].phi == doctest::Approx(0.3 + 0.05 - 0.02).epsilon(1e-12));
  double ccum = cdata.base_value;
  for (const auto& bar : cdata.bars) ccum += bar.phi;
  CHECK(std::abs(ccum - cdata.fx) <= 1e-6);
  check_clean(capped);

  const auto cells = read_csv(plot_csv(capped));
  CHECK(cells[0][0] == "base_value");
  check_number(cells[0][1], -2.5);
  CHECK(cells[1][0] == "fx");
  REQUIRE(cells.size() == 6);  // base, fx, header, 3 bars
  check_number(cells[3][1], -1.2);
}

TEST_CASE("beeswarm rows follow the importance ranking deterministically") {
  Rng rng(400);
  std::vector<std::vector<double>> rows;
  std::vector<ShapExplanation> expl;
  for (int i = 0; i < 40; ++i) {
    rows.push_back({uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)});
    ShapExplanation e;
    e.phi = {0.01 * i, 2.0 - 0.01 * i, 0.5};
    e.base_value = 0.0;
    e.fx = e.phi[0] + e.phi[1] + e.phi[2];
    e.row_ref = i;
    expl.push_back(e);
  }
  const EventTable table = make_table(rows);

  const PlotSpec spec = beeswarm(expl, table, 99);
  const auto& data = std::get<BeeswarmData>(spec.data);
  REQUIRE(data.rows.size() == 3);
  CHECK(data.rows[0].label == "f1");  // largest mean |phi|
  CHECK(data.rows[0].points.size() == 40);
  check_clean(spec);

  // Same seed, same bytes; the jitter is part of the payload.
  const PlotSpec again = beeswarm(expl, table, 99);
  CHECK(render_svg(again) == render_svg(spec));
  CHECK(plot_csv(again) == plot_csv(spec));

  const PlotSpec capped = beeswarm(expl, table, 99, 2);
  CHECK(std::get<BeeswarmData>(capped.data).rows.size() == 2);

  const auto cells = read_csv(plot_csv(spec));
  CHECK(cells[0] == std::vector<std::string>{"feature", "phi", "percentile", "jitter"});
  CHECK(cells.size() == 1 + 3 * 40);

  CHECK_THROWS_AS(beeswarm(std::vector<ShapExplanation>{}, table, 1), Error);
}

TEST_CASE("dependence scatter carries phi against feature values") {
  Rng rng(41);
  std::vector<std::vector<double>> rows;
  std::vector<ShapExplanation> expl;
  for (int i = 0; i < 25; ++i) {
    rows.push_back({uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0)});
    ShapExplanation e;
    e.phi = {0.125, uniform(rng, -1.0, 1.0)};  // constant phi for feature 0
    e.base_value = 0.0;
    e.fx = e.phi[0] + e.phi[1];
    e.row_ref = i;
    expl.push_back(e);
  }
  const EventTable table = make_table(rows);

  const PlotSpec spec = dependence(0, 1, table, expl);
  const auto& data = std::get<DependenceData>(spec.data);
  CHECK(data.feature == "f0");
  CHECK(data.partner == "f1");
  REQUIRE(data.points.size() == 25);
  for (const auto& p : data.points) CHECK(p.phi == 0.125);  // flat line
  check_clean(spec);

  const auto cells = read_csv(plot_csv(spec));
  CHECK(cells[0] == std::vector<std::string>{"feature", "f0"});
  CHECK(cells[1] == std::vector<std::string>{"partner", "f1"});
  CHECK(cells[2] == std::vector<std::string>{"x", "phi", "percentile"});
  REQUIRE(cells.size() == 3 + 25);
  check_number(cells[3][1], 0.125);

  CHECK_THROWS_AS(dependence(7, 1, table, expl), Error);
  CHECK_THROWS_AS(dependence(0, 7, table, expl), Error);
}

TEST_CASE("heatmap annotates cells to two decimals") {
  CorrelationMatrix c;
  c.n = 2;
  c.names = {"R4-PM2:V", "R2-PA:ZH"};
  c.r = {1.0, -0.08, -0.08, 1.0};
  c.constant = {false, false};

  const PlotSpec spec = heatmap(c);
  const std::string svg = render_svg(spec);
  CHECK(svg.find("-0.08") != std::string::npos);
  CHECK(svg.find("1.00") != std::string::npos);
  CHECK(svg.find("R4-PM2:V") != std::string::npos);
  check_clean(spec);

  const auto cells = read_csv(plot_csv(spec));
  REQUIRE(cells.size() == 3);
  CHECK(cells[0] == std::vector<std::string>{"feature", "R4-PM2:V", "R2-PA:ZH", "constant"});
  CHECK(cells[1][0] == "R4-PM2:V");
  check_number(cells[1][2], -0.08);
  CHECK(cells[1][3] == "0");
}

TEST_CASE("titles with markup characters are escaped") {
  PlotSpec spec = summary_bar(small_ranking(), 3);
  spec.title = "Importance <&> \"quoted\" 'single'";
  const std::string svg = render_svg(spec);
  CHECK_FALSE(xml_error(svg).has_value());
  CHECK(svg.find("&lt;&amp;&gt;") != std::string::npos);
}

TEST_CASE("payload and kind must agree") {
  PlotSpec wrong;
  wrong.kind = PlotKind::Force;
  wrong.data = SummaryBarData{};
  CHECK_THROWS_AS(render_svg(wrong), Error);
  CHECK_THROWS_AS(plot_csv(wrong), Error);
  try {
    render_svg(wrong);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("write_plot emits the svg and csv pair") {
  const PlotSpec spec = summary_bar(small_ranking(), 3);
  const std::string base = gridshap::testing::tmp_path("plot");
  write_plot(spec, base);

  auto slurp = [](const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  CHECK(slurp(base + ".svg") == render_svg(spec));
  CHECK(slurp(base + ".csv") == plot_csv(spec));
}

TEST_CASE("plot kind names are stable identifiers") {
  CHECK(plot_kind_name(PlotKind::SummaryBar) == "summary_bar");
  CHECK(plot_kind_name(PlotKind::Force) == "force");
  CHECK(plot_kind_name(PlotKind::Waterfall) == "waterfall");
  CHECK(plot_kind_name(PlotKind::Beeswarm) == "beeswarm");
  CHECK(plot_kind_name(PlotKind::Dependence) == "dependence");
  CHECK(plot_kind_name(PlotKind::Heatmap) == "heatmap");
}
