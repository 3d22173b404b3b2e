#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gridshap/dataset.hpp"
#include "gridshap/eval.hpp"
#include "gridshap/shap.hpp"

namespace gridshap {

enum class PlotKind { SummaryBar, Force, Waterfall, Beeswarm, Dependence, Heatmap };

std::string_view plot_kind_name(PlotKind kind);

struct BarItem {
  std::string label;
  double value = 0.0;
};

struct ForceItem {
  std::string label;
  double phi = 0.0;
  std::optional<double> value;  // feature value annotation, when known
};

struct WaterfallItem {
  std::string label;
  double phi = 0.0;
};

struct BeeswarmPoint {
  double phi = 0.0;
  double percentile = 0.0;  // rank fraction of the feature value, 0..1
  double jitter = 0.0;      // vertical offset as a fraction of the row half-height
};

struct BeeswarmRow {
  std::string label;
  std::vector<BeeswarmPoint> points;
};

struct DependencePoint {
  double x = 0.0;
  double phi = 0.0;
  double percentile = 0.0;  // partner value rank fraction, drives color
};

struct SummaryBarData {
  std::vector<BarItem> bars;  // descending
};

struct ForceData {
  double base_value = 0.0;
  double fx = 0.0;
  std::vector<ForceItem> items;  // |phi| descending, zero contributions omitted
};

struct WaterfallData {
  double base_value = 0.0;
  double fx = 0.0;
  std::vector<WaterfallItem> bars;  // |phi| descending, optional trailing "others"
};

struct BeeswarmData {
  std::vector<BeeswarmRow> rows;  // importance descending
};

struct DependenceData {
  std::string feature;
  std::string partner;
  std::vector<DependencePoint> points;
};

struct HeatmapData {
  CorrelationMatrix matrix;
};

using PlotData = std::variant<SummaryBarData, ForceData, WaterfallData, BeeswarmData,
                              DependenceData, HeatmapData>;

struct PlotSpec {
  PlotKind kind = PlotKind::SummaryBar;
  std::string title;
  int width = 860;
  int height = 480;
  PlotData data;
};

// Horizontal importance bars, descending. top_n is clamped to the available
// entry count.
PlotSpec summary_bar(const ImportanceRanking& ranking, int top_n);

// Single-row force layout: positive stripes push toward fx from the left,
// negative from the right; base and fx are annotated on the shared axis.
// Zero contributions draw no stripe. row_values, when given, annotate each
// stripe with its feature value.
PlotSpec force(const ShapExplanation& e, std::span<const std::string> feature_names,
               std::span<const double> row_values = {});

// Cumulative bars from base_value to fx, |phi| descending; contributions past
// max_features collapse into one "others" bar holding the residual sum.
PlotSpec waterfall(const ShapExplanation& e, std::span<const std::string> feature_names,
                   int max_features, std::span<const double> row_values = {});

// One row per feature, importance descending (capped at max_features); point
// x = phi, color = feature value percentile, vertical jitter by seeded
// quantile dodging so dense regions stack instead of overplotting.
PlotSpec beeswarm(std::span<const ShapExplanation> explanations, const EventTable& table,
                  std::uint64_t seed = 0, int max_features = 20);

// Scatter of (x_j, phi_j) colored by the partner feature's value percentile.
PlotSpec dependence(int feature, int partner, const EventTable& table,
                    std::span<const ShapExplanation> explanations);

// Correlation grid with a blue-white-red diverging scale anchored at -1/0/+1
// and 2-decimal cell annotations.
PlotSpec heatmap(const CorrelationMatrix& c);

// Standalone SVG document (rect/circle/text/line primitives only). Output is
// byte-deterministic for identical specs.
std::string render_svg(const PlotSpec& spec);

// Machine-readable payload. Numbers use shortest round-trip formatting so
// re-reading reproduces the payload exactly.
std::string plot_csv(const PlotSpec& spec);

// Writes base_path + ".svg" and base_path + ".csv".
void write_plot(const PlotSpec& spec, const std::string& base_path);

}  // namespace gridshap
