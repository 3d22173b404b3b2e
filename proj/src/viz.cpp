#include "gridshap/viz.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "gridshap/common.hpp"
#include "gridshap/feature_name.hpp"

namespace gridshap {
namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Fixed 2-decimal coordinates keep the SVG byte-stable; the guard avoids the
// "-0.00" spelling.
std::string px(double v) {
  if (std::abs(v) < 0.005) v = 0.0;
  return fmt::format("{:.2f}", v);
}

struct Rgb {
  int r = 0, g = 0, b = 0;
};

std::string hexcolor(Rgb c) { return fmt::format("#{:02x}{:02x}{:02x}", c.r, c.g, c.b); }

Rgb lerp(Rgb a, Rgb b, double t) {
  auto ch = [&](int x, int y) { return static_cast<int>(std::lround(x + (y - x) * t)); };
  return {ch(a.r, b.r), ch(a.g, b.g), ch(a.b, b.b)};
}

constexpr Rgb kNegBlue{30, 136, 229};
constexpr Rgb kPosRed{229, 57, 53};
constexpr Rgb kWhite{255, 255, 255};
constexpr Rgb kDivBlue{33, 102, 172};
constexpr Rgb kDivRed{178, 24, 43};

const char* kPosHex = "#e53935";
const char* kNegHex = "#1e88e5";
const char* kInkHex = "#1a1a1a";
const char* kGrayHex = "#8a8a8a";
const char* kGridHex = "#e0e0e0";

std::string percentile_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return hexcolor(lerp(kNegBlue, kPosRed, t));
}

std::string diverging_color(double r) {
  r = std::clamp(r, -1.0, 1.0);
  return r < 0.0 ? hexcolor(lerp(kWhite, kDivBlue, -r)) : hexcolor(lerp(kWhite, kDivRed, r));
}

class SvgWriter {
public:
  SvgWriter(int width, int height) : width_(width), height_(height) {}

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& extra = "") {
    body_ += fmt::format("  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"{}/>\n",
                         px(x), px(y), px(w), px(h), fill, extra);
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double stroke_width = 1.0, const std::string& extra = "") {
    body_ += fmt::format(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"{}\"{}/>\n",
        px(x1), px(y1), px(x2), px(y2), stroke, px(stroke_width), extra);
  }

  void circle(double cx, double cy, double r, const std::string& fill,
              const std::string& extra = "") {
    body_ += fmt::format("  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\"{}/>\n", px(cx), px(cy),
                         px(r), fill, extra);
  }

  void text(double x, double y, std::string_view s, double size, const std::string& anchor,
            const std::string& fill = "#1a1a1a", const std::string& extra = "") {
    body_ += fmt::format(
        "  <text x=\"{}\" y=\"{}\" font-size=\"{}\" text-anchor=\"{}\" fill=\"{}\"{}>{}</text>\n",
        px(x), px(y), px(size), anchor, fill, extra, xml_escape(s));
  }

  std::string finish(const std::string& title) const {
    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} "
        "{}\" font-family=\"DejaVu Sans, Verdana, sans-serif\">\n",
        width_, height_, width_, height_);
    out += fmt::format("  <title>{}</title>\n", xml_escape(title));
    out += fmt::format("  <rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
                       width_, height_);
    out += body_;
    out += "</svg>\n";
    return out;
  }

private:
  int width_;
  int height_;
  std::string body_;
};

std::string rotate_attr(double angle, double x, double y) {
  return fmt::format(" transform=\"rotate({} {} {})\"", px(angle), px(x), px(y));
}

struct LinScale {
  double lo = 0.0, hi = 1.0, a = 0.0, b = 1.0;
  double operator()(double v) const { return a + (v - lo) / (hi - lo) * (b - a); }
};

LinScale make_scale(double lo, double hi, double a, double b) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  return {lo, hi, a, b};
}

std::vector<double> nice_ticks(double lo, double hi, int target) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  double step = 10.0;
  if (norm < 1.5)
    step = 1.0;
  else if (norm < 3.5)
    step = 2.0;
  else if (norm < 7.5)
    step = 5.0;
  step *= mag;
  std::vector<double> ticks;
  for (double v = std::ceil(lo / step) * step; v <= hi + step * 1e-9; v += step)
    ticks.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
  return ticks;
}

std::string tick_label(double v) { return fmt::format("{:.6g}", v); }

// Average-rank fraction in [0,1] per value; single value maps to 0.5.
std::vector<double> rank_fractions(std::span<const double> values) {
  const int n = static_cast<int>(values.size());
  std::vector<double> frac(values.size(), 0.5);
  if (n < 2) return frac;
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] < values[b]; });
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * (i + j);
    for (int t = i; t <= j; ++t) frac[order[t]] = avg / (n - 1);
    i = j + 1;
  }
  return frac;
}

std::string pretty_axis_label(const std::string& name) {
  if (auto parsed = try_parse_feature_name(name); parsed && parsed->structured)
    return fmt::format("{} ({})", name, quantity_label(parsed->quantity));
  return name;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out += ch;
  }
  out += '"';
  return out;
}

std::string stripe_label(const ForceItem& item) {
  if (item.value) return fmt::format("{} = {:.4g}", item.label, *item.value);
  return item.label;
}

// Quantile dodging: bucket by phi, stack alternating up/down within each
// bucket, scale the tallest stack to the row height. The seed shuffles
// within-bucket order so identical phi values do not always stack in file
// order.
void assign_jitter(std::vector<BeeswarmPoint>& points, std::uint64_t seed) {
  if (points.size() < 2) return;
  double lo = points[0].phi, hi = points[0].phi;
  for (const auto& p : points) {
    lo = std::min(lo, p.phi);
    hi = std::max(hi, p.phi);
  }
  constexpr int kBins = 25;
  std::vector<std::vector<int>> buckets(kBins);
  for (int i = 0; i < static_cast<int>(points.size()); ++i) {
    int b = 0;
    if (hi > lo)
      b = std::min(kBins - 1, static_cast<int>((points[i].phi - lo) / (hi - lo) * kBins));
    buckets[b].push_back(i);
  }
  size_t tallest = 0;
  for (const auto& bucket : buckets) tallest = std::max(tallest, bucket.size());
  if (tallest < 2) return;
  const double unit = 0.9 / std::ceil((tallest - 1) / 2.0);
  for (int b = 0; b < kBins; ++b) {
    auto& bucket = buckets[b];
    if (bucket.size() < 2) continue;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b) + 1));
    rng.shuffle(bucket);
    for (size_t t = 0; t < bucket.size(); ++t) {
      const int step = static_cast<int>((t + 1) / 2);
      points[bucket[t]].jitter = step == 0 ? 0.0 : (t % 2 == 1 ? step : -step) * unit;
    }
  }
}

void draw_x_ticks(SvgWriter& svg, const LinScale& x, double axis_y, double tick_top,
                  double tick_bottom, bool gridlines, double grid_top) {
  for (double v : nice_ticks(x.lo, x.hi, 6)) {
    const double cx = x(v);
    if (gridlines) svg.line(cx, grid_top, cx, axis_y, kGridHex, 1.0);
    svg.line(cx, tick_top, cx, tick_bottom, kGrayHex, 1.0);
    svg.text(cx, tick_bottom + 13.0, tick_label(v), 10.0, "middle", kGrayHex);
  }
}

void draw_colorbar(SvgWriter& svg, double x, double top, double height, const std::string& low_text,
                   const std::string& high_text, const std::string& side_text) {
  constexpr int kSegments = 40;
  const double seg_h = height / kSegments;
  for (int s = 0; s < kSegments; ++s) {
    const double t = 1.0 - (s + 0.5) / kSegments;  // red at the top
    svg.rect(x, top + s * seg_h, 12.0, seg_h + 0.5, percentile_color(t));
  }
  svg.text(x + 6.0, top - 7.0, high_text, 10.0, "middle", kGrayHex);
  svg.text(x + 6.0, top + height + 14.0, low_text, 10.0, "middle", kGrayHex);
  if (!side_text.empty())
    svg.text(x + 26.0, top + height / 2.0, side_text, 11.0, "middle", kGrayHex,
             rotate_attr(-90.0, x + 26.0, top + height / 2.0));
}

std::string render_summary_bar(const PlotSpec& spec, const SummaryBarData& data) {
  SvgWriter svg(spec.width, spec.height);
  const double l = 250.0, r = 90.0, t = 56.0, b = 52.0;
  const double plot_w = spec.width - l - r;
  const double plot_h = spec.height - t - b;
  const int n = static_cast<int>(data.bars.size());

  double vmax = 0.0;
  for (const auto& bar : data.bars) vmax = std::max(vmax, bar.value);
  if (vmax <= 0.0) vmax = 1.0;
  const LinScale x = make_scale(0.0, vmax * 1.05, l, l + plot_w);

  svg.text(l, t - 24.0, spec.title, 15.0, "start", kInkHex, " font-weight=\"bold\"");
  draw_x_ticks(svg, x, t + plot_h, t + plot_h, t + plot_h + 5.0, true, t);
  svg.line(l, t, l, t + plot_h, kGrayHex, 1.0);
  svg.line(l, t + plot_h, l + plot_w, t + plot_h, kGrayHex, 1.0);

  const double row_h = n > 0 ? plot_h / n : plot_h;
  const double bar_h = row_h * 0.62;
  for (int i = 0; i < n; ++i) {
    const double yc = t + row_h * (i + 0.5);
    svg.rect(l, yc - bar_h / 2.0, std::max(0.0, x(data.bars[i].value) - l), bar_h, kNegHex);
    svg.text(l - 8.0, yc + 4.0, data.bars[i].label, 11.0, "end", kInkHex);
    svg.text(x(data.bars[i].value) + 6.0, yc + 4.0, fmt::format("{:.3g}", data.bars[i].value), 10.0,
             "start", kGrayHex);
  }
  svg.text(l + plot_w / 2.0, spec.height - 14.0, "mean(|SHAP value|) (log-odds)", 12.0, "middle",
           kInkHex);
  return svg.finish(spec.title);
}

std::string render_force(const PlotSpec& spec, const ForceData& data) {
  SvgWriter svg(spec.width, spec.height);
  const double l = 50.0, r = 50.0;
  const double axis_y = 84.0;
  const double band_top = 104.0, band_h = 46.0;

  double sum_pos = 0.0, sum_neg = 0.0;
  for (const auto& item : data.items) (item.phi > 0.0 ? sum_pos : sum_neg) += std::abs(item.phi);
  double lo = std::min({data.base_value, data.fx, data.fx - sum_pos});
  double hi = std::max({data.base_value, data.fx, data.fx + sum_neg});
  const double pad = (hi - lo) * 0.08 + 1e-12;
  const LinScale x = make_scale(lo - pad, hi + pad, l, spec.width - r);

  svg.text(l, 30.0, spec.title, 15.0, "start", kInkHex, " font-weight=\"bold\"");
  svg.line(l, axis_y, spec.width - r, axis_y, kGrayHex, 1.0);
  for (double v : nice_ticks(x.lo, x.hi, 8)) {
    svg.line(x(v), axis_y - 4.0, x(v), axis_y, kGrayHex, 1.0);
    svg.text(x(v), axis_y - 9.0, tick_label(v), 10.0, "middle", kGrayHex);
  }

  // Positive stripes push rightward and stack left of fx; negative stripes
  // oppose them from the right. Largest impact sits next to the junction.
  struct Stripe {
    size_t item;
    double x1, x2;
  };
  std::vector<Stripe> stripes;
  double cursor = data.fx;
  for (size_t i = 0; i < data.items.size(); ++i) {
    if (data.items[i].phi <= 0.0) continue;
    stripes.push_back({i, cursor - data.items[i].phi, cursor});
    cursor -= data.items[i].phi;
  }
  cursor = data.fx;
  for (size_t i = 0; i < data.items.size(); ++i) {
    if (data.items[i].phi >= 0.0) continue;
    stripes.push_back({i, cursor, cursor - data.items[i].phi});
    cursor -= data.items[i].phi;
  }
  for (const auto& s : stripes) {
    const bool positive = data.items[s.item].phi > 0.0;
    svg.rect(x(s.x1), band_top, std::max(0.5, x(s.x2) - x(s.x1)), band_h,
             positive ? kPosHex : kNegHex, " stroke=\"#ffffff\" stroke-width=\"1\"");
  }

  // Label the widest stripes below the band; items are already sorted by
  // impact so the first few cover the visible area.
  constexpr size_t kMaxStripeLabels = 8;
  for (const auto& s : stripes) {
    if (s.item >= kMaxStripeLabels) continue;
    const double cx = (x(s.x1) + x(s.x2)) / 2.0;
    const bool positive = data.items[s.item].phi > 0.0;
    svg.line(cx, band_top + band_h, cx, band_top + band_h + 8.0, kGrayHex, 1.0);
    svg.text(cx, band_top + band_h + 22.0, stripe_label(data.items[s.item]), 10.0, "end",
             positive ? kPosHex : kNegHex, rotate_attr(-35.0, cx, band_top + band_h + 22.0));
  }

  svg.line(x(data.base_value), axis_y, x(data.base_value), band_top + band_h, kGrayHex, 1.0,
           " stroke-dasharray=\"4 3\"");
  svg.text(x(data.base_value), 52.0, fmt::format("base value = {:.4g}", data.base_value), 11.0,
           "middle", kGrayHex);
  svg.line(x(data.fx), axis_y, x(data.fx), band_top + band_h, kInkHex, 1.5);
  svg.text(x(data.fx), 66.0, fmt::format("f(x) = {:.4g}", data.fx), 12.0, "middle", kInkHex,
           " font-weight=\"bold\"");
  svg.text(spec.width - r, spec.height - 12.0, "model output (log-odds)", 11.0, "end", kGrayHex);
  return svg.finish(spec.title);
}

std::string render_waterfall(const PlotSpec& spec, const WaterfallData& data) {
  SvgWriter svg(spec.width, spec.height);
  const double l = 250.0, r = 110.0, t = 64.0, b = 64.0;
  const double plot_w = spec.width - l - r;
  const double plot_h = spec.height - t - b;
  const int n = static_cast<int>(data.bars.size());

  double lo = std::min(data.base_value, data.fx);
  double hi = std::max(data.base_value, data.fx);
  double cum = data.base_value;
  for (const auto& bar : data.bars) {
    cum += bar.phi;
    lo = std::min(lo, cum);
    hi = std::max(hi, cum);
  }
  const double pad = (hi - lo) * 0.1 + 1e-12;
  const LinScale x = make_scale(lo - pad, hi + pad, l, l + plot_w);

  svg.text(l, t - 36.0, spec.title, 15.0, "start", kInkHex, " font-weight=\"bold\"");
  draw_x_ticks(svg, x, t + plot_h, t + plot_h, t + plot_h + 5.0, true, t);

  svg.line(x(data.base_value), t - 6.0, x(data.base_value), t + plot_h, kGrayHex, 1.0,
           " stroke-dasharray=\"4 3\"");
  svg.text(x(data.base_value), t - 12.0, fmt::format("E[f(X)] = {:.4g}", data.base_value), 11.0,
           "middle", kGrayHex);
  svg.line(x(data.fx), t - 6.0, x(data.fx), t + plot_h, kInkHex, 1.0,
           " stroke-dasharray=\"4 3\"");
  svg.text(x(data.fx), t - 26.0, fmt::format("f(x) = {:.4g}", data.fx), 11.0, "middle", kInkHex,
           " font-weight=\"bold\"");

  const double row_h = n > 0 ? plot_h / n : plot_h;
  const double bar_h = row_h * 0.58;
  cum = data.base_value;
  for (int i = 0; i < n; ++i) {
    const auto& bar = data.bars[i];
    const double yc = t + row_h * (i + 0.5);
    const double x1 = x(cum);
    const double x2 = x(cum + bar.phi);
    const bool positive = bar.phi >= 0.0;
    svg.rect(std::min(x1, x2), yc - bar_h / 2.0, std::max(1.0, std::abs(x2 - x1)), bar_h,
             positive ? kPosHex : kNegHex);
    svg.text(l - 8.0, yc + 4.0, bar.label, 11.0, "end", kInkHex);
    if (positive)
      svg.text(x2 + 6.0, yc + 4.0, fmt::format("{:+.2f}", bar.phi), 10.0, "start", kPosHex);
    else
      svg.text(x2 - 6.0, yc + 4.0, fmt::format("{:+.2f}", bar.phi), 10.0, "end", kNegHex);
    cum += bar.phi;
    if (i + 1 < n)
      svg.line(x(cum), yc, x(cum), t + row_h * (i + 1.5), "#bdbdbd", 1.0);
  }
  svg.text(l + plot_w / 2.0, spec.height - 14.0, "model output (log-odds)", 12.0, "middle",
           kInkHex);
  return svg.finish(spec.title);
}

std::string render_beeswarm(const PlotSpec& spec, const BeeswarmData& data) {
  SvgWriter svg(spec.width, spec.height);
  const double l = 250.0, r = 110.0, t = 56.0, b = 56.0;
  const double plot_w = spec.width - l - r;
  const double plot_h = spec.height - t - b;
  const int n = static_cast<int>(data.rows.size());

  double lo = 0.0, hi = 0.0;
  for (const auto& row : data.rows)
    for (const auto& p : row.points) {
      lo = std::min(lo, p.phi);
      hi = std::max(hi, p.phi);
    }
  const double pad = (hi - lo) * 0.08 + 1e-12;
  const LinScale x = make_scale(lo - pad, hi + pad, l, l + plot_w);

  svg.text(l, t - 24.0, spec.title, 15.0, "start", kInkHex, " font-weight=\"bold\"");
  draw_x_ticks(svg, x, t + plot_h, t + plot_h, t + plot_h + 5.0, false, t);
  svg.line(x(0.0), t, x(0.0), t + plot_h, "#bdbdbd", 1.0, " stroke-dasharray=\"3 3\"");

  const double row_h = n > 0 ? plot_h / n : plot_h;
  for (int i = 0; i < n; ++i) {
    const auto& row = data.rows[i];
    const double yc = t + row_h * (i + 0.5);
    svg.text(l - 8.0, yc + 4.0, row.label, 11.0, "end", kInkHex);
    for (const auto& p : row.points)
      svg.circle(x(p.phi), yc + p.jitter * row_h * 0.45, 2.2, percentile_color(p.percentile),
                 " fill-opacity=\"0.85\"");
  }
  draw_colorbar(svg, spec.width - r + 40.0, t, plot_h, "Low", "High", "Feature value");
  svg.text(l + plot_w / 2.0, spec.height - 14.0, "SHAP value (log-odds)", 12.0, "middle", kInkHex);
  return svg.finish(spec.title);
}

std::string render_dependence(const PlotSpec& spec, const DependenceData& data) {
  SvgWriter svg(spec.width, spec.height);
  const double l = 90.0, r = 120.0, t = 56.0, b = 70.0;
  const double plot_w = spec.width - l - r;
  const double plot_h = spec.height - t - b;

  double xlo = 0.0, xhi = 0.0, ylo = 0.0, yhi = 0.0;
  if (!data.points.empty()) {
    xlo = xhi = data.points[0].x;
    for (const auto& p : data.points) {
      xlo = std::min(xlo, p.x);
      xhi = std::max(xhi, p.x);
      ylo = std::min(ylo, p.phi);
      yhi = std::max(yhi, p.phi);
    }
  }
  const double xpad = (xhi - xlo) * 0.06 + 1e-12;
  const double ypad = (yhi - ylo) * 0.08 + 1e-12;
  const LinScale x = make_scale(xlo - xpad, xhi + xpad, l, l + plot_w);
  const LinScale y = make_scale(ylo - ypad, yhi + ypad, t + plot_h, t);

  svg.text(l, t - 24.0, spec.title, 15.0, "start", kInkHex, " font-weight=\"bold\"");
  draw_x_ticks(svg, x, t + plot_h, t + plot_h, t + plot_h + 5.0, true, t);
  for (double v : nice_ticks(y.lo, y.hi, 6)) {
    svg.line(l, y(v), l + plot_w, y(v), kGridHex, 1.0);
    svg.text(l - 8.0, y(v) + 4.0, tick_label(v), 10.0, "end", kGrayHex);
  }
  if (y.lo < 0.0 && y.hi > 0.0) svg.line(l, y(0.0), l + plot_w, y(0.0), "#9e9e9e", 1.0);
  svg.line(l, t, l, t + plot_h, kGrayHex, 1.0);
  svg.line(l, t + plot_h, l + plot_w, t + plot_h, kGrayHex, 1.0);

  for (const auto& p : data.points)
    svg.circle(x(p.x), y(p.phi), 2.5, percentile_color(p.percentile), " fill-opacity=\"0.85\"");

  svg.text(l + plot_w / 2.0, spec.height - 16.0, pretty_axis_label(data.feature), 12.0, "middle",
           kInkHex);
  svg.text(24.0, t + plot_h / 2.0, fmt::format("SHAP value for {} (log-odds)", data.feature), 11.0,
           "middle", kInkHex, rotate_attr(-90.0, 24.0, t + plot_h / 2.0));
  draw_colorbar(svg, spec.width - r + 50.0, t, plot_h, "Low", "High", data.partner);
  return svg.finish(spec.title);
}

std::string render_heatmap(const PlotSpec& spec, const HeatmapData& data) {
  SvgWriter svg(spec.width, spec.height);
  const auto& c = data.matrix;
  const int n = std::max(1, c.n);
  const double cell = c.n <= 12 ? 56.0 : 40.0;
  const double l = 170.0, t = 80.0;

  svg.text(l, t - 40.0, spec.title, 15.0, "start", kInkHex, " font-weight=\"bold\"");
  for (int i = 0; i < c.n; ++i) {
    for (int j = 0; j < c.n; ++j) {
      const double r = c.at(i, j);
      const double cx = l + j * cell;
      const double cy = t + i * cell;
      svg.rect(cx, cy, cell, cell, diverging_color(r), " stroke=\"#cccccc\" stroke-width=\"0.5\"");
      svg.text(cx + cell / 2.0, cy + cell / 2.0 + 4.0, fmt::format("{:.2f}", r),
               cell >= 50.0 ? 11.0 : 9.5, "middle", std::abs(r) > 0.55 ? "#ffffff" : kInkHex);
    }
  }
  for (int i = 0; i < c.n; ++i)
    svg.text(l - 8.0, t + i * cell + cell / 2.0 + 4.0, c.names[static_cast<size_t>(i)], 11.0, "end",
             kInkHex);
  for (int j = 0; j < c.n; ++j) {
    const double cx = l + j * cell + cell / 2.0;
    const double cy = t + n * cell + 14.0;
    svg.text(cx, cy, c.names[static_cast<size_t>(j)], 11.0, "end", kInkHex,
             rotate_attr(-60.0, cx, cy));
  }

  // Diverging legend, +1 at the top.
  const double bar_x = l + n * cell + 28.0;
  const double bar_h = n * cell;
  constexpr int kSegments = 40;
  for (int s = 0; s < kSegments; ++s) {
    const double v = 1.0 - 2.0 * (s + 0.5) / kSegments;
    svg.rect(bar_x, t + s * (bar_h / kSegments), 14.0, bar_h / kSegments + 0.5,
             diverging_color(v));
  }
  svg.text(bar_x + 20.0, t + 6.0, "+1", 10.0, "start", kInkHex);
  svg.text(bar_x + 20.0, t + bar_h / 2.0 + 4.0, "0", 10.0, "start", kInkHex);
  svg.text(bar_x + 20.0, t + bar_h, "-1", 10.0, "start", kInkHex);
  return svg.finish(spec.title);
}

}  // namespace

std::string_view plot_kind_name(PlotKind kind) {
  switch (kind) {
    case PlotKind::SummaryBar: return "summary_bar";
    case PlotKind::Force: return "force";
    case PlotKind::Waterfall: return "waterfall";
    case PlotKind::Beeswarm: return "beeswarm";
    case PlotKind::Dependence: return "dependence";
    case PlotKind::Heatmap: return "heatmap";
  }
  return "unknown";
}

PlotSpec summary_bar(const ImportanceRanking& ranking, int top_n) {
  SummaryBarData data;
  const int n = std::clamp(top_n, 0, static_cast<int>(ranking.entries.size()));
  for (int i = 0; i < n; ++i)
    data.bars.push_back({ranking.entries[static_cast<size_t>(i)].first,
                         ranking.entries[static_cast<size_t>(i)].second});
  PlotSpec spec;
  spec.kind = PlotKind::SummaryBar;
  spec.title = "Mean |SHAP| feature importance";
  spec.width = 860;
  spec.height = 150 + std::max(1, n) * 34;
  spec.data = std::move(data);
  return spec;
}

PlotSpec force(const ShapExplanation& e, std::span<const std::string> feature_names,
               std::span<const double> row_values) {
  if (!feature_names.empty() && feature_names.size() != e.phi.size())
    fail(ErrorCode::LengthMismatch, "force: feature name count does not match phi");
  if (!row_values.empty() && row_values.size() != e.phi.size())
    fail(ErrorCode::LengthMismatch, "force: row value count does not match phi");

  ForceData data;
  data.base_value = e.base_value;
  data.fx = e.fx;
  for (size_t j = 0; j < e.phi.size(); ++j) {
    if (e.phi[j] == 0.0) continue;
    ForceItem item;
    item.label = feature_names.empty() ? fmt::format("feature {}", j)
                                       : feature_names[j];
    item.phi = e.phi[j];
    if (!row_values.empty()) item.value = row_values[j];
    data.items.push_back(std::move(item));
  }
  std::stable_sort(data.items.begin(), data.items.end(), [](const ForceItem& a, const ForceItem& b) {
    return std::abs(a.phi) > std::abs(b.phi);
  });

  PlotSpec spec;
  spec.kind = PlotKind::Force;
  spec.title = e.row_ref >= 0 ? fmt::format("Force plot (row {})", e.row_ref) : "Force plot";
  spec.width = 960;
  spec.height = 320;
  spec.data = std::move(data);
  return spec;
}

PlotSpec waterfall(const ShapExplanation& e, std::span<const std::string> feature_names,
                   int max_features, std::span<const double> row_values) {
  if (!feature_names.empty() && feature_names.size() != e.phi.size())
    fail(ErrorCode::LengthMismatch, "waterfall: feature name count does not match phi");
  if (!row_values.empty() && row_values.size() != e.phi.size())
    fail(ErrorCode::LengthMismatch, "waterfall: row value count does not match phi");
  max_features = std::max(1, max_features);

  std::vector<size_t> order(e.phi.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return std::abs(e.phi[a]) > std::abs(e.phi[b]); });

  auto label_of = [&](size_t j) {
    std::string name =
        feature_names.empty() ? fmt::format("feature {}", j) : feature_names[j];
    if (!row_values.empty()) return fmt::format("{} = {:.4g}", name, row_values[j]);
    return name;
  };

  WaterfallData data;
  data.base_value = e.base_value;
  data.fx = e.fx;
  const size_t keep = std::min<size_t>(static_cast<size_t>(max_features), order.size());
  for (size_t i = 0; i < keep; ++i)
    data.bars.push_back({label_of(order[i]), e.phi[order[i]]});
  if (keep < order.size()) {
    double rest = 0.0;
    for (size_t i = keep; i < order.size(); ++i) rest += e.phi[order[i]];
    data.bars.push_back({fmt::format("{} others", order.size() - keep), rest});
  }

  PlotSpec spec;
  spec.kind = PlotKind::Waterfall;
  spec.title =
      e.row_ref >= 0 ? fmt::format("Waterfall plot (row {})", e.row_ref) : "Waterfall plot";
  spec.width = 900;
  spec.height = 160 + static_cast<int>(data.bars.size()) * 40;
  spec.data = std::move(data);
  return spec;
}

PlotSpec beeswarm(std::span<const ShapExplanation> explanations, const EventTable& table,
                  std::uint64_t seed, int max_features) {
  if (explanations.empty()) fail(ErrorCode::EmptyInput, "beeswarm: no explanations");
  if (static_cast<int>(explanations.size()) != table.rows())
    fail(ErrorCode::DimensionMismatch,
         fmt::format("beeswarm: {} explanations for {} rows", explanations.size(), table.rows()));
  for (const auto& e : explanations)
    if (static_cast<int>(e.phi.size()) != table.cols())
      fail(ErrorCode::DimensionMismatch, "beeswarm: phi length does not match table width");

  const auto names = table.feature_names();
  const ImportanceRanking ranking = mean_abs_shap(explanations, names);
  const int n = std::min(std::max(0, max_features), static_cast<int>(ranking.entries.size()));

  BeeswarmData data;
  std::vector<double> column(static_cast<size_t>(table.rows()));
  for (int r = 0; r < n; ++r) {
    const std::string& name = ranking.entries[static_cast<size_t>(r)].first;
    const int j = table.feature_index(name);
    for (int i = 0; i < table.rows(); ++i) column[static_cast<size_t>(i)] = table.values.at(i, j);
    const auto frac = rank_fractions(column);

    BeeswarmRow row;
    row.label = name;
    row.points.resize(static_cast<size_t>(table.rows()));
    for (int i = 0; i < table.rows(); ++i)
      row.points[static_cast<size_t>(i)] = {explanations[static_cast<size_t>(i)].phi[static_cast<size_t>(j)],
                                            frac[static_cast<size_t>(i)], 0.0};
    assign_jitter(row.points, derive_seed(seed, static_cast<std::uint64_t>(r)));
    data.rows.push_back(std::move(row));
  }

  PlotSpec spec;
  spec.kind = PlotKind::Beeswarm;
  spec.title = "SHAP beeswarm";
  spec.width = 920;
  spec.height = 140 + std::max(1, n) * 42;
  spec.data = std::move(data);
  return spec;
}

PlotSpec dependence(int feature, int partner, const EventTable& table,
                    std::span<const ShapExplanation> explanations) {
  if (feature < 0 || feature >= table.cols())
    fail(ErrorCode::UnknownFeature, fmt::format("dependence: no feature column {}", feature));
  if (partner < 0 || partner >= table.cols())
    fail(ErrorCode::UnknownFeature, fmt::format("dependence: no partner column {}", partner));
  if (explanations.empty()) fail(ErrorCode::EmptyInput, "dependence: no explanations");
  if (static_cast<int>(explanations.size()) != table.rows())
    fail(ErrorCode::DimensionMismatch,
         fmt::format("dependence: {} explanations for {} rows", explanations.size(), table.rows()));
  for (const auto& e : explanations)
    if (static_cast<int>(e.phi.size()) != table.cols())
      fail(ErrorCode::DimensionMismatch, "dependence: phi length does not match table width");

  std::vector<double> partner_col(static_cast<size_t>(table.rows()));
  for (int i = 0; i < table.rows(); ++i)
    partner_col[static_cast<size_t>(i)] = table.values.at(i, partner);
  const auto frac = rank_fractions(partner_col);

  DependenceData data;
  data.feature = table.features[static_cast<size_t>(feature)].raw;
  data.partner = table.features[static_cast<size_t>(partner)].raw;
  data.points.resize(static_cast<size_t>(table.rows()));
  for (int i = 0; i < table.rows(); ++i)
    data.points[static_cast<size_t>(i)] = {table.values.at(i, feature),
                                           explanations[static_cast<size_t>(i)].phi[static_cast<size_t>(feature)],
                                           frac[static_cast<size_t>(i)]};

  PlotSpec spec;
  spec.kind = PlotKind::Dependence;
  spec.title = fmt::format("Dependence plot: {}", data.feature);
  spec.width = 760;
  spec.height = 540;
  spec.data = std::move(data);
  return spec;
}

PlotSpec heatmap(const CorrelationMatrix& c) {
  PlotSpec spec;
  spec.kind = PlotKind::Heatmap;
  spec.title = "Pearson feature correlation";
  const int n = std::max(1, c.n);
  const double cell = c.n <= 12 ? 56.0 : 40.0;
  spec.width = 170 + static_cast<int>(n * cell) + 110;
  spec.height = 80 + static_cast<int>(n * cell) + 160;
  spec.data = HeatmapData{c};
  return spec;
}

std::string render_svg(const PlotSpec& spec) {
  switch (spec.kind) {
    case PlotKind::SummaryBar:
      if (auto* d = std::get_if<SummaryBarData>(&spec.data)) return render_summary_bar(spec, *d);
      break;
    case PlotKind::Force:
      if (auto* d = std::get_if<ForceData>(&spec.data)) return render_force(spec, *d);
      break;
    case PlotKind::Waterfall:
      if (auto* d = std::get_if<WaterfallData>(&spec.data)) return render_waterfall(spec, *d);
      break;
    case PlotKind::Beeswarm:
      if (auto* d = std::get_if<BeeswarmData>(&spec.data)) return render_beeswarm(spec, *d);
      break;
    case PlotKind::Dependence:
      if (auto* d = std::get_if<DependenceData>(&spec.data)) return render_dependence(spec, *d);
      break;
    case PlotKind::Heatmap:
      if (auto* d = std::get_if<HeatmapData>(&spec.data)) return render_heatmap(spec, *d);
      break;
  }
  fail(ErrorCode::InvalidArgument, "render_svg: payload does not match plot kind");
}

std::string plot_csv(const PlotSpec& spec) {
  std::string out;
  switch (spec.kind) {
    case PlotKind::SummaryBar:
      if (auto* d = std::get_if<SummaryBarData>(&spec.data)) {
        out += "feature,mean_abs_shap\n";
        for (const auto& bar : d->bars)
          out += fmt::format("{},{}\n", csv_field(bar.label), format_double(bar.value));
        return out;
      }
      break;
    case PlotKind::Force:
      if (auto* d = std::get_if<ForceData>(&spec.data)) {
        out += fmt::format("base_value,{}\n", format_double(d->base_value));
        out += fmt::format("fx,{}\n", format_double(d->fx));
        out += "feature,phi,value\n";
        for (const auto& item : d->items)
          out += fmt::format("{},{},{}\n", csv_field(item.label), format_double(item.phi),
                             item.value ? format_double(*item.value) : std::string());
        return out;
      }
      break;
    case PlotKind::Waterfall:
      if (auto* d = std::get_if<WaterfallData>(&spec.data)) {
        out += fmt::format("base_value,{}\n", format_double(d->base_value));
        out += fmt::format("fx,{}\n", format_double(d->fx));
        out += "label,phi\n";
        for (const auto& bar : d->bars)
          out += fmt::format("{},{}\n", csv_field(bar.label), format_double(bar.phi));
        return out;
      }
      break;
    case PlotKind::Beeswarm:
      if (auto* d = std::get_if<BeeswarmData>(&spec.data)) {
        out += "feature,phi,percentile,jitter\n";
        for (const auto& row : d->rows)
          for (const auto& p : row.points)
            out += fmt::format("{},{},{},{}\n", csv_field(row.label), format_double(p.phi),
                               format_double(p.percentile), format_double(p.jitter));
        return out;
      }
      break;
    case PlotKind::Dependence:
      if (auto* d = std::get_if<DependenceData>(&spec.data)) {
        out += fmt::format("feature,{}\n", csv_field(d->feature));
        out += fmt::format("partner,{}\n", csv_field(d->partner));
        out += "x,phi,percentile\n";
        for (const auto& p : d->points)
          out += fmt::format("{},{},{}\n", format_double(p.x), format_double(p.phi),
                             format_double(p.percentile));
        return out;
      }
      break;
    case PlotKind::Heatmap:
      if (auto* d = std::get_if<HeatmapData>(&spec.data)) {
        out += "feature";
        for (const auto& name : d->matrix.names) out += fmt::format(",{}", csv_field(name));
        out += ",constant\n";
        for (int i = 0; i < d->matrix.n; ++i) {
          out += csv_field(d->matrix.names[static_cast<size_t>(i)]);
          for (int j = 0; j < d->matrix.n; ++j)
            out += fmt::format(",{}", format_double(d->matrix.at(i, j)));
          out += fmt::format(",{}\n", d->matrix.constant[static_cast<size_t>(i)] ? 1 : 0);
        }
        return out;
      }
      break;
  }
  fail(ErrorCode::InvalidArgument, "plot_csv: payload does not match plot kind");
}

void write_plot(const PlotSpec& spec, const std::string& base_path) {
  auto write_file = [](const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoFailure, fmt::format("cannot open {} for writing", path));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorCode::IoFailure, fmt::format("write failed for {}", path));
  };
  write_file(base_path + ".svg", render_svg(spec));
  write_file(base_path + ".csv", plot_csv(spec));
}

}  // namespace gridshap
