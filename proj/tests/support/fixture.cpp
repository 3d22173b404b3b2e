#include "support/fixture.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "gridshap/common.hpp"
#include "gridshap/dataset.hpp"

namespace gridshap::testing {
namespace {

constexpr double kPi = 3.14159265358979323846;

// (row, column) slots that get overwritten with infinity spellings.
struct InfSlot {
  int row;
  int col;
  const char* text;
};
constexpr InfSlot kInfSlots[] = {{7, 5, "inf"}, {42, 100, "+inf"}, {108, 3, "-inf"}};

double unit_open(Rng& rng) {
  // (0, 1]; Box-Muller needs log of a nonzero value.
  return static_cast<double>((rng.next() >> 11) + 1) * 0x1.0p-53;
}

double gauss(Rng& rng) {
  const double u1 = unit_open(rng);
  const double u2 = static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

struct Offsets {
  double attack;
  double natural;
  double noevents;
  double noise;
};

double planted(const Offsets& o, EventClass label, double g) {
  switch (label) {
    case EventClass::Attack: return o.attack + o.noise * g;
    case EventClass::Natural: return o.natural + o.noise * g;
    default: return o.noevents + o.noise * g;
  }
}

}  // namespace

std::vector<std::string> fixture_feature_names() {
  std::vector<std::string> names;
  names.reserve(127);
  for (int relay = 1; relay <= 4; ++relay) {
    for (int ch = 1; ch <= 12; ++ch)
      names.push_back(fmt::format("R{}-PM{}:{}", relay, ch, ch % 2 == 1 ? "V" : "I"));
    for (int ch = 1; ch <= 12; ++ch)
      names.push_back(fmt::format("R{}-PA{}:{}", relay, ch, ch % 2 == 1 ? "VH" : "IH"));
  }
  for (int relay = 1; relay <= 4; ++relay) {
    names.push_back(fmt::format("R{}-PM:V", relay));
    names.push_back(fmt::format("R{}-PM:I", relay));
    names.push_back(fmt::format("R{}-PM:Z", relay));
    names.push_back(fmt::format("R{}-PA:VH", relay));
    names.push_back(fmt::format("R{}-PA:IH", relay));
    names.push_back(fmt::format("R{}-PA:ZH", relay));
  }
  for (int ch = 1; ch <= 7; ++ch) names.push_back(fmt::format("R1-PM{}:VH", ch));
  return names;
}

std::string fixture_csv(const FixtureSpec& spec) {
  const auto names = fixture_feature_names();
  const int cols = static_cast<int>(names.size());

  std::string out;
  out.reserve(static_cast<size_t>(spec.rows + 1) * static_cast<size_t>(cols) * 10);
  for (const auto& name : names) {
    out += name;
    out += ',';
  }
  out += "marker\n";

  Rng rng(spec.seed);
  std::vector<std::string> cells(static_cast<size_t>(cols));
  for (int r = 0; r < spec.rows; ++r) {
    const double u = unit_open(rng);
    const EventClass label = u < 0.60   ? EventClass::Attack
                             : u < 0.90 ? EventClass::Natural
                                        : EventClass::NoEvents;
    const double sign = rng.bounded(2) == 0 ? -1.0 : 1.0;
    const bool attack = label == EventClass::Attack;

    for (int c = 0; c < cols; ++c) {
      double v;
      if (c == 100) {
        v = 3.14;  // constant column; scaler and heatmap must cope
      } else {
        const double g = gauss(rng);
        switch (c) {
          case 0: v = planted({1.6, -1.0, 0.0, 0.8}, label, g); break;
          case 1: v = planted({-1.2, 1.1, 0.3, 0.8}, label, g); break;
          case 2: v = planted({-0.3, -0.3, 2.2, 0.8}, label, g); break;
          case 3: v = sign + 0.35 * g; break;
          case 4: v = (attack ? sign : -sign) * 1.2 + 0.4 * g; break;
          case 5: v = planted({0.5, 0.0, -0.2, 1.0}, label, g); break;
          case 6: v = planted({-0.4, 0.3, 0.1, 1.0}, label, g); break;
          case 7: v = planted({0.25, -0.3, 0.0, 1.0}, label, g); break;
          case 8: v = planted({0.0, 0.35, -0.3, 1.0}, label, g); break;
          case 9: v = planted({-0.2, 0.15, 0.45, 1.0}, label, g); break;
          default: v = g; break;
        }
      }
      cells[static_cast<size_t>(c)] = format_double(v);
    }
    if (spec.inject_inf)
      for (const auto& slot : kInfSlots)
        if (slot.row == r) cells[static_cast<size_t>(slot.col)] = slot.text;

    for (const auto& cell : cells) {
      out += cell;
      out += ',';
    }
    out += event_class_name(label);
    out += '\n';
  }
  return out;
}

void write_fixture(const std::string& path, const FixtureSpec& spec) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoFailure, fmt::format("cannot write {}", path));
  const std::string text = fixture_csv(spec);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) fail(ErrorCode::IoFailure, fmt::format("short write to {}", path));
}

std::vector<int> fixture_inf_rows(const FixtureSpec& spec) {
  std::vector<int> rows;
  if (!spec.inject_inf) return rows;
  for (const auto& slot : kInfSlots)
    if (slot.row < spec.rows) rows.push_back(slot.row);
  return rows;
}

}  // namespace gridshap::testing
