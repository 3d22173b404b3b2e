#include "gridshap/feature_name.hpp"

#include <fmt/format.h>

#include <cctype>

#include "gridshap/common.hpp"

namespace gridshap {
namespace {

Quantity quantity_from_suffix(std::string_view s) {
  if (s == "V") return Quantity::Voltage;
  if (s == "I") return Quantity::Current;
  if (s == "VH") return Quantity::VoltageAngle;
  if (s == "IH") return Quantity::CurrentAngle;
  if (s == "ZH") return Quantity::ImpedanceAngle;
  if (s == "Z") return Quantity::Impedance;
  return Quantity::Other;
}

// Consumes a run of digits; empty result means "no digits".
std::optional<int> take_digits(std::string_view& s) {
  size_t n = 0;
  while (n < s.size() && std::isdigit(static_cast<unsigned char>(s[n]))) ++n;
  if (n == 0) return std::nullopt;
  int value = 0;
  for (size_t i = 0; i < n; ++i) {
    value = value * 10 + (s[i] - '0');
    if (value > 1000) break;  // caller range-checks anyway
  }
  s.remove_prefix(n);
  return value;
}

}  // namespace

std::string FeatureName::format() const {
  if (!structured) return raw;
  std::string kind = signal_kind == SignalKind::PhaseMagnitude ? "PM" : "PA";
  if (channel) return fmt::format("R{}-{}{}:{}", relay_id, kind, *channel, suffix);
  return fmt::format("R{}-{}:{}", relay_id, kind, suffix);
}

FeatureName FeatureName::unstructured(std::string raw_name) {
  FeatureName f;
  f.raw = std::move(raw_name);
  f.structured = false;
  f.suffix = f.raw;
  return f;
}

std::optional<FeatureName> try_parse_feature_name(std::string_view raw) {
  std::string_view rest = raw;
  if (rest.empty() || rest.front() != 'R') return std::nullopt;
  rest.remove_prefix(1);

  auto relay = take_digits(rest);
  if (!relay || *relay < 1 || *relay > 4) return std::nullopt;

  if (rest.empty() || rest.front() != '-') return std::nullopt;
  rest.remove_prefix(1);

  SignalKind kind;
  if (rest.substr(0, 2) == "PM") {
    kind = SignalKind::PhaseMagnitude;
  } else if (rest.substr(0, 2) == "PA") {
    kind = SignalKind::PhaseAngle;
  } else {
    return std::nullopt;
  }
  rest.remove_prefix(2);

  auto channel = take_digits(rest);
  if (channel && (*channel < 1 || *channel > 12)) return std::nullopt;

  if (rest.empty() || rest.front() != ':') return std::nullopt;
  rest.remove_prefix(1);
  if (rest.empty()) return std::nullopt;

  FeatureName f;
  f.raw = std::string(raw);
  f.structured = true;
  f.relay_id = *relay;
  f.signal_kind = kind;
  f.channel = channel;
  f.suffix = std::string(rest);
  f.quantity = quantity_from_suffix(rest);
  return f;
}

FeatureName parse_feature_name(std::string_view raw) {
  auto parsed = try_parse_feature_name(raw);
  if (!parsed) fail(ErrorCode::MalformedName, fmt::format("'{}'", raw));
  return *parsed;
}

std::string_view quantity_label(Quantity q) {
  switch (q) {
    case Quantity::Voltage: return "Voltage Phase Magnitude";
    case Quantity::Current: return "Current Phase Magnitude";
    case Quantity::VoltageAngle: return "Voltage Phase Angle";
    case Quantity::CurrentAngle: return "Current Phase Angle";
    case Quantity::ImpedanceAngle: return "Apparent Impedance Angle";
    case Quantity::Impedance: return "Apparent Impedance";
    case Quantity::Other: return "Signal";
  }
  return "Signal";
}

}  // namespace gridshap
