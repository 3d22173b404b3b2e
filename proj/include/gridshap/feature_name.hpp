#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace gridshap {

enum class SignalKind { PhaseMagnitude, PhaseAngle };

enum class Quantity {
  Voltage,         // V
  Current,         // I
  VoltageAngle,    // VH
  CurrentAngle,    // IH
  ImpedanceAngle,  // ZH
  Impedance,       // Z
  Other,           // any unrecognized suffix, kept verbatim
};

// PMU channel name of the form "R<relay>-<PM|PA><channel?>:<suffix>",
// e.g. "R1-PM5:I" or the relay-level "R2-PA:ZH". Columns that do not match
// the scheme (log counters and the like) are carried as unstructured names so
// a raw dataset file still loads.
struct FeatureName {
  std::string raw;
  bool structured = false;
  int relay_id = 0;  // 1..4 when structured
  SignalKind signal_kind = SignalKind::PhaseMagnitude;
  std::optional<int> channel;  // 1..12; absent for relay-level signals
  Quantity quantity = Quantity::Other;
  std::string suffix;

  // Rebuilds the canonical spelling; equals `raw` for every accepted name.
  std::string format() const;

  static FeatureName unstructured(std::string raw_name);
};

std::optional<FeatureName> try_parse_feature_name(std::string_view raw);

// Throws Error{MalformedName} when the grammar is violated.
FeatureName parse_feature_name(std::string_view raw);

std::string_view quantity_label(Quantity q);

}  // namespace gridshap
