#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridshap/common.hpp"
#include "gridshap/feature_name.hpp"

namespace gridshap {

// Three-way event marker. Codes follow the lexicographic order of the
// canonical names: "Attack" < "Natural" < "NoEvents".
enum class EventClass : std::uint8_t { Attack = 0, Natural = 1, NoEvents = 2 };

std::string_view event_class_name(EventClass c);

// Accepts canonical names plus common spellings ("Attack Events",
// "no-events", ...). Case/space/hyphen insensitive.
std::optional<EventClass> parse_event_class(std::string_view text);

struct LabelEncoding {
  std::vector<EventClass> classes;  // code -> class, canonical order

  int size() const { return static_cast<int>(classes.size()); }
  int code_of(EventClass c) const;
  EventClass class_of(int code) const;
  std::vector<std::string> class_names() const;
};

// Immutable after construction; rows are finite by construction.
struct EventTable {
  std::vector<FeatureName> features;
  Matrix values;
  std::vector<EventClass> labels;
  std::string source;
  std::vector<int> row_ids;  // indices into the source file's data rows

  int rows() const { return values.rows; }
  int cols() const { return values.cols; }
  int feature_index(std::string_view name) const;  // -1 when absent
  std::vector<std::string> feature_names() const;

  // New table restricted to the named columns, in the given order.
  EventTable select_columns(const std::vector<std::string>& names) const;
};

struct LoadOptions {
  std::string label_column = "marker";
  // Optional scenario-number -> class mapping for files whose marker column
  // holds numeric scenario ids instead of class names.
  std::map<int, EventClass> marker_map;
  // Optional schema manifest: restrict and order feature columns.
  std::vector<std::string> keep_columns;
};

struct LoadResult {
  EventTable table;
  int rows_in = 0;                // data rows present in the file
  std::vector<int> dropped_rows;  // 0-based data-row indices removed by cleaning
};

LoadResult load_events(const std::string& path, const LoadOptions& options = {});
LoadResult load_events_stream(std::istream& in, const std::string& source_name,
                              const LoadOptions& options = {});

// Removes rows containing any non-finite cell. Idempotent.
std::pair<EventTable, std::vector<int>> drop_nonfinite_rows(const EventTable& table);

std::pair<std::vector<int>, LabelEncoding> encode_labels(const EventTable& table);

EventTable extract_pair(const EventTable& table, EventClass a, EventClass b);

// Columnar binary cache: "GSHD1" magic, u32 LE header length, JSON header
// {F, R, label_codes, names}, row-major f64 LE values, one label-code byte
// per row.
void save_table_cache(const EventTable& table, const std::string& path);
EventTable load_table_cache(const std::string& path);

// Schema manifest: one column name per line.
std::vector<std::string> read_schema_manifest(const std::string& path);
void write_schema_manifest(const std::vector<std::string>& names, const std::string& path);

// Marker map file: lines of "<scenario-number> <class-name>".
std::map<int, EventClass> read_marker_map(const std::string& path);

}  // namespace gridshap
