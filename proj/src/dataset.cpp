#include "gridshap/dataset.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace gridshap {
namespace {

using nlohmann::json;

std::string normalize_label(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == ' ' || c == '-' || c == '_' || c == '\t' || c == '\r') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  // Comma-separated with optional double-quote quoting ("" escapes a quote).
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

void append_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f64_le(std::string& out, double d) {
  auto bits = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

double read_f64_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string_view event_class_name(EventClass c) {
  switch (c) {
    case EventClass::Attack: return "Attack";
    case EventClass::Natural: return "Natural";
    case EventClass::NoEvents: return "NoEvents";
  }
  return "?";
}

std::optional<EventClass> parse_event_class(std::string_view text) {
  std::string n = normalize_label(text);
  if (n == "attack" || n == "attackevents" || n == "attackevent" || n == "attacks")
    return EventClass::Attack;
  if (n == "natural" || n == "naturalevents" || n == "naturalevent")
    return EventClass::Natural;
  if (n == "noevents" || n == "noevent" || n == "none") return EventClass::NoEvents;
  return std::nullopt;
}

int LabelEncoding::code_of(EventClass c) const {
  for (size_t i = 0; i < classes.size(); ++i)
    if (classes[i] == c) return static_cast<int>(i);
  return -1;
}

EventClass LabelEncoding::class_of(int code) const {
  if (code < 0 || code >= size()) fail(ErrorCode::CodeOutOfRange, fmt::format("code {}", code));
  return classes[static_cast<size_t>(code)];
}

std::vector<std::string> LabelEncoding::class_names() const {
  std::vector<std::string> names;
  names.reserve(classes.size());
  for (EventClass c : classes) names.emplace_back(event_class_name(c));
  return names;
}

int EventTable::feature_index(std::string_view name) const {
  for (size_t i = 0; i < features.size(); ++i)
    if (features[i].raw == name) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> EventTable::feature_names() const {
  std::vector<std::string> names;
  names.reserve(features.size());
  for (const auto& f : features) names.push_back(f.raw);
  return names;
}

EventTable EventTable::select_columns(const std::vector<std::string>& names) const {
  std::vector<int> idx;
  idx.reserve(names.size());
  for (const auto& n : names) {
    int i = feature_index(n);
    if (i < 0) fail(ErrorCode::UnknownFeature, fmt::format("'{}'", n));
    idx.push_back(i);
  }
  EventTable out;
  out.features.reserve(idx.size());
  for (int i : idx) out.features.push_back(features[static_cast<size_t>(i)]);
  out.values = Matrix(rows(), static_cast<int>(idx.size()));
  for (int r = 0; r < rows(); ++r)
    for (size_t c = 0; c < idx.size(); ++c)
      out.values.at(r, static_cast<int>(c)) = values.at(r, idx[c]);
  out.labels = labels;
  out.source = source;
  out.row_ids = row_ids;
  return out;
}

LoadResult load_events(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, fmt::format("cannot open '{}'", path));
  return load_events_stream(in, path, options);
}

LoadResult load_events_stream(std::istream& in, const std::string& source_name,
                              const LoadOptions& options) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::IoFailure, "empty file: " + source_name);
  std::vector<std::string> header = split_csv_line(line);

  int label_col = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == options.label_column) {
      label_col = static_cast<int>(i);
      break;
    }
  }
  if (label_col < 0)
    fail(ErrorCode::MissingLabelColumn,
         fmt::format("'{}' not in header of {}", options.label_column, source_name));

  // Feature columns: everything but the label, file order preserved; names
  // that do not match the PMU scheme are kept unstructured.
  std::vector<int> feature_cols;
  std::vector<FeatureName> features;
  for (size_t i = 0; i < header.size(); ++i) {
    if (static_cast<int>(i) == label_col) continue;
    feature_cols.push_back(static_cast<int>(i));
    auto parsed = try_parse_feature_name(header[i]);
    features.push_back(parsed ? *parsed : FeatureName::unstructured(header[i]));
  }
  {
    std::vector<std::string> seen;
    for (const auto& f : features) seen.push_back(f.raw);
    std::sort(seen.begin(), seen.end());
    auto dup = std::adjacent_find(seen.begin(), seen.end());
    if (dup != seen.end())
      fail(ErrorCode::InvalidArgument, fmt::format("duplicate column '{}'", *dup));
  }

  const int ncols = static_cast<int>(feature_cols.size());
  std::vector<double> data;
  std::vector<EventClass> labels;
  std::vector<int> row_ids;
  std::vector<int> dropped;
  int rows_in = 0;

  std::vector<double> parsed_row(static_cast<size_t>(ncols));
  while (std::getline(in, line)) {
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const int row_index = rows_in++;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      fail(ErrorCode::InvalidArgument,
           fmt::format("row {} has {} cells, header has {}", row_index, cells.size(),
                       header.size()));

    bool finite = true;
    for (int c = 0; c < ncols; ++c) {
      auto v = parse_double(cells[static_cast<size_t>(feature_cols[static_cast<size_t>(c)])]);
      if (!v || !std::isfinite(*v)) {
        finite = false;
        break;
      }
      parsed_row[static_cast<size_t>(c)] = *v;
    }
    if (!finite) {
      dropped.push_back(row_index);
      continue;
    }

    const std::string& marker = cells[static_cast<size_t>(label_col)];
    auto cls = parse_event_class(marker);
    if (!cls) {
      auto num = parse_double(marker);
      if (num && std::isfinite(*num) && *num == std::floor(*num)) {
        auto it = options.marker_map.find(static_cast<int>(*num));
        if (it != options.marker_map.end()) cls = it->second;
      }
    }
    if (!cls)
      fail(ErrorCode::UnknownLabel,
           fmt::format("row {}: marker '{}' (provide a marker map for scenario ids)", row_index,
                       marker));

    data.insert(data.end(), parsed_row.begin(), parsed_row.end());
    labels.push_back(*cls);
    row_ids.push_back(row_index);
  }

  if (labels.empty())
    fail(ErrorCode::EmptyAfterCleaning,
         fmt::format("{}: no rows survived cleaning ({} dropped)", source_name, dropped.size()));

  LoadResult result;
  result.table.features = std::move(features);
  result.table.values.rows = static_cast<int>(labels.size());
  result.table.values.cols = ncols;
  result.table.values.data = std::move(data);
  result.table.labels = std::move(labels);
  result.table.source = source_name;
  result.table.row_ids = std::move(row_ids);
  result.rows_in = rows_in;
  result.dropped_rows = std::move(dropped);

  if (!options.keep_columns.empty())
    result.table = result.table.select_columns(options.keep_columns);
  return result;
}

std::pair<EventTable, std::vector<int>> drop_nonfinite_rows(const EventTable& table) {
  std::vector<int> keep;
  std::vector<int> dropped;
  for (int r = 0; r < table.rows(); ++r) {
    bool finite = true;
    for (double v : table.values.row(r)) {
      if (!std::isfinite(v)) {
        finite = false;
        break;
      }
    }
    if (finite)
      keep.push_back(r);
    else
      dropped.push_back(r);
  }
  if (dropped.empty()) return {table, {}};

  EventTable out;
  out.features = table.features;
  out.values = Matrix(static_cast<int>(keep.size()), table.cols());
  out.source = table.source;
  for (size_t i = 0; i < keep.size(); ++i) {
    int r = keep[i];
    std::copy(table.values.row(r).begin(), table.values.row(r).end(),
              out.values.row(static_cast<int>(i)).begin());
    out.labels.push_back(table.labels[static_cast<size_t>(r)]);
    out.row_ids.push_back(table.row_ids[static_cast<size_t>(r)]);
  }
  return {std::move(out), std::move(dropped)};
}

std::pair<std::vector<int>, LabelEncoding> encode_labels(const EventTable& table) {
  if (table.rows() == 0) fail(ErrorCode::EmptyInput, "cannot encode labels of an empty table");
  bool present[3] = {false, false, false};
  for (EventClass c : table.labels) present[static_cast<int>(c)] = true;

  LabelEncoding enc;
  for (int c = 0; c < 3; ++c)
    if (present[c]) enc.classes.push_back(static_cast<EventClass>(c));

  std::vector<int> codes;
  codes.reserve(table.labels.size());
  for (EventClass c : table.labels) codes.push_back(enc.code_of(c));
  return {std::move(codes), std::move(enc)};
}

EventTable extract_pair(const EventTable& table, EventClass a, EventClass b) {
  if (a == b)
    fail(ErrorCode::InvalidArgument,
         fmt::format("pair classes must differ, got {} twice", event_class_name(a)));

  int count_a = 0, count_b = 0;
  for (EventClass c : table.labels) {
    count_a += c == a;
    count_b += c == b;
  }
  if (count_a == 0) fail(ErrorCode::ClassAbsent, std::string(event_class_name(a)));
  if (count_b == 0) fail(ErrorCode::ClassAbsent, std::string(event_class_name(b)));

  EventTable out;
  out.features = table.features;
  out.values = Matrix(count_a + count_b, table.cols());
  out.source = table.source;
  int w = 0;
  for (int r = 0; r < table.rows(); ++r) {
    EventClass c = table.labels[static_cast<size_t>(r)];
    if (c != a && c != b) continue;
    std::copy(table.values.row(r).begin(), table.values.row(r).end(), out.values.row(w).begin());
    out.labels.push_back(c);
    out.row_ids.push_back(table.row_ids[static_cast<size_t>(r)]);
    ++w;
  }
  return out;
}

void save_table_cache(const EventTable& table, const std::string& path) {
  auto [codes, enc] = encode_labels(table);

  json header;
  header["F"] = table.cols();
  header["R"] = table.rows();
  header["label_codes"] = enc.class_names();
  header["names"] = table.feature_names();
  std::string header_text = header.dump();

  std::string out;
  out.reserve(13 + header_text.size() +
              static_cast<size_t>(table.rows()) * table.cols() * 8 + table.rows());
  out += "GSHD1";
  append_u32_le(out, static_cast<std::uint32_t>(header_text.size()));
  out += header_text;
  for (double v : table.values.data) append_f64_le(out, v);
  for (int code : codes) out.push_back(static_cast<char>(code));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::IoFailure, fmt::format("cannot write '{}'", path));
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail(ErrorCode::IoFailure, fmt::format("short write to '{}'", path));
}

EventTable load_table_cache(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoFailure, fmt::format("cannot open '{}'", path));
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());

  if (bytes.size() < 9 || bytes.compare(0, 5, "GSHD1") != 0)
    fail(ErrorCode::CacheFormat, fmt::format("'{}' is not a table cache", path));
  std::uint32_t header_len = read_u32_le(p + 5);
  if (bytes.size() < 9 + static_cast<size_t>(header_len))
    fail(ErrorCode::CacheFormat, "truncated header");

  json header = json::parse(bytes.substr(9, header_len), nullptr, false);
  if (header.is_discarded()) fail(ErrorCode::CacheFormat, "header is not valid JSON");
  const int rows = header.at("R").get<int>();
  const int cols = header.at("F").get<int>();
  std::vector<std::string> names = header.at("names").get<std::vector<std::string>>();
  std::vector<std::string> class_names =
      header.at("label_codes").get<std::vector<std::string>>();
  if (static_cast<int>(names.size()) != cols) fail(ErrorCode::CacheFormat, "names/F mismatch");

  LabelEncoding enc;
  for (const auto& n : class_names) {
    auto c = parse_event_class(n);
    if (!c) fail(ErrorCode::CacheFormat, fmt::format("unknown class '{}'", n));
    enc.classes.push_back(*c);
  }

  const size_t payload = 9 + header_len;
  const size_t need =
      payload + static_cast<size_t>(rows) * cols * 8 + static_cast<size_t>(rows);
  if (bytes.size() < need) fail(ErrorCode::CacheFormat, "truncated payload");

  EventTable table;
  table.source = path;
  for (auto& n : names) {
    auto parsed = try_parse_feature_name(n);
    table.features.push_back(parsed ? *parsed : FeatureName::unstructured(n));
  }
  table.values = Matrix(rows, cols);
  const unsigned char* v = p + payload;
  for (size_t i = 0; i < static_cast<size_t>(rows) * cols; ++i)
    table.values.data[i] = read_f64_le(v + i * 8);
  const unsigned char* lab = v + static_cast<size_t>(rows) * cols * 8;
  for (int r = 0; r < rows; ++r) {
    int code = lab[r];
    if (code >= enc.size()) fail(ErrorCode::CacheFormat, fmt::format("label code {}", code));
    table.labels.push_back(enc.class_of(code));
    table.row_ids.push_back(r);
  }
  return table;
}

std::vector<std::string> read_schema_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::IoFailure, fmt::format("cannot open '{}'", path));
  std::vector<std::string> names;
  std::string line;
  while (std::getline(f, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) names.push_back(line);
  }
  return names;
}

void write_schema_manifest(const std::vector<std::string>& names, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) fail(ErrorCode::IoFailure, fmt::format("cannot write '{}'", path));
  for (const auto& n : names) f << n << '\n';
}

std::map<int, EventClass> read_marker_map(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::IoFailure, fmt::format("cannot open '{}'", path));
  std::map<int, EventClass> map;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::istringstream iss(line);
    int scenario;
    std::string cls;
    if (!(iss >> scenario)) continue;
    if (!(iss >> cls))
      fail(ErrorCode::ConfigError, fmt::format("{}:{}: missing class name", path, lineno));
    auto parsed = parse_event_class(cls);
    if (!parsed)
      fail(ErrorCode::ConfigError, fmt::format("{}:{}: unknown class '{}'", path, lineno, cls));
    map[scenario] = *parsed;
  }
  return map;
}

}  // namespace gridshap
