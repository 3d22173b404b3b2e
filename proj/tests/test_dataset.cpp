#include <doctest.h>

#include <fstream>
#include <sstream>

#include "gridshap/dataset.hpp"

#include "support/tmpdir.hpp"

using namespace gridshap;

namespace {

LoadResult load_text(const std::string& csv, const LoadOptions& options = {}) {
  std::istringstream in(csv);
  return load_events_stream(in, "<memory>", options);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoFailure;
}

}  // namespace

TEST_CASE("marker spellings parse leniently") {
  CHECK(parse_event_class("Attack") == EventClass::Attack);
  CHECK(parse_event_class("attack") == EventClass::Attack);
  CHECK(parse_event_class("Attack Events") == EventClass::Attack);
  CHECK(parse_event_class("ATTACK EVENT") == EventClass::Attack);
  CHECK(parse_event_class("Natural") == EventClass::Natural);
  CHECK(parse_event_class("natural events") == EventClass::Natural);
  CHECK(parse_event_class("NoEvents") == EventClass::NoEvents);
  CHECK(parse_event_class("No Events") == EventClass::NoEvents);
  CHECK(parse_event_class("no-events") == EventClass::NoEvents);
  CHECK(parse_event_class("NO EVENT") == EventClass::NoEvents);
  CHECK_FALSE(parse_event_class("maintenance").has_value());
  CHECK_FALSE(parse_event_class("").has_value());
  CHECK_FALSE(parse_event_class("37").has_value());
}

TEST_CASE("class codes follow canonical name order") {
  CHECK(static_cast<int>(EventClass::Attack) == 0);
  CHECK(static_cast<int>(EventClass::Natural) == 1);
  CHECK(static_cast<int>(EventClass::NoEvents) == 2);
  CHECK(event_class_name(EventClass::Attack) == "Attack");
  CHECK(event_class_name(EventClass::Natural) == "Natural");
  CHECK(event_class_name(EventClass::NoEvents) == "NoEvents");
}

TEST_CASE("infinity cell drops exactly that row") {
  const std::string csv =
      "a,b,marker\n"
      "1,2,Attack\n"
      "3,4,Natural\n"
      "5,6,Attack\n"
      "7,+inf,Natural\n"
      "9,10,NoEvents\n";
  const LoadResult r = load_text(csv);
  CHECK(r.rows_in == 5);
  REQUIRE(r.dropped_rows == std::vector<int>{3});
  REQUIRE(r.table.rows() == 4);
  CHECK(r.table.cols() == 2);
  CHECK(r.table.values.at(0, 0) == 1.0);
  CHECK(r.table.values.at(3, 1) == 10.0);
  CHECK(r.table.row_ids == std::vector<int>{0, 1, 2, 4});
  CHECK(r.table.labels[3] == EventClass::NoEvents);
  CHECK(r.table.source == "<memory>");
}

TEST_CASE("nan and unparseable cells are cleaned the same way") {
  const std::string csv =
      "a,b,marker\n"
      "1,nan,Attack\n"
      "2,oops,Natural\n"
      "3,4,Attack\n"
      "5,6,Natural\n";
  const LoadResult r = load_text(csv);
  CHECK(r.rows_in == 4);
  CHECK(r.dropped_rows == std::vector<int>{0, 1});
  CHECK(r.table.rows() == 2);
}

TEST_CASE("label column may sit anywhere; order of the rest is preserved") {
  const std::string csv =
      "marker,x,y\n"
      "Attack,1,2\n"
      "Natural,3,4\n";
  const LoadResult r = load_text(csv);
  CHECK(r.table.feature_names() == std::vector<std::string>{"x", "y"});
  CHECK(r.table.values.at(1, 0) == 3.0);
}

TEST_CASE("missing label column is an error") {
  CHECK(code_of([] { load_text("a,b\n1,2\n"); }) == ErrorCode::MissingLabelColumn);
  LoadOptions opt;
  opt.label_column = "scenario";
  CHECK(code_of([&] {
          load_text("a,marker\n1,Attack\n", opt);
        }) == ErrorCode::MissingLabelColumn);
}

TEST_CASE("unknown marker text is an error, not a dropped row") {
  CHECK(code_of([] {
          load_text("a,marker\n1,Attack\n2,banana\n");
        }) == ErrorCode::UnknownLabel);
}

TEST_CASE("scenario-number markers resolve through the marker map") {
  LoadOptions opt;
  opt.marker_map = {{1, EventClass::Natural},
                    {7, EventClass::Attack},
                    {41, EventClass::NoEvents}};
  const LoadResult r = load_text(
      "a,marker\n"
      "1,7\n"
      "2,1\n"
      "3,41\n",
      opt);
  CHECK(r.table.labels ==
        std::vector<EventClass>{EventClass::Attack, EventClass::Natural, EventClass::NoEvents});

  // Unmapped number still fails.
  CHECK(code_of([&] { load_text("a,marker\n1,12\n", opt); }) == ErrorCode::UnknownLabel);
}

TEST_CASE("duplicate columns are rejected") {
  CHECK(code_of([] {
          load_text("a,a,marker\n1,2,Attack\n");
        }) == ErrorCode::InvalidArgument);
}

TEST_CASE("ragged row is rejected") {
  CHECK(code_of([] {
          load_text("a,b,marker\n1,2,Attack\n3,Natural\n");
        }) == ErrorCode::InvalidArgument);
}

TEST_CASE("all rows non-finite leaves nothing") {
  CHECK(code_of([] {
          load_text("a,marker\ninf,Attack\n-inf,Natural\n");
        }) == ErrorCode::EmptyAfterCleaning);
}

TEST_CASE("schema manifest restricts and orders columns") {
  LoadOptions opt;
  opt.keep_columns = {"c", "a"};
  const LoadResult r = load_text(
      "a,b,c,marker\n"
      "1,2,3,Attack\n"
      "4,5,6,Natural\n",
      opt);
  CHECK(r.table.feature_names() == std::vector<std::string>{"c", "a"});
  CHECK(r.table.values.at(0, 0) == 3.0);
  CHECK(r.table.values.at(1, 1) == 4.0);
}

TEST_CASE("quoted header cells and CRLF rows load") {
  const std::string csv = "\"a\",\"b,c\",marker\r\n1,2,Attack\r\n3,4,Natural\r\n";
  const LoadResult r = load_text(csv);
  CHECK(r.table.feature_names() == std::vector<std::string>{"a", "b,c"});
  CHECK(r.table.rows() == 2);
}

TEST_CASE("drop_nonfinite_rows is idempotent") {
  const LoadResult r = load_text(
      "a,marker\n"
      "1,Attack\n"
      "2,Natural\n");
  auto [cleaned, dropped] = drop_nonfinite_rows(r.table);
  CHECK(dropped.empty());
  CHECK(cleaned.rows() == r.table.rows());
  auto [again, dropped2] = drop_nonfinite_rows(cleaned);
  CHECK(dropped2.empty());
  CHECK(again.values.data == cleaned.values.data);
}

TEST_CASE("encode_labels uses lexicographic canonical order") {
  const LoadResult r = load_text(
      "a,marker\n"
      "1,Attack\n"
      "2,Natural\n"
      "3,Attack\n");
  auto [codes, enc] = encode_labels(r.table);
  CHECK(codes == std::vector<int>{0, 1, 0});
  CHECK(enc.size() == 2);
  CHECK(enc.code_of(EventClass::Attack) == 0);
  CHECK(enc.code_of(EventClass::Natural) == 1);
  CHECK(enc.class_of(1) == EventClass::Natural);
  CHECK(enc.class_names() == std::vector<std::string>{"Attack", "Natural"});
}

TEST_CASE("single-class table encodes to a single code") {
  const LoadResult r = load_text(
      "a,marker\n"
      "1,NoEvents\n"
      "2,NoEvents\n");
  auto [codes, enc] = encode_labels(r.table);
  CHECK(codes == std::vector<int>{0, 0});
  CHECK(enc.size() == 1);
  CHECK(enc.class_of(0) == EventClass::NoEvents);
}

TEST_CASE("three-class table encodes Attack<Natural<NoEvents") {
  const LoadResult r = load_text(
      "a,marker\n"
      "1,NoEvents\n"
      "2,Attack\n"
      "3,Natural\n");
  auto [codes, enc] = encode_labels(r.table);
  CHECK(codes == std::vector<int>{2, 0, 1});
  CHECK(enc.size() == 3);
}

TEST_CASE("encoding depends only on the class set") {
  const LoadResult a = load_text("x,marker\n1,Natural\n2,Attack\n");
  const LoadResult b = load_text("x,marker\n5,Attack\n6,Attack\n7,Natural\n");
  auto [codes_a, enc_a] = encode_labels(a.table);
  auto [codes_b, enc_b] = encode_labels(b.table);
  CHECK(enc_a.classes == enc_b.classes);
}

TEST_CASE("extract_pair filters rows, keeps order and columns") {
  const LoadResult r = load_text(
      "a,b,marker\n"
      "1,10,Attack\n"
      "2,20,NoEvents\n"
      "3,30,Natural\n"
      "4,40,Attack\n"
      "5,50,NoEvents\n");
  const EventTable pair = extract_pair(r.table, EventClass::Attack, EventClass::Natural);
  REQUIRE(pair.rows() == 3);
  CHECK(pair.cols() == 2);
  CHECK(pair.values.at(0, 0) == 1.0);
  CHECK(pair.values.at(1, 0) == 3.0);
  CHECK(pair.values.at(2, 0) == 4.0);
  CHECK(pair.labels ==
        std::vector<EventClass>{EventClass::Attack, EventClass::Natural, EventClass::Attack});
  CHECK(pair.row_ids == std::vector<int>{0, 2, 3});

  // Complement partition: the two pair extractions cover the table.
  const EventTable rest = extract_pair(r.table, EventClass::Attack, EventClass::NoEvents);
  CHECK(pair.rows() + rest.rows() == r.table.rows() + 2);  // Attack rows counted twice
}

TEST_CASE("extract_pair argument errors") {
  const LoadResult r = load_text("a,marker\n1,Attack\n2,Natural\n");
  CHECK(code_of([&] {
          extract_pair(r.table, EventClass::Attack, EventClass::Attack);
        }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] {
          extract_pair(r.table, EventClass::Attack, EventClass::NoEvents);
        }) == ErrorCode::ClassAbsent);
}

TEST_CASE("select_columns and feature_index") {
  const LoadResult r = load_text(
      "a,b,c,marker\n"
      "1,2,3,Attack\n"
      "4,5,6,Natural\n");
  CHECK(r.table.feature_index("b") == 1);
  CHECK(r.table.feature_index("nope") == -1);
  const EventTable sel = r.table.select_columns({"c", "a"});
  CHECK(sel.feature_names() == std::vector<std::string>{"c", "a"});
  CHECK(sel.values.at(0, 0) == 3.0);
  CHECK(sel.values.at(1, 1) == 4.0);
  CHECK(sel.labels == r.table.labels);
  CHECK(code_of([&] { r.table.select_columns({"zzz"}); }) == ErrorCode::UnknownFeature);
}

TEST_CASE("table cache round-trips bitwise") {
  const LoadResult r = load_text(
      "a,b,marker\n"
      "0.1,-2.5e-7,Attack\n"
      "3,0.30000000000000004,Natural\n"
      "-0,17,NoEvents\n");
  const std::string path = testing::tmp_path("cache.bin");
  save_table_cache(r.table, path);
  const EventTable back = load_table_cache(path);
  CHECK(back.values.data == r.table.values.data);  // bitwise, no text round-trip
  CHECK(back.labels == r.table.labels);
  CHECK(back.feature_names() == r.table.feature_names());
  CHECK(back.rows() == r.table.rows());
}

TEST_CASE("cache rejects foreign files") {
  const std::string path = testing::tmp_path("not_a_cache.bin");
  std::ofstream(path) << "definitely,a,csv\n1,2,3\n";
  CHECK(code_of([&] { load_table_cache(path); }) == ErrorCode::CacheFormat);
}

TEST_CASE("schema manifest file round-trips") {
  const std::string path = testing::tmp_path("schema.txt");
  const std::vector<std::string> names = {"R1-PM5:I", "R2-PA:ZH", "R4-PM2:V"};
  write_schema_manifest(names, path);
  CHECK(read_schema_manifest(path) == names);
}

TEST_CASE("marker map file parses") {
  const std::string path = testing::tmp_path("markers.txt");
  std::ofstream(path) << "# scenario ids\n1 Natural\n7 Attack\n41 NoEvents\n\n";
  const auto map = read_marker_map(path);
  REQUIRE(map.size() == 3);
  CHECK(map.at(1) == EventClass::Natural);
  CHECK(map.at(7) == EventClass::Attack);
  CHECK(map.at(41) == EventClass::NoEvents);
}
