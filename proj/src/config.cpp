#include "gridshap/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "gridshap/common.hpp"

namespace gridshap {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

[[noreturn]] void bad_value(const std::string& source, int line_no, std::string_view key,
                            std::string_view value) {
  fail(ErrorCode::ConfigError,
       fmt::format("{}:{}: bad value \"{}\" for {}", source, line_no, value, key));
}

double to_double(const std::string& source, int line_no, std::string_view key,
                 std::string_view value) {
  if (auto v = parse_double(value)) return *v;
  bad_value(source, line_no, key, value);
}

template <typename Int>
Int to_int(const std::string& source, int line_no, std::string_view key, std::string_view value) {
  Int v{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc{} || ptr != end) bad_value(source, line_no, key, value);
  return v;
}

bool to_bool(const std::string& source, int line_no, std::string_view key,
             std::string_view value) {
  const std::string v = lower(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(source, line_no, key, value);
}

std::vector<PairSpec> to_pairs(const std::string& source, int line_no, std::string_view value) {
  std::vector<PairSpec> pairs;
  size_t start = 0;
  while (start <= value.size()) {
    size_t comma = value.find(',', start);
    if (comma == std::string_view::npos) comma = value.size();
    const std::string_view token = trim(value.substr(start, comma - start));
    if (!token.empty()) {
      PairSpec pair;
      try {
        pair = parse_pair(token);
      } catch (const Error&) {
        bad_value(source, line_no, "pairs", token);
      }
      if (std::find(pairs.begin(), pairs.end(), pair) != pairs.end())
        fail(ErrorCode::ConfigError,
             fmt::format("{}:{}: pair \"{}\" listed twice", source, line_no, pair_slug(pair)));
      pairs.push_back(pair);
    }
    start = comma + 1;
  }
  if (pairs.empty())
    fail(ErrorCode::ConfigError, fmt::format("{}:{}: empty pair list", source, line_no));
  return pairs;
}

}  // namespace

std::string pair_slug(const PairSpec& pair) {
  return fmt::format("{}_{}", lower(event_class_name(pair.a)), lower(event_class_name(pair.b)));
}

PairSpec parse_pair(std::string_view token) {
  for (size_t i = 1; i + 1 < token.size(); ++i) {
    const char ch = token[i];
    if (ch != '_' && ch != '+' && ch != '/' && ch != '-' && ch != ' ') continue;
    const auto a = parse_event_class(token.substr(0, i));
    const auto b = parse_event_class(token.substr(i + 1));
    if (a && b && *a != *b) {
      PairSpec pair{*a, *b};
      if (static_cast<int>(pair.a) > static_cast<int>(pair.b)) std::swap(pair.a, pair.b);
      return pair;
    }
  }
  fail(ErrorCode::ConfigError, fmt::format("unrecognized class pair \"{}\"", token));
}

void RunConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    fail(ErrorCode::ConfigError,
         fmt::format("train_fraction must lie in (0, 1), got {}", train_fraction));
  if (top_k < 1) fail(ErrorCode::ConfigError, "top_k must be at least 1");
  if (background_size < 1) fail(ErrorCode::ConfigError, "background_size must be at least 1");
  if (explain_row < 0) fail(ErrorCode::ConfigError, "explain_row must be non-negative");
  if (dependence_plots < 0) fail(ErrorCode::ConfigError, "dependence_plots must be non-negative");
  if (threads < 0) fail(ErrorCode::ConfigError, "threads must be non-negative (0 = auto)");
  if (pairs.empty()) fail(ErrorCode::ConfigError, "no class pairs configured");
  if (out.empty()) fail(ErrorCode::ConfigError, "output directory must be set");
  hyperparams.validate();
}

RunConfig default_config() {
  RunConfig c;
  c.pairs = {{EventClass::Attack, EventClass::Natural},
             {EventClass::Natural, EventClass::NoEvents},
             {EventClass::Attack, EventClass::NoEvents}};
  return c;
}

RunConfig parse_config(std::string_view text, const std::string& source) {
  RunConfig c = default_config();
  std::string section;
  int line_no = 0;

  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    if (const size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        fail(ErrorCode::ConfigError,
             fmt::format("{}:{}: unterminated section header", source, line_no));
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (section != "data" && section != "split" && section != "model" && section != "shap" &&
          section != "run")
        fail(ErrorCode::ConfigError,
             fmt::format("{}:{}: unknown section [{}]", source, line_no, section));
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorCode::ConfigError,
           fmt::format("{}:{}: expected \"key = value\"", source, line_no));
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const std::string full = section.empty() ? key : section + "." + key;

    if (full == "data.input") c.input = value;
    else if (full == "data.cache") c.cache = value;
    else if (full == "data.schema_manifest") c.schema_manifest = value;
    else if (full == "data.label_column") c.label_column = value;
    else if (full == "data.marker_map") c.marker_map = value;
    else if (full == "split.seed") c.seed = to_int<std::uint64_t>(source, line_no, key, value);
    else if (full == "split.train_fraction")
      c.train_fraction = to_double(source, line_no, key, value);
    else if (full == "split.stratified") c.stratified = to_bool(source, line_no, key, value);
    else if (full == "model.rounds")
      c.hyperparams.rounds = to_int<int>(source, line_no, key, value);
    else if (full == "model.learning_rate")
      c.hyperparams.learning_rate = to_double(source, line_no, key, value);
    else if (full == "model.max_depth")
      c.hyperparams.max_depth = to_int<int>(source, line_no, key, value);
    else if (full == "model.lambda") c.hyperparams.lambda = to_double(source, line_no, key, value);
    else if (full == "model.gamma") c.hyperparams.gamma = to_double(source, line_no, key, value);
    else if (full == "model.min_child_weight")
      c.hyperparams.min_child_weight = to_double(source, line_no, key, value);
    else if (full == "model.base_score")
      c.hyperparams.base_score = to_double(source, line_no, key, value);
    else if (full == "shap.top_k") c.top_k = to_int<int>(source, line_no, key, value);
    else if (full == "shap.background_size")
      c.background_size = to_int<int>(source, line_no, key, value);
    else if (full == "shap.explain_row") c.explain_row = to_int<int>(source, line_no, key, value);
    else if (full == "shap.dependence_plots")
      c.dependence_plots = to_int<int>(source, line_no, key, value);
    else if (full == "run.pairs") c.pairs = to_pairs(source, line_no, value);
    else if (full == "run.out") c.out = value;
    else if (full == "run.threads") c.threads = to_int<int>(source, line_no, key, value);
    else
      fail(ErrorCode::ConfigError, fmt::format("{}:{}: unknown key \"{}\"", source, line_no, full));
  }

  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, fmt::format("cannot open config {}", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

std::string config_text(const RunConfig& c) {
  std::string pairs;
  for (size_t i = 0; i < c.pairs.size(); ++i) {
    if (i > 0) pairs += ", ";
    pairs += pair_slug(c.pairs[i]);
  }
  return fmt::format(
      "[data]\n"
      "input = {}\n"
      "cache = {}\n"
      "schema_manifest = {}\n"
      "label_column = {}\n"
      "marker_map = {}\n"
      "\n"
      "[split]\n"
      "seed = {}\n"
      "train_fraction = {}\n"
      "stratified = {}\n"
      "\n"
      "[model]\n"
      "rounds = {}\n"
      "learning_rate = {}\n"
      "max_depth = {}\n"
      "lambda = {}\n"
      "gamma = {}\n"
      "min_child_weight = {}\n"
      "base_score = {}\n"
      "\n"
      "[shap]\n"
      "top_k = {}\n"
      "background_size = {}\n"
      "explain_row = {}\n"
      "dependence_plots = {}\n"
      "\n"
      "[run]\n"
      "pairs = {}\n"
      "out = {}\n"
      "threads = {}\n",
      c.input, c.cache, c.schema_manifest, c.label_column, c.marker_map, c.seed,
      format_double(c.train_fraction), c.stratified ? "true" : "false", c.hyperparams.rounds,
      format_double(c.hyperparams.learning_rate), c.hyperparams.max_depth,
      format_double(c.hyperparams.lambda), format_double(c.hyperparams.gamma),
      format_double(c.hyperparams.min_child_weight), format_double(c.hyperparams.base_score),
      c.top_k, c.background_size, c.explain_row, c.dependence_plots, pairs, c.out, c.threads);
}

std::string config_hash(const RunConfig& c) {
  // The thread count only chooses how the work is scheduled, never what gets
  // computed, so two runs that differ only in threads share a hash. Everything
  // else in the canonical text identifies the experiment.
  RunConfig normalized = c;
  normalized.threads = 0;
  return hex64(fnv1a(config_text(normalized)));
}

}  // namespace gridshap
