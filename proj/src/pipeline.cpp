#include "gridshap/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gridshap/common.hpp"
#include "gridshap/eval.hpp"
#include "gridshap/preprocess.hpp"
#include "gridshap/shap.hpp"
#include "gridshap/viz.hpp"

namespace fs = std::filesystem;

namespace gridshap {
namespace {

int effective_threads(int configured) {
  if (configured > 0) return configured;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

EventTable select_rows(const EventTable& table, std::span<const int> rows) {
  EventTable out;
  out.features = table.features;
  out.source = table.source;
  out.values = Matrix(static_cast<int>(rows.size()), table.cols());
  out.labels.reserve(rows.size());
  out.row_ids.reserve(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    const int r = rows[i];
    const auto src = table.values.row(r);
    std::copy(src.begin(), src.end(), out.values.row(static_cast<int>(i)).begin());
    out.labels.push_back(table.labels[static_cast<size_t>(r)]);
    out.row_ids.push_back(table.row_ids[static_cast<size_t>(r)]);
  }
  return out;
}

std::string sanitize_component(std::string_view name) {
  std::string out;
  for (char ch : name) {
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.')
      out += ch;
    else
      out += '-';
  }
  return out;
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoFailure, fmt::format("cannot open {} for writing", path));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::IoFailure, fmt::format("write failed for {}", path));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, fmt::format("cannot open {}", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool is_cache_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[5] = {};
  in.read(magic, 5);
  return in.gcount() == 5 && std::string_view(magic, 5) == "GSHD1";
}

LoadOptions load_options(const RunConfig& config) {
  LoadOptions opts;
  opts.label_column = config.label_column;
  if (!config.marker_map.empty()) opts.marker_map = read_marker_map(config.marker_map);
  if (!config.schema_manifest.empty())
    opts.keep_columns = read_schema_manifest(config.schema_manifest);
  return opts;
}

EventTable load_input(const RunConfig& config) {
  if (!config.cache.empty() && fs::exists(config.cache)) return load_table_cache(config.cache);
  if (config.input.empty())
    fail(ErrorCode::ConfigError, "no input configured (set data.input or data.cache)");
  return load_events(config.input, load_options(config)).table;
}

// Writes one output file and records its content hash under its path
// relative to the output root, so the manifest pins every artifact.
void emit(std::map<std::string, std::string>& hashes, const fs::path& out_root,
          const fs::path& rel, std::string_view content) {
  write_text_file((out_root / rel).string(), content);
  hashes[rel.generic_string()] = hex64(fnv1a(content));
}

void emit_plot(std::map<std::string, std::string>& hashes, const fs::path& out_root,
               const fs::path& rel_base, const PlotSpec& spec) {
  emit(hashes, out_root, rel_base.string() + ".svg", render_svg(spec));
  emit(hashes, out_root, rel_base.string() + ".csv", plot_csv(spec));
}

void run_pair(const RunConfig& config, const EventTable& table, const PairSpec& pair,
              const fs::path& out_root, std::map<std::string, std::string>& hashes) {
  const std::string slug = pair_slug(pair);
  const std::string title =
      fmt::format("{} vs {}", event_class_name(pair.a), event_class_name(pair.b));
  const fs::path pair_dir(slug);
  fs::create_directories(out_root / pair_dir);
  const int threads = effective_threads(config.threads);

  const EventTable pair_table = extract_pair(table, pair.a, pair.b);
  const auto [pair_codes, encoding] = encode_labels(pair_table);
  (void)pair_codes;

  SplitSpec split_spec;
  split_spec.train_fraction = config.train_fraction;
  split_spec.seed = config.seed;
  split_spec.stratified = config.stratified;
  const auto [train_table, test_table] = split(pair_table, split_spec);
  if (train_table.rows() == 0 || test_table.rows() == 0)
    fail(ErrorCode::TooFewRows,
         fmt::format("{}: split produced {} train / {} test rows", slug, train_table.rows(),
                     test_table.rows()));

  const ScalerParams scaler = fit_scaler(train_table);
  const EventTable train_scaled = transform(scaler, train_table);
  const EventTable test_scaled = transform(scaler, test_table);

  auto codes_of = [&encoding = encoding](const EventTable& t) {
    std::vector<int> codes(t.labels.size());
    for (size_t i = 0; i < t.labels.size(); ++i) codes[i] = encoding.code_of(t.labels[i]);
    return codes;
  };
  const std::vector<int> train_codes = codes_of(train_scaled);
  const std::vector<int> test_codes = codes_of(test_scaled);

  fmt::print("[{}] rows={} train={} test={} features={}\n", slug, pair_table.rows(),
             train_scaled.rows(), test_scaled.rows(), pair_table.cols());

  // Phase 1: train on every feature, explain the test split against a
  // training-row background, and rank features by mean |SHAP|.
  TreeEnsemble full_model = train(train_scaled, train_codes, config.hyperparams, config.seed);
  full_model.label_classes = encoding.class_names();

  const int bg_n = std::min(config.background_size, train_scaled.rows());
  Rng bg_rng(derive_seed(config.seed, fnv1a(slug)));
  std::vector<int> bg_rows = bg_rng.sample_without_replacement(train_scaled.rows(), bg_n);
  std::sort(bg_rows.begin(), bg_rows.end());
  const EventTable background_full = select_rows(train_scaled, bg_rows);

  const std::vector<ShapExplanation> full_expl =
      explain_all(full_model, background_full, test_scaled, threads);
  const ImportanceRanking ranking = mean_abs_shap(full_expl, test_scaled.feature_names());

  PlotSpec summary = summary_bar(ranking, std::min(config.top_k, static_cast<int>(ranking.entries.size())));
  summary.title = fmt::format("Mean |SHAP| feature importance ({})", title);
  emit_plot(hashes, out_root, pair_dir / (slug + "_summary_bar"), summary);

  const std::vector<std::string> selected =
      select_top_k(ranking, std::min(config.top_k, static_cast<int>(ranking.entries.size())));

  // Phase 2: retrain on the selected subset with the same seed and
  // hyperparameters, then evaluate and explain the test split.
  const EventTable train_top = train_scaled.select_columns(selected);
  const EventTable test_top = test_scaled.select_columns(selected);
  TreeEnsemble top_model = train(train_top, train_codes, config.hyperparams, config.seed);
  top_model.label_classes = encoding.class_names();

  std::vector<int> y_pred(static_cast<size_t>(test_top.rows()));
  for (int i = 0; i < test_top.rows(); ++i)
    y_pred[static_cast<size_t>(i)] = predict_class(top_model, test_top.values.row(i));
  const ConfusionMatrix cm = confusion(test_codes, y_pred, encoding.size(), encoding.class_names());
  const EvalReport rep = report(cm);
  fmt::print("{}\n{}", confusion_text(cm), report_text(rep));

  const EventTable background_top = background_full.select_columns(selected);
  const std::vector<ShapExplanation> test_expl =
      explain_all(top_model, background_top, test_top, threads);

  if (config.explain_row >= test_top.rows())
    fail(ErrorCode::RowOutOfRange,
         fmt::format("explain_row {} outside test split of {} rows", config.explain_row,
                     test_top.rows()));
  const auto& row_expl = test_expl[static_cast<size_t>(config.explain_row)];
  PlotSpec force_spec = force(row_expl, selected, test_top.values.row(config.explain_row));
  force_spec.title = fmt::format("Force plot ({}, test row {})", title, config.explain_row);
  emit_plot(hashes, out_root, pair_dir / (slug + "_force"), force_spec);

  PlotSpec waterfall_spec =
      waterfall(row_expl, selected, config.top_k, test_top.values.row(config.explain_row));
  waterfall_spec.title = fmt::format("Waterfall plot ({}, test row {})", title, config.explain_row);
  emit_plot(hashes, out_root, pair_dir / (slug + "_waterfall"), waterfall_spec);

  PlotSpec bees = beeswarm(test_expl, test_top,
                           derive_seed(config.seed, fnv1a(slug) ^ 0xbee5u), config.top_k);
  bees.title = fmt::format("SHAP beeswarm ({})", title);
  emit_plot(hashes, out_root, pair_dir / (slug + "_beeswarm"), bees);

  const int dep_n = std::min(config.dependence_plots, static_cast<int>(selected.size()));
  for (int d = 0; d < dep_n; ++d) {
    const int j = test_top.feature_index(selected[static_cast<size_t>(d)]);
    const int partner = interaction_partner(test_expl, test_top, j);
    PlotSpec dep = dependence(j, partner, test_top, test_expl);
    dep.title = fmt::format("Dependence: {} ({})", selected[static_cast<size_t>(d)], title);
    emit_plot(hashes, out_root,
              pair_dir / fmt::format("{}_dependence_{}", slug,
                                     sanitize_component(selected[static_cast<size_t>(d)])),
              dep);
  }

  // Correlations come from the raw (unscaled) pair rows; Pearson r is
  // unaffected by the standardization anyway.
  const CorrelationMatrix corr = pearson(pair_table, selected);
  PlotSpec heat = heatmap(corr);
  heat.title = fmt::format("Pearson correlation ({})", title);
  emit_plot(hashes, out_root, pair_dir / (slug + "_heatmap"), heat);

  emit(hashes, out_root, pair_dir / (slug + "_model_full.json"), ensemble_to_json(full_model));
  emit(hashes, out_root, pair_dir / (slug + "_model_topk.json"), ensemble_to_json(top_model));
  {
    const std::string scaler_path = (out_root / pair_dir / (slug + "_scaler.json")).string();
    save_scaler(scaler, scaler_path);
    hashes[(pair_dir / (slug + "_scaler.json")).generic_string()] =
        hex64(fnv1a(read_text_file(scaler_path)));
  }
  emit(hashes, out_root, pair_dir / (slug + "_explanations.csv"),
       explanations_csv(test_expl, selected));
  emit(hashes, out_root, pair_dir / (slug + "_report.txt"),
       confusion_text(cm) + "\n" + report_text(rep));

  nlohmann::json ranking_json = nlohmann::json::array();
  for (const auto& [name, value] : ranking.entries)
    ranking_json.push_back({{"feature", name}, {"mean_abs_shap", value}});
  const nlohmann::json metrics{
      {"pair", slug},
      {"classes", encoding.class_names()},
      {"config_hash", config_hash(config)},
      {"seed", config.seed},
      {"rows",
       {{"pair", pair_table.rows()}, {"train", train_scaled.rows()}, {"test", test_scaled.rows()}}},
      {"selected_features", selected},
      {"ranking", ranking_json},
      {"confusion", confusion_json(cm)},
      {"report", report_json(rep)},
  };
  emit(hashes, out_root, pair_dir / (slug + "_metrics.json"), metrics.dump(2) + "\n");
}

}  // namespace

int cmd_ingest(const RunConfig& config) {
  try {
    if (config.input.empty()) fail(ErrorCode::ConfigError, "ingest needs data.input");
    const LoadResult loaded = load_events(config.input, load_options(config));
    fs::create_directories(config.out);
    const std::string cache_path = config.cache.empty()
                                       ? (fs::path(config.out) / "events.cache").string()
                                       : config.cache;
    if (const fs::path parent = fs::path(cache_path).parent_path(); !parent.empty())
      fs::create_directories(parent);
    save_table_cache(loaded.table, cache_path);

    const nlohmann::json report{
        {"input", config.input},          {"cache", cache_path},
        {"rows_in", loaded.rows_in},      {"rows_dropped", static_cast<int>(loaded.dropped_rows.size())},
        {"dropped_rows", loaded.dropped_rows}, {"rows_kept", loaded.table.rows()},
        {"columns", loaded.table.cols()},
    };
    write_text_file((fs::path(config.out) / "ingest_report.json").string(),
                    report.dump(2) + "\n");
    fmt::print("ingest: {} rows in, {} dropped, {} feature columns; cache at {}\n", loaded.rows_in,
               loaded.dropped_rows.size(), loaded.table.cols(), cache_path);
    return 0;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
}

int cmd_run(const RunConfig& config) {
  try {
    config.validate();
    const EventTable table = load_input(config);
    const fs::path out_root(config.out);
    fs::create_directories(out_root);

    std::map<std::string, std::string> hashes;
    nlohmann::json pair_status = nlohmann::json::object();
    int failures = 0;
    for (const PairSpec& pair : config.pairs) {
      const std::string slug = pair_slug(pair);
      try {
        run_pair(config, table, pair, out_root, hashes);
        pair_status[slug] = "ok";
      } catch (const Error& e) {
        ++failures;
        pair_status[slug] = fmt::format("failed: {}", e.what());
        fmt::print(stderr, "error [{}]: {}\n", slug, e.what());
      }
    }

    const nlohmann::json manifest{
        {"config_hash", config_hash(config)},
        {"seed", config.seed},
        {"pairs", pair_status},
        {"outputs", hashes},
    };
    write_text_file((out_root / "manifest.json").string(), manifest.dump(2) + "\n");
    fmt::print("run: {} pair(s), {} failed; manifest at {}\n", config.pairs.size(), failures,
               (out_root / "manifest.json").string());
    return failures == 0 ? 0 : 1;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
}

int cmd_explain(const std::string& model_path, const std::string& data_path,
                const std::string& scaler_path, int row, int background_size,
                const std::string& out_dir) {
  try {
    const TreeEnsemble model = load_ensemble(model_path);
    const EventTable data =
        is_cache_file(data_path) ? load_table_cache(data_path) : load_events(data_path).table;
    EventTable features = data.select_columns(model.feature_names);
    if (!scaler_path.empty()) features = transform(load_scaler(scaler_path), features);
    if (row < 0 || row >= features.rows())
      fail(ErrorCode::RowOutOfRange,
           fmt::format("row {} outside 0..{}", row, features.rows() - 1));
    if (background_size < 1) fail(ErrorCode::ConfigError, "background size must be at least 1");

    const int bg_n = std::min(background_size, features.rows());
    Rng rng(derive_seed(model.seed, fnv1a("explain")));
    std::vector<int> bg_rows = rng.sample_without_replacement(features.rows(), bg_n);
    std::sort(bg_rows.begin(), bg_rows.end());
    const EventTable background = select_rows(features, bg_rows);

    const ShapExplanation e = explain(model, background, features.values.row(row), row);

    fs::create_directories(out_dir);
    const std::string base = fmt::format("row{}", row);
    PlotSpec force_spec = force(e, model.feature_names, features.values.row(row));
    write_plot(force_spec, (fs::path(out_dir) / (base + "_force")).string());
    PlotSpec waterfall_spec = waterfall(e, model.feature_names, 10, features.values.row(row));
    write_plot(waterfall_spec, (fs::path(out_dir) / (base + "_waterfall")).string());
    write_explanations_csv(std::span<const ShapExplanation>(&e, 1), model.feature_names,
                           (fs::path(out_dir) / (base + "_explanation.csv")).string());

    fmt::print("explain: wrote {0}_force.svg, {0}_waterfall.svg, {0}_explanation.csv in {1}\n",
               base, out_dir);
    fmt::print("  base = {}, f(x) = {}, additivity gap = {:.3g}\n", format_double(e.base_value),
               format_double(e.fx), e.additivity_gap());
    return 0;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
}

int cmd_report(const std::string& metrics_path) {
  try {
    const nlohmann::json j = nlohmann::json::parse(read_text_file(metrics_path));
    const auto& conf = j.at("confusion");
    ConfusionMatrix cm;
    cm.class_names = conf.at("classes").get<std::vector<std::string>>();
    cm.k = static_cast<int>(cm.class_names.size());
    for (const auto& row : conf.at("counts"))
      for (const auto& v : row) cm.counts.push_back(v.get<std::int64_t>());
    if (static_cast<int>(cm.counts.size()) != cm.k * cm.k)
      fail(ErrorCode::InvalidArgument,
           fmt::format("{}: confusion counts are not {}x{}", metrics_path, cm.k, cm.k));

    fmt::print("pair: {}\n\n", j.value("pair", std::string("?")));
    fmt::print("{}\n{}", confusion_text(cm), report_text(report(cm)));
    return 0;
  } catch (const nlohmann::json::exception& e) {
    fmt::print(stderr, "error: {}: {}\n", metrics_path, e.what());
    return 2;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
}

}  // namespace gridshap
