#include <cstdio>
#include <string>
#include <string_view>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gridshap/common.hpp"
#include "gridshap/config.hpp"
#include "gridshap/pipeline.hpp"

namespace {

std::vector<gridshap::PairSpec> parse_pairs_csv(const std::string& csv) {
  std::vector<gridshap::PairSpec> pairs;
  size_t start = 0;
  while (start <= csv.size()) {
    size_t comma = csv.find(',', start);
    if (comma == std::string::npos) comma = csv.size();
    std::string token = csv.substr(start, comma - start);
    const auto first = token.find_first_not_of(" \t");
    const auto last = token.find_last_not_of(" \t");
    if (first != std::string::npos)
      pairs.push_back(gridshap::parse_pair(token.substr(first, last - first + 1)));
    start = comma + 1;
  }
  if (pairs.empty()) gridshap::fail(gridshap::ErrorCode::ConfigError, "empty pair list");
  return pairs;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace gridshap;

  // The config file must load before CLI11 binds the remaining options, so
  // flags given on the command line override file values.
  std::string config_path;
  for (int i = 1; i < argc; ++i) {
    const std::string_view arg(argv[i]);
    if ((arg == "--config" || arg == "-c") && i + 1 < argc) config_path = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0) config_path = std::string(arg.substr(9));
  }

  RunConfig config;
  try {
    config = config_path.empty() ? default_config() : load_config(config_path);
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }

  CLI::App app{"Gradient-boosted PMU event classification with exact SHAP attribution"};
  app.require_subcommand(1);

  std::string config_opt;  // consumed by the pre-scan; registered so parsing accepts it
  std::string pairs_csv;

  auto add_data_options = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_opt, "run configuration file");
    cmd->add_option("--input", config.input, "event CSV file");
    cmd->add_option("--cache", config.cache, "binary table cache path");
    cmd->add_option("--schema", config.schema_manifest, "schema manifest, one column name per line");
    cmd->add_option("--label-column", config.label_column, "label column name");
    cmd->add_option("--marker-map", config.marker_map, "scenario-number to class map file");
    cmd->add_option("-o,--out", config.out, "output directory");
  };

  CLI::App* ingest = app.add_subcommand("ingest", "Clean an event CSV into a binary cache");
  add_data_options(ingest);

  CLI::App* run =
      app.add_subcommand("run", "Train, explain and evaluate every configured class pair");
  add_data_options(run);
  run->add_option("--seed", config.seed, "split / sampling seed");
  run->add_option("--train-fraction", config.train_fraction, "training fraction of rows");
  run->add_flag("--stratified", config.stratified, "allocate the split per class");
  run->add_option("--rounds", config.hyperparams.rounds, "boosting rounds");
  run->add_option("--learning-rate", config.hyperparams.learning_rate, "shrinkage per round");
  run->add_option("--max-depth", config.hyperparams.max_depth, "maximum tree depth");
  run->add_option("--lambda", config.hyperparams.lambda, "leaf weight L2 penalty");
  run->add_option("--gamma", config.hyperparams.gamma, "minimum split gain");
  run->add_option("--min-child-weight", config.hyperparams.min_child_weight,
                  "minimum hessian sum per child");
  run->add_option("--top-k", config.top_k, "features kept for the phase-2 model");
  run->add_option("--background", config.background_size, "SHAP background sample size");
  run->add_option("--explain-row", config.explain_row, "test row for force/waterfall plots");
  run->add_option("--dependence-plots", config.dependence_plots,
                  "dependence plots per pair, most important features first");
  run->add_option("--pairs", pairs_csv, "comma-separated class pairs, e.g. attack_natural");
  run->add_option("--threads", config.threads, "worker threads (0 = one per hardware thread)");

  std::string model_path, data_path, scaler_path, explain_out = "out";
  int row = 0, background = 256;
  CLI::App* explain =
      app.add_subcommand("explain", "Force + waterfall plots for one row under a saved model");
  explain->add_option("--model", model_path, "model JSON from a run")->required();
  explain->add_option("--data", data_path, "CSV or cache holding the model's columns")->required();
  explain->add_option("--scaler", scaler_path, "scaler sidecar JSON");
  explain->add_option("--row", row, "0-based row index");
  explain->add_option("--background", background, "background sample size");
  explain->add_option("-o,--out", explain_out, "output directory");

  std::string metrics_path;
  CLI::App* report_cmd = app.add_subcommand("report", "Print the tables from a metrics JSON");
  report_cmd->add_option("metrics", metrics_path, "metrics JSON produced by run")->required();

  bool print_defaults = false;
  CLI::App* config_cmd = app.add_subcommand("config", "Show the effective configuration");
  config_cmd->add_option("-c,--config", config_opt, "run configuration file");
  config_cmd->add_flag("--print-defaults", print_defaults, "print the built-in defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ingest) return cmd_ingest(config);
    if (*run) {
      if (!pairs_csv.empty()) config.pairs = parse_pairs_csv(pairs_csv);
      return cmd_run(config);
    }
    if (*explain)
      return cmd_explain(model_path, data_path, scaler_path, row, background, explain_out);
    if (*report_cmd) return cmd_report(metrics_path);
    if (*config_cmd) {
      const RunConfig& shown = print_defaults ? default_config() : config;
      fmt::print("{}", config_text(shown));
      fmt::print("# hash: {}\n", config_hash(shown));
      return 0;
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 2;
}
