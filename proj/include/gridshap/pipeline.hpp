#pragma once

#include <string>

#include "gridshap/config.hpp"

namespace gridshap {

// Subcommand drivers. Return process exit codes: 0 success, 1 partial
// failure (some pairs failed), 2 usage or input error.

// Loads the raw CSV, writes the binary cache and a JSON cleaning report.
int cmd_ingest(const RunConfig& config);

// Full two-phase pipeline per configured class pair: extract, split, scale,
// train on all features, explain, rank, retrain on the top-k subset,
// evaluate, and emit plots, models, metrics and a manifest.
int cmd_run(const RunConfig& config);

// Re-explains one row of a dataset under a saved model: force + waterfall
// plots and an explanation CSV.
int cmd_explain(const std::string& model_path, const std::string& data_path,
                const std::string& scaler_path, int row, int background_size,
                const std::string& out_dir);

// Renders the text tables from a metrics JSON produced by cmd_run.
int cmd_report(const std::string& metrics_path);

}  // namespace gridshap
