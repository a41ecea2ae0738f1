#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "genclass/backend.hpp"
#include "genclass/http_backend.hpp"
#include "genclass/inference.hpp"
#include "genclass/strategy.hpp"
#include "genclass/types.hpp"

namespace genclass {

struct BackendSpec {
  std::string type = "mock";  // "mock" | "http"
  std::string script;         // mock script path
  HttpBackendConfig http;
};

struct DecodeConfig {
  size_t max_new_tokens = 32;
  size_t reasoning_max_new_tokens = 1024;
  double temperature = 0.0;
};

/// One config file drives every subcommand; flags override single fields.
struct RunConfig {
  std::string schema_path;
  std::string train_path;
  std::string test_path;
  std::string template_dir;
  std::string train_embeddings_path;  // similar_3_shot store
  std::string test_embeddings_path;   // similar_3_shot queries
  std::vector<std::string> train_strategies;
  std::vector<std::string> infer_strategies;
  // Keyed by train strategy; "default" is the fallback endpoint.
  std::map<std::string, BackendSpec> backends;
  std::vector<std::string> fixed_shot_ids;
  uint64_t seed = 0;
  size_t parallelism = 1;
  bool parallel_cells = false;
  std::string out_dir = "out";
  std::string format = "table";  // "table" | "json"
  DecodeConfig decode;
  MatchConfig match;
  int reward_port = 8711;
  std::string reward_bind = "127.0.0.1";
  std::string reward_mode = "reasoning";
};

// Parses and validates: referenced paths must exist, strategy lists must be
// non-empty, ppl may appear only on the inference side. Throws Error{Config}.
RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_json_text(const std::string& text,
                                    const std::string& base_dir = {});
// Full echo with resolved paths; manifests embed it so a run is reproducible
// from the manifest alone.
std::string run_config_to_json_text(const RunConfig& config);

BackendPtr make_backend(const BackendSpec& spec);

struct CellResult {
  std::string train_strategy;
  std::string infer_strategy;
  std::optional<MetricsReport> metrics;  // empty on error
  std::optional<std::string> error;
  std::vector<Prediction> predictions;
  uint64_t cell_seed = 0;
  std::string backend_id;
};

struct MatrixResult {
  std::vector<CellResult> cells;  // row-major over train x infer

  size_t populated() const;
  size_t failed() const;
  const CellResult* cell(const std::string& train_strategy,
                         const std::string& infer_strategy) const;
};

/// Runs every configured (train, infer) cell: prompts for the test split are
/// rendered under the inference strategy and sent to the train strategy's
/// endpoint; failures stay contained in their cell.
MatrixResult run_matrix(const RunConfig& config);

/// Runs one strategy against one backend over the test split; the building
/// block behind `infer` and each matrix cell.
std::vector<Prediction> run_inference(
    const RunConfig& config, Backend& backend, StrategyId infer_strategy,
    const LabelSchema& schema, const Dataset& train, const Dataset& test,
    const PromptTemplate& templates, uint64_t cell_seed,
    PromptVariant variant = PromptVariant::Standard);

// Report emission. The table mirrors the per-training-strategy row layout
// with five metric columns per inference strategy and a best-inference
// marker column (argmax overall accuracy, ties to the earliest column).
std::string render_matrix_table(const MatrixResult& result);
std::string matrix_report_to_json(const MatrixResult& result);
MatrixResult matrix_report_from_json(const std::string& text);

struct EmitResult {
  std::vector<std::string> paths;
};

// Writes report.json and/or report.txt under out_dir; "json", "table" or
// "both". Reports are deterministic; timestamps live in the manifest only.
EmitResult emit_report(const MatrixResult& result, const std::string& format,
                       const std::string& out_dir);

}  // namespace genclass
