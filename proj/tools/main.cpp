// genclass: build SFT corpora per prompt strategy, run classification through
// mock or OpenAI-compatible backends, score rewards, and evaluate the
// training x inference strategy grid.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "genclass/corpus.hpp"
#include "genclass/errors.hpp"
#include "genclass/inference.hpp"
#include "genclass/io.hpp"
#include "genclass/matrix.hpp"
#include "genclass/metrics.hpp"
#include "genclass/prompt.hpp"
#include "genclass/reward_service.hpp"
#include "genclass/rng.hpp"
#include "genclass/templates.hpp"
#include "genclass/util.hpp"

namespace {

using namespace genclass;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;
constexpr int kExitFailure = 4;

std::string iso8601_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct CommonFlags {
  std::string config_path;
  std::string schema_path;
  std::string train_path;
  std::string test_path;
  std::string template_dir;
  std::string train_strategies_csv;
  std::string infer_strategies_csv;
  std::optional<uint64_t> seed;
  std::optional<size_t> parallelism;
  std::string out;
  std::string format;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Run config JSON file");
  cmd->add_option("--schema", flags.schema_path, "Label schema JSON");
  cmd->add_option("--train", flags.train_path, "Training dataset JSONL");
  cmd->add_option("--test", flags.test_path, "Test dataset JSONL");
  cmd->add_option("--templates", flags.template_dir, "Prompt template directory");
  cmd->add_option("--train-strategies", flags.train_strategies_csv,
                  "Comma-separated training strategies");
  cmd->add_option("--infer-strategies", flags.infer_strategies_csv,
                  "Comma-separated inference strategies");
  cmd->add_option("--seed", flags.seed, "Run seed");
  cmd->add_option("--parallelism", flags.parallelism, "Max in-flight requests");
  cmd->add_option("--out", flags.out, "Output file or directory");
  cmd->add_option("--format", flags.format, "Report format: table|json|both");
}

std::vector<std::string> csv_list(const std::string& csv) {
  std::vector<std::string> out;
  for (auto& part : split(csv, ',')) {
    std::string token = trim(part);
    if (!token.empty()) out.push_back(std::move(token));
  }
  return out;
}

RunConfig resolve_config(const CommonFlags& flags) {
  RunConfig config;
  if (!flags.config_path.empty()) config = load_run_config(flags.config_path);
  if (!flags.schema_path.empty()) config.schema_path = flags.schema_path;
  if (!flags.train_path.empty()) config.train_path = flags.train_path;
  if (!flags.test_path.empty()) config.test_path = flags.test_path;
  if (!flags.template_dir.empty()) config.template_dir = flags.template_dir;
  if (!flags.train_strategies_csv.empty()) {
    config.train_strategies = csv_list(flags.train_strategies_csv);
  }
  if (!flags.infer_strategies_csv.empty()) {
    config.infer_strategies = csv_list(flags.infer_strategies_csv);
  }
  if (flags.seed) config.seed = *flags.seed;
  if (flags.parallelism) config.parallelism = *flags.parallelism;
  if (!flags.out.empty()) config.out_dir = flags.out;
  if (!flags.format.empty()) config.format = flags.format;
  return config;
}

LabelSchema load_checked_schema(const std::string& path) {
  if (path.empty()) throw Error(ErrorKind::Config, "--schema is required");
  LabelSchema schema = load_schema(path);
  ValidationReport report = validate_schema(schema);
  if (!report.pass()) {
    throw Error(ErrorKind::Config, "schema invalid: " + report.violations[0]);
  }
  return schema;
}

Dataset load_checked_dataset(const std::string& path, Split split,
                             const LabelSchema& schema) {
  if (path.empty()) {
    throw Error(ErrorKind::Config,
                std::string("--") + to_string(split) + " dataset is required");
  }
  Dataset dataset = load_dataset(path, split);
  ValidationReport report = validate_dataset(dataset, schema);
  if (!report.pass()) {
    throw Error(ErrorKind::Config,
                dataset.name + " invalid: " + report.violations[0]);
  }
  return dataset;
}

int cmd_build_data(const CommonFlags& flags, const std::string& strategy_name,
                   const std::string& embeddings_path,
                   const std::string& fixed_ids_csv, const std::string& triples_path,
                   const std::string& reasoning_order, const std::string& counter_name) {
  RunConfig config = resolve_config(flags);
  LabelSchema schema = load_checked_schema(config.schema_path);
  Dataset train = load_checked_dataset(config.train_path, Split::Train, schema);
  PromptTemplate templates = load_templates(config.template_dir);

  TokenCounter counter;
  if (counter_name == "whitespace") {
    counter = [](const std::string& s) { return whitespace_token_count(s); };
  } else if (counter_name != "none") {
    throw Error(ErrorKind::Config, "unknown token counter: " + counter_name);
  }

  std::vector<TrainingRecord> records;
  if (!reasoning_order.empty()) {
    if (triples_path.empty()) {
      throw Error(ErrorKind::Config, "--reasoning-order needs --triples");
    }
    records = build_reasoning_corpus(load_reason_triples(triples_path),
                                     reason_order_from_name(reasoning_order), schema,
                                     &train, &templates, counter);
  } else {
    if (strategy_name.empty()) {
      throw Error(ErrorKind::Config, "--strategy is required");
    }
    CorpusOptions options;
    options.fixed_shot_ids = csv_list(fixed_ids_csv);
    options.token_counter = counter;
    EmbeddingStore store;
    std::string embeddings = !embeddings_path.empty()
                                 ? embeddings_path
                                 : config.train_embeddings_path;
    if (!embeddings.empty()) {
      store = load_embeddings(embeddings);
      options.embeddings = &store;
    }
    records = build_sft_corpus(train, schema, strategy_from_name(strategy_name),
                               config.seed, templates, options);
  }

  std::string out = flags.out.empty() ? "corpus.jsonl" : flags.out;
  save_corpus(records, out);
  std::cout << "wrote " << records.size() << " records to " << out << "\n";
  return kExitOk;
}

int cmd_relabel(const CommonFlags& flags, const std::string& preds_m1_path,
                const std::string& preds_m2_path, double cap,
                const std::string& report_path) {
  RunConfig config = resolve_config(flags);
  LabelSchema schema = load_checked_schema(config.schema_path);
  Dataset train = load_checked_dataset(config.train_path, Split::Train, schema);

  auto preds_m1 = predictions_by_id(load_predictions(preds_m1_path));
  auto preds_m2 = predictions_by_id(load_predictions(preds_m2_path));
  auto [relabeled, report] = relabel_uncertain(train, schema, preds_m1, preds_m2, cap);

  std::string out = flags.out.empty() ? "relabeled.jsonl" : flags.out;
  save_dataset(relabeled, out);

  ordered_json j;
  j["n_qualified"] = report.n_qualified;
  j["n_relabeled"] = report.n_relabeled;
  j["relabeled_ids"] = report.relabeled_ids;
  j["cap_fraction"] = report.cap_fraction;
  if (!report_path.empty()) write_file(report_path, j.dump(2) + "\n");
  std::cout << j.dump() << "\n";
  std::cout << "wrote relabeled dataset to " << out << "\n";
  return kExitOk;
}

int cmd_pack(const std::string& in_path, size_t max_len, const std::string& mode_name,
             const std::string& out_path) {
  PackMode mode;
  if (mode_name == "standard") {
    mode = PackMode::Standard;
  } else if (mode_name == "neat") {
    mode = PackMode::Neat;
  } else {
    throw Error(ErrorKind::Config, "pack mode must be standard or neat");
  }
  std::vector<TrainingRecord> records = load_corpus(in_path);
  // Records without annotations fall back to the whitespace counter.
  for (auto& r : records) {
    if (!r.token_length) {
      r.token_length = whitespace_token_count(r.prompt) + whitespace_token_count(r.target);
    }
  }
  std::vector<Pack> packs = pack_records(records, max_len, mode);
  save_packs(packs, out_path);
  std::cout << "packed " << records.size() << " records into " << packs.size()
            << " sequences at " << out_path << "\n";
  return kExitOk;
}

int cmd_infer(const CommonFlags& flags, const std::string& strategy_name,
              const std::string& backend_key, const std::string& variant_name) {
  RunConfig config = resolve_config(flags);
  if (strategy_name.empty()) throw Error(ErrorKind::Config, "--strategy is required");
  StrategyId strategy = strategy_from_name(strategy_name);

  LabelSchema schema = load_checked_schema(config.schema_path);
  Dataset test = load_checked_dataset(config.test_path, Split::Test, schema);
  Dataset train;
  if (!config.train_path.empty()) {
    train = load_checked_dataset(config.train_path, Split::Train, schema);
  } else if (strategy.shot_count() > 0) {
    throw Error(ErrorKind::Config, strategy.name() + " needs --train for shots");
  }
  PromptTemplate templates = load_templates(config.template_dir);

  auto it = config.backends.find(backend_key);
  if (it == config.backends.end()) {
    throw Error(ErrorKind::Config, "no backend named '" + backend_key + "' in config");
  }
  BackendPtr backend = make_backend(it->second);

  PromptVariant variant = PromptVariant::Standard;
  if (variant_name == "reasoning") {
    variant = PromptVariant::TaggedReasoning;
  } else if (variant_name == "direct") {
    variant = PromptVariant::Direct;
  } else if (variant_name != "standard") {
    throw Error(ErrorKind::Config, "unknown prompt variant: " + variant_name);
  }

  uint64_t cell_seed = mix_seed(config.seed, fnv1a(strategy.name()));
  std::vector<Prediction> predictions =
      run_inference(config, *backend, strategy, schema, train, test, templates,
                    cell_seed, variant);

  std::string out = flags.out.empty() ? "predictions.jsonl" : flags.out;
  save_predictions(predictions, out);
  std::cout << "wrote " << predictions.size() << " predictions to " << out << "\n";
  return kExitOk;
}

int cmd_evaluate(const CommonFlags& flags, const std::string& preds_path) {
  RunConfig config = resolve_config(flags);
  LabelSchema schema = load_checked_schema(config.schema_path);
  Dataset test = load_checked_dataset(config.test_path, Split::Test, schema);
  std::vector<Prediction> predictions = load_predictions(preds_path);

  MetricsReport report = evaluate(predictions, test, schema);
  std::string json = metrics_to_json_text(report);
  if (!flags.out.empty()) write_file(flags.out, json + "\n");
  std::cout << json << "\n";
  std::cout << "fmt-suc ratio "
            << format_percent(report.fmt_suc_ratio) << " | fmt-suc acc "
            << format_percent(report.fmt_suc_acc) << " | fmt-suc macro-F1 "
            << format_percent(report.fmt_suc_macro_f1) << " | overall acc "
            << format_percent(report.overall_acc) << " | overall macro-F1 "
            << format_percent(report.overall_macro_f1) << "\n";
  return kExitOk;
}

int cmd_matrix(const CommonFlags& flags) {
  RunConfig config = resolve_config(flags);
  std::string started = iso8601_now();
  MatrixResult result = run_matrix(config);
  std::string finished = iso8601_now();

  std::string fmt = config.format.empty() ? "both" : config.format;
  EmitResult emitted = emit_report(result, fmt, config.out_dir);

  // Per-cell prediction logs.
  for (const auto& cell : result.cells) {
    if (cell.predictions.empty()) continue;
    auto dir = std::filesystem::path(config.out_dir) / "cells" /
               (cell.train_strategy + "__" + cell.infer_strategy);
    std::filesystem::create_directories(dir);
    save_predictions(cell.predictions, (dir / "predictions.jsonl").string());
  }

  // Manifest: everything needed to reproduce any cell, plus wall-clock marks.
  ordered_json manifest;
  manifest["started_at"] = started;
  manifest["finished_at"] = finished;
  manifest["seed"] = config.seed;
  // ppl decoding scores the full "Category: <label>" continuation against the
  // zero-shot base prompt.
  manifest["conventions"] = {{"ppl_base_prompt", "zero_shot"},
                             {"ppl_continuation", "category_line"},
                             {"ppl_scored_tokens", "whole_continuation"}};
  manifest["config"] =
      ordered_json::parse(run_config_to_json_text(config));
  ordered_json cells = ordered_json::array();
  for (const auto& cell : result.cells) {
    ordered_json c;
    c["train_strategy"] = cell.train_strategy;
    c["infer_strategy"] = cell.infer_strategy;
    c["cell_seed"] = cell.cell_seed;
    c["backend_id"] = cell.backend_id;
    c["status"] = cell.metrics ? "ok" : "error";
    if (cell.error) c["error"] = *cell.error;
    cells.push_back(c);
  }
  manifest["cells"] = cells;
  write_file((std::filesystem::path(config.out_dir) / "manifest.json").string(),
             manifest.dump(2) + "\n");

  for (const auto& path : emitted.paths) std::cout << "wrote " << path << "\n";
  std::cout << result.populated() << "/" << result.cells.size()
            << " cells populated\n";

  if (result.populated() == result.cells.size()) return kExitOk;
  if (result.populated() == 0) return kExitFailure;
  return kExitPartial;
}

int cmd_reward_serve(const CommonFlags& flags, int port, const std::string& bind,
                     bool case_fold) {
  RunConfig config = resolve_config(flags);
  RewardServiceConfig service_config;
  service_config.port = port != 0 ? port : config.reward_port;
  service_config.bind_address = !bind.empty() ? bind : config.reward_bind;
  service_config.match = config.match;
  if (case_fold) service_config.match.case_fold = true;
  if (!config.schema_path.empty()) {
    service_config.schema = load_checked_schema(config.schema_path);
  }

  std::cout << "reward service listening on " << service_config.bind_address << ":"
            << service_config.port << " (POST /v1/reward, /v1/reward/batch)\n";
  RewardService service(std::move(service_config));
  service.run_blocking();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generative-classification experiment harness"};
  app.require_subcommand(1);

  CommonFlags flags;

  auto* build = app.add_subcommand("build-data", "Emit an SFT corpus for a strategy");
  std::string strategy_name, embeddings_path, fixed_ids_csv, triples_path,
      reasoning_order;
  std::string counter_name = "whitespace";
  add_common_flags(build, flags);
  build->add_option("--strategy", strategy_name, "Training strategy name");
  build->add_option("--embeddings", embeddings_path, "Train embeddings JSONL");
  build->add_option("--fixed-ids", fixed_ids_csv, "Comma-separated fixed shot ids");
  build->add_option("--triples", triples_path, "Reason-triple JSONL");
  build->add_option("--reasoning-order", reasoning_order,
                    "class_then_reason|reason_then_class|think_reason_class");
  build->add_option("--token-counter", counter_name, "whitespace|none");

  auto* relabel = app.add_subcommand(
      "relabel-uncertain", "Relabel examples both reference models miss");
  std::string preds_m1_path, preds_m2_path, report_path;
  double cap = 0.10;
  add_common_flags(relabel, flags);
  relabel->add_option("--preds-m1", preds_m1_path, "Model 1 prediction log")->required();
  relabel->add_option("--preds-m2", preds_m2_path, "Model 2 prediction log")->required();
  relabel->add_option("--cap", cap, "Relabel cap as a fraction of the train set");
  relabel->add_option("--report", report_path, "Relabel report JSON path");

  auto* pack = app.add_subcommand("pack", "Pack a corpus into fixed-length sequences");
  std::string pack_in, pack_mode = "neat", pack_out = "packs.jsonl";
  size_t max_len = 0;
  pack->add_option("--in", pack_in, "Corpus JSONL")->required();
  pack->add_option("--max-len", max_len, "Token budget per pack")->required();
  pack->add_option("--mode", pack_mode, "standard|neat");
  pack->add_option("--out", pack_out, "Output pack JSONL");

  auto* infer = app.add_subcommand("infer", "Classify the test split once");
  std::string infer_strategy, backend_key = "default", variant_name = "standard";
  add_common_flags(infer, flags);
  infer->add_option("--strategy", infer_strategy, "Inference strategy name");
  infer->add_option("--backend", backend_key, "Backend key from the config");
  infer->add_option("--variant", variant_name, "standard|reasoning|direct");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a prediction log");
  std::string preds_path;
  add_common_flags(evaluate_cmd, flags);
  evaluate_cmd->add_option("--preds", preds_path, "Prediction log JSONL")->required();

  auto* matrix = app.add_subcommand("matrix", "Run the train x infer strategy grid");
  add_common_flags(matrix, flags);

  auto* serve = app.add_subcommand("reward-serve", "Serve rule-based rewards over HTTP");
  int serve_port = 0;
  std::string serve_bind;
  bool serve_case_fold = false;
  add_common_flags(serve, flags);
  serve->add_option("--port", serve_port, "Listen port");
  serve->add_option("--bind", serve_bind, "Bind address");
  serve->add_flag("--case-fold", serve_case_fold, "Case-insensitive label matching");

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) {
      return cmd_build_data(flags, strategy_name, embeddings_path, fixed_ids_csv,
                            triples_path, reasoning_order, counter_name);
    }
    if (relabel->parsed()) {
      return cmd_relabel(flags, preds_m1_path, preds_m2_path, cap, report_path);
    }
    if (pack->parsed()) return cmd_pack(pack_in, max_len, pack_mode, pack_out);
    if (infer->parsed()) {
      return cmd_infer(flags, infer_strategy, backend_key, variant_name);
    }
    if (evaluate_cmd->parsed()) return cmd_evaluate(flags, preds_path);
    if (matrix->parsed()) return cmd_matrix(flags);
    if (serve->parsed()) {
      return cmd_reward_serve(flags, serve_port, serve_bind, serve_case_fold);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return e.kind() == ErrorKind::Config || e.kind() == ErrorKind::Io ||
                   e.kind() == ErrorKind::Validation
               ? kExitConfig
               : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitConfig;
}
