#include "genclass/matrix.hpp"

#include <algorithm>
#include <filesystem>

#include <json.hpp>

#include "genclass/corpus.hpp"
#include "genclass/errors.hpp"
#include "genclass/io.hpp"
#include "genclass/metrics.hpp"
#include "genclass/mock_backend.hpp"
#include "genclass/prompt.hpp"
#include "genclass/rng.hpp"
#include "genclass/templates.hpp"
#include "genclass/util.hpp"

namespace genclass {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  if (path.empty() || base_dir.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

void require_exists(const std::string& path, const std::string& what) {
  if (path.empty()) throw Error(ErrorKind::Config, what + " path is not set");
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::Config, what + " not found: " + path);
  }
}

}  // namespace

RunConfig run_config_from_json_text(const std::string& text,
                                    const std::string& base_dir) {
  ordered_json j = ordered_json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorKind::Config, "malformed config JSON");

  RunConfig config;
  config.schema_path = resolve_path(base_dir, j.value("schema", std::string{}));
  config.train_path = resolve_path(base_dir, j.value("train", std::string{}));
  config.test_path = resolve_path(base_dir, j.value("test", std::string{}));
  config.template_dir = resolve_path(base_dir, j.value("templates", std::string{}));
  if (j.contains("embeddings")) {
    config.train_embeddings_path =
        resolve_path(base_dir, j["embeddings"].value("train", std::string{}));
    config.test_embeddings_path =
        resolve_path(base_dir, j["embeddings"].value("test", std::string{}));
  }
  if (j.contains("train_strategies")) {
    config.train_strategies = j["train_strategies"].get<std::vector<std::string>>();
  }
  if (j.contains("infer_strategies")) {
    config.infer_strategies = j["infer_strategies"].get<std::vector<std::string>>();
  }
  if (j.contains("fixed_shot_ids")) {
    config.fixed_shot_ids = j["fixed_shot_ids"].get<std::vector<std::string>>();
  }
  config.seed = j.value("seed", uint64_t{0});
  config.parallelism = j.value("parallelism", size_t{1});
  config.parallel_cells = j.value("parallel_cells", false);
  // Output lands relative to the working directory, not the config file.
  config.out_dir = j.value("out", std::string{"out"});
  config.format = j.value("format", std::string{"table"});

  if (j.contains("decode")) {
    const auto& d = j["decode"];
    config.decode.max_new_tokens = d.value("max_new_tokens", size_t{32});
    config.decode.reasoning_max_new_tokens =
        d.value("reasoning_max_new_tokens", size_t{1024});
    config.decode.temperature = d.value("temperature", 0.0);
  }
  if (j.contains("match")) {
    const auto& m = j["match"];
    config.match.case_fold = m.value("case_fold", false);
    config.match.direct_accept_bare = m.value("direct_accept_bare", true);
    config.match.direct_accept_category_line =
        m.value("direct_accept_category_line", true);
  }
  if (j.contains("reward")) {
    const auto& r = j["reward"];
    config.reward_port = r.value("port", 8711);
    config.reward_bind = r.value("bind", std::string{"127.0.0.1"});
    config.reward_mode = r.value("mode", std::string{"reasoning"});
  }
  if (j.contains("backends")) {
    for (const auto& [key, spec] : j["backends"].items()) {
      BackendSpec backend;
      backend.type = spec.value("type", std::string{"mock"});
      if (backend.type == "mock") {
        backend.script = resolve_path(base_dir, spec.value("script", std::string{}));
      } else if (backend.type == "http") {
        backend.http.base_url = spec.value("base_url", std::string{});
        backend.http.model = spec.value("model", std::string{});
        backend.http.chat_path =
            spec.value("chat_path", std::string{"/v1/chat/completions"});
        backend.http.completions_path =
            spec.value("completions_path", std::string{"/v1/completions"});
        backend.http.api_key_env =
            spec.value("api_key_env", std::string{"OPENAI_API_KEY"});
        backend.http.timeout_seconds = spec.value("timeout_seconds", 60);
        backend.http.max_retries = spec.value("max_retries", 3);
      } else {
        throw Error(ErrorKind::Config, "unknown backend type: " + backend.type);
      }
      config.backends[key] = std::move(backend);
    }
  }
  return config;
}

std::string run_config_to_json_text(const RunConfig& config) {
  ordered_json j;
  j["schema"] = config.schema_path;
  j["train"] = config.train_path;
  j["test"] = config.test_path;
  j["templates"] = config.template_dir;
  if (!config.train_embeddings_path.empty() || !config.test_embeddings_path.empty()) {
    j["embeddings"] = {{"train", config.train_embeddings_path},
                       {"test", config.test_embeddings_path}};
  }
  j["train_strategies"] = config.train_strategies;
  j["infer_strategies"] = config.infer_strategies;
  if (!config.fixed_shot_ids.empty()) j["fixed_shot_ids"] = config.fixed_shot_ids;
  j["seed"] = config.seed;
  j["parallelism"] = config.parallelism;
  j["parallel_cells"] = config.parallel_cells;
  j["out"] = config.out_dir;
  j["format"] = config.format;
  j["decode"] = {{"max_new_tokens", config.decode.max_new_tokens},
                 {"reasoning_max_new_tokens", config.decode.reasoning_max_new_tokens},
                 {"temperature", config.decode.temperature}};
  j["match"] = {{"case_fold", config.match.case_fold},
                {"direct_accept_bare", config.match.direct_accept_bare},
                {"direct_accept_category_line", config.match.direct_accept_category_line}};
  j["reward"] = {{"port", config.reward_port},
                 {"bind", config.reward_bind},
                 {"mode", config.reward_mode}};
  ordered_json backends = ordered_json::object();
  for (const auto& [key, spec] : config.backends) {
    ordered_json b;
    b["type"] = spec.type;
    if (spec.type == "mock") {
      b["script"] = spec.script;
    } else {
      b["base_url"] = spec.http.base_url;
      b["model"] = spec.http.model;
      b["chat_path"] = spec.http.chat_path;
      b["completions_path"] = spec.http.completions_path;
      b["api_key_env"] = spec.http.api_key_env;
      b["timeout_seconds"] = spec.http.timeout_seconds;
      b["max_retries"] = spec.http.max_retries;
    }
    backends[key] = b;
  }
  j["backends"] = backends;
  return j.dump(2) + "\n";
}

namespace {

void validate_run_config(const RunConfig& config, bool for_matrix) {
  require_exists(config.schema_path, "schema");
  require_exists(config.test_path, "test dataset");
  require_exists(config.template_dir, "template directory");
  if (!config.train_path.empty()) require_exists(config.train_path, "train dataset");
  if (!config.train_embeddings_path.empty()) {
    require_exists(config.train_embeddings_path, "train embeddings");
  }
  if (!config.test_embeddings_path.empty()) {
    require_exists(config.test_embeddings_path, "test embeddings");
  }
  for (const auto& [key, spec] : config.backends) {
    if (spec.type == "mock") require_exists(spec.script, "mock script for " + key);
  }

  if (for_matrix) {
    if (config.train_strategies.empty() || config.infer_strategies.empty()) {
      throw Error(ErrorKind::Config, "strategy lists must be non-empty");
    }
    for (const auto& name : config.train_strategies) {
      if (strategy_from_name(name).inference_only()) {
        throw Error(ErrorKind::Config,
                    "ppl is inference-only and cannot appear in train_strategies");
      }
    }
    for (const auto& name : config.infer_strategies) {
      StrategyId strategy = strategy_from_name(name);
      if (strategy.uses_retrieved_shots() &&
          (config.train_embeddings_path.empty() || config.test_embeddings_path.empty())) {
        throw Error(ErrorKind::Config,
                    "similar_3_shot inference needs train and test embeddings");
      }
    }
  }
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  require_exists(path, "config");
  std::string base_dir = std::filesystem::path(path).parent_path().string();
  RunConfig config = run_config_from_json_text(read_file(path), base_dir);
  // Paths are checked at load; the grid constraints are run_matrix's concern
  // (single-strategy subcommands do not need the lists).
  validate_run_config(config, /*for_matrix=*/false);
  return config;
}

BackendPtr make_backend(const BackendSpec& spec) {
  if (spec.type == "mock") {
    return std::make_shared<MockBackend>(MockBackend::from_file(spec.script));
  }
  if (spec.type == "http") {
    return std::make_shared<HttpBackend>(spec.http);
  }
  throw Error(ErrorKind::Config, "unknown backend type: " + spec.type);
}

namespace {

const BackendSpec& backend_spec_for(const RunConfig& config,
                                    const std::string& train_strategy) {
  auto it = config.backends.find(train_strategy);
  if (it != config.backends.end()) return it->second;
  it = config.backends.find("default");
  if (it != config.backends.end()) return it->second;
  throw Error(ErrorKind::Config,
              "no backend configured for train strategy: " + train_strategy);
}

}  // namespace

std::vector<Prediction> run_inference(
    const RunConfig& config, Backend& backend, StrategyId infer_strategy,
    const LabelSchema& schema, const Dataset& train, const Dataset& test,
    const PromptTemplate& templates, uint64_t cell_seed, PromptVariant variant) {
  EmbeddingStore train_store;
  EmbeddingStore test_store;
  if (infer_strategy.uses_retrieved_shots()) {
    if (config.train_embeddings_path.empty() || config.test_embeddings_path.empty()) {
      throw Error(ErrorKind::Config,
                  "similar_3_shot inference needs train and test embeddings");
    }
    train_store = load_embeddings(config.train_embeddings_path);
    test_store = load_embeddings(config.test_embeddings_path);
  }

  ShotContext fixed_context;
  if (infer_strategy.kind == StrategyKind::Fixed3Shot) {
    if (!config.fixed_shot_ids.empty()) {
      fixed_context = select_fixed_shots(train, config.fixed_shot_ids);
    } else {
      // Drawn from the run seed, not the cell seed: every cell shares the
      // same three exemplars.
      fixed_context = sample_shots(train, 3, mix_seed(config.seed, fnv1a("fixed_shots")));
      fixed_context.source = ShotSource::Fixed;
    }
  }

  DecodeParams params;
  params.max_new_tokens = variant == PromptVariant::Standard
                              ? config.decode.max_new_tokens
                              : config.decode.reasoning_max_new_tokens;
  params.temperature = config.decode.temperature;
  params.seed = cell_seed;

  std::vector<Prediction> predictions(test.examples.size());
  parallel_for_indexed(test.examples.size(), config.parallelism, [&](size_t i) {
    const Example& example = test.examples[i];

    if (infer_strategy.inference_only()) {
      std::string base_prompt =
          render_prompt_text(StrategyId::zero_shot(), schema, example,
                             ShotContext::none(), templates);
      predictions[i] = classify_ppl(backend, base_prompt, schema, example.id);
      return;
    }

    ShotContext context;
    if (infer_strategy.kind == StrategyKind::Fixed3Shot) {
      context = fixed_context;
    } else if (infer_strategy.uses_sampled_shots()) {
      context = sample_shots(train, infer_strategy.shot_count(),
                             mix_seed(cell_seed, i), example.id);
    } else if (infer_strategy.uses_retrieved_shots()) {
      const auto* query = test_store.vector_of(example.id);
      if (!query) {
        throw Error(ErrorKind::UnknownId,
                    "no embedding for test example: " + example.id);
      }
      auto ranked = top_k(train_store, *query, 3, example.id);
      context.source = ShotSource::Retrieved;
      for (const auto& [id, score] : ranked) {
        const Example* shot = train.find(id);
        if (!shot) {
          throw Error(ErrorKind::UnknownId, "embedding id not in train set: " + id);
        }
        context.shots.emplace_back(*shot, shot->gold);
      }
    }

    PromptRecord prompt = render_prompt(infer_strategy, schema, example, context,
                                        templates, RenderTime::Inference, variant);
    predictions[i] = classify_generate(backend, prompt, schema, params, config.match);
  });
  return predictions;
}

size_t MatrixResult::populated() const {
  size_t n = 0;
  for (const auto& cell : cells) n += cell.metrics.has_value() ? 1 : 0;
  return n;
}

size_t MatrixResult::failed() const { return cells.size() - populated(); }

const CellResult* MatrixResult::cell(const std::string& train_strategy,
                                     const std::string& infer_strategy) const {
  for (const auto& c : cells) {
    if (c.train_strategy == train_strategy && c.infer_strategy == infer_strategy) {
      return &c;
    }
  }
  return nullptr;
}

MatrixResult run_matrix(const RunConfig& config) {
  validate_run_config(config, /*for_matrix=*/true);
  if (config.train_path.empty()) {
    throw Error(ErrorKind::Config, "matrix runs need a train dataset");
  }

  LabelSchema schema = load_schema(config.schema_path);
  ValidationReport schema_report = validate_schema(schema);
  if (!schema_report.pass()) {
    throw Error(ErrorKind::Config, "schema invalid: " + schema_report.violations[0]);
  }
  Dataset train = load_dataset(config.train_path, Split::Train);
  Dataset test = load_dataset(config.test_path, Split::Test);
  for (const Dataset* d : {&train, &test}) {
    ValidationReport r = validate_dataset(*d, schema);
    if (!r.pass()) {
      throw Error(ErrorKind::Config, d->name + " invalid: " + r.violations[0]);
    }
  }
  PromptTemplate templates = load_templates(config.template_dir);

  // Backends are shared across the cells of their train strategy.
  std::map<std::string, BackendPtr> backend_cache;
  for (const auto& train_name : config.train_strategies) {
    backend_cache[train_name] = make_backend(backend_spec_for(config, train_name));
  }

  MatrixResult result;
  result.cells.resize(config.train_strategies.size() * config.infer_strategies.size());

  auto run_cell = [&](size_t index) {
    size_t row = index / config.infer_strategies.size();
    size_t col = index % config.infer_strategies.size();
    const std::string& train_name = config.train_strategies[row];
    const std::string& infer_name = config.infer_strategies[col];

    CellResult cell;
    cell.train_strategy = train_name;
    cell.infer_strategy = infer_name;
    cell.cell_seed = mix_seed(config.seed, mix_seed(fnv1a(train_name), fnv1a(infer_name)));
    Backend& backend = *backend_cache.at(train_name);
    cell.backend_id = backend.id();
    try {
      StrategyId infer_strategy = strategy_from_name(infer_name);
      cell.predictions = run_inference(config, backend, infer_strategy, schema,
                                       train, test, templates, cell.cell_seed);
      cell.metrics = evaluate(cell.predictions, test, schema);
    } catch (const std::exception& e) {
      cell.error = e.what();
      cell.predictions.clear();
    }
    result.cells[index] = std::move(cell);
  };

  size_t n_cells = result.cells.size();
  if (config.parallel_cells) {
    parallel_for_indexed(n_cells, config.parallelism, run_cell);
  } else {
    for (size_t i = 0; i < n_cells; ++i) run_cell(i);
  }
  return result;
}

namespace {

const char* kMetricColumns[] = {"fmt_suc_ratio", "fmt_suc_acc", "fmt_suc_macro_f1",
                                "overall_acc", "overall_macro_f1"};

std::vector<std::string> ordered_unique(const std::vector<CellResult>& cells,
                                        bool train_side) {
  std::vector<std::string> names;
  for (const auto& cell : cells) {
    const std::string& name = train_side ? cell.train_strategy : cell.infer_strategy;
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      names.push_back(name);
    }
  }
  return names;
}

}  // namespace

std::string render_matrix_table(const MatrixResult& result) {
  std::vector<std::string> train_names = ordered_unique(result.cells, true);
  std::vector<std::string> infer_names = ordered_unique(result.cells, false);

  std::string out = "method";
  for (const auto& infer : infer_names) {
    for (const char* metric : kMetricColumns) {
      out += "\t" + infer + ":" + metric;
    }
  }
  out += "\tbest_infer\n";

  for (const auto& train : train_names) {
    out += train;
    const CellResult* best = nullptr;
    std::string best_name = "--";
    for (const auto& infer : infer_names) {
      const CellResult* cell = result.cell(train, infer);
      if (cell && cell->metrics &&
          (!best || cell->metrics->overall_acc > best->metrics->overall_acc)) {
        best = cell;  // strict > keeps the earliest column on ties
        best_name = infer;
      }
    }
    for (const auto& infer : infer_names) {
      const CellResult* cell = result.cell(train, infer);
      if (cell && cell->metrics) {
        const MetricsReport& m = *cell->metrics;
        out += "\t" + format_percent(m.fmt_suc_ratio);
        out += "\t" + format_percent(m.fmt_suc_acc);
        out += "\t" + format_percent(m.fmt_suc_macro_f1);
        out += "\t" + format_percent(m.overall_acc);
        out += "\t" + format_percent(m.overall_macro_f1);
      } else {
        for (int k = 0; k < 5; ++k) out += "\t--";
      }
    }
    out += "\t" + best_name + "\n";
  }
  return out;
}

std::string matrix_report_to_json(const MatrixResult& result) {
  ordered_json cells = ordered_json::array();
  for (const auto& cell : result.cells) {
    ordered_json j;
    j["train_strategy"] = cell.train_strategy;
    j["infer_strategy"] = cell.infer_strategy;
    if (cell.metrics) {
      const MetricsReport& m = *cell.metrics;
      ordered_json metrics;
      metrics["n_total"] = m.n_total;
      metrics["n_format_ok"] = m.n_format_ok;
      metrics["n_correct"] = m.n_correct;
      metrics["fmt_suc_ratio"] = m.fmt_suc_ratio;
      metrics["fmt_suc_acc"] = m.fmt_suc_acc;
      metrics["fmt_suc_macro_f1"] = m.fmt_suc_macro_f1;
      metrics["overall_acc"] = m.overall_acc;
      metrics["overall_macro_f1"] = m.overall_macro_f1;
      metrics["fmt_subset_empty"] = m.fmt_subset_empty;
      j["metrics"] = metrics;
    }
    if (cell.error) j["error"] = *cell.error;
    j["cell_seed"] = cell.cell_seed;
    j["backend_id"] = cell.backend_id;
    cells.push_back(j);
  }
  ordered_json root;
  root["cells"] = cells;
  return root.dump(2) + "\n";
}

MatrixResult matrix_report_from_json(const std::string& text) {
  ordered_json root = ordered_json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded()) throw Error(ErrorKind::Io, "malformed matrix report JSON");

  MatrixResult result;
  for (const auto& j : root.at("cells")) {
    CellResult cell;
    cell.train_strategy = j.at("train_strategy").get<std::string>();
    cell.infer_strategy = j.at("infer_strategy").get<std::string>();
    if (j.contains("metrics")) {
      const auto& m = j["metrics"];
      MetricsReport metrics;
      metrics.n_total = m.at("n_total").get<size_t>();
      metrics.n_format_ok = m.at("n_format_ok").get<size_t>();
      metrics.n_correct = m.at("n_correct").get<size_t>();
      metrics.fmt_suc_ratio = m.at("fmt_suc_ratio").get<double>();
      metrics.fmt_suc_acc = m.at("fmt_suc_acc").get<double>();
      metrics.fmt_suc_macro_f1 = m.at("fmt_suc_macro_f1").get<double>();
      metrics.overall_acc = m.at("overall_acc").get<double>();
      metrics.overall_macro_f1 = m.at("overall_macro_f1").get<double>();
      metrics.fmt_subset_empty = m.value("fmt_subset_empty", false);
      cell.metrics = metrics;
    }
    if (j.contains("error")) cell.error = j["error"].get<std::string>();
    cell.cell_seed = j.value("cell_seed", uint64_t{0});
    cell.backend_id = j.value("backend_id", std::string{});
    result.cells.push_back(std::move(cell));
  }
  return result;
}

EmitResult emit_report(const MatrixResult& result, const std::string& format,
                       const std::string& out_dir) {
  if (result.cells.empty()) {
    throw Error(ErrorKind::Validation, "cannot emit a report for an empty result");
  }
  std::filesystem::create_directories(out_dir);
  EmitResult emitted;
  bool json = format == "json" || format == "both";
  bool table = format == "table" || format == "both";
  if (!json && !table) {
    throw Error(ErrorKind::Config, "unknown report format: " + format);
  }
  if (json) {
    std::string path = (std::filesystem::path(out_dir) / "report.json").string();
    write_file(path, matrix_report_to_json(result));
    emitted.paths.push_back(path);
  }
  if (table) {
    std::string path = (std::filesystem::path(out_dir) / "report.txt").string();
    write_file(path, render_matrix_table(result));
    emitted.paths.push_back(path);
  }
  return emitted;
}

}  // namespace genclass
