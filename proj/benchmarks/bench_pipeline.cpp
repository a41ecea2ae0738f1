#include <benchmark/benchmark.h>

#include "genclass/corpus.hpp"
#include "genclass/metrics.hpp"
#include "genclass/prompt.hpp"
#include "genclass/rng.hpp"

using namespace genclass;

namespace {

LabelSchema bench_schema() {
  LabelSchema schema;
  schema.labels = {"sadness", "joy", "love", "anger", "fear", "surprise"};
  return schema;
}

PromptTemplate bench_templates() {
  PromptTemplate t;
  t.task_header = "You are a classification expert.";
  t.categories_line = "Optional categories: {{categories}}";
  t.format_instruction = "Please output in the format Category: xxx.";
  t.format_instruction_numeric = "Please output the numeric label.";
  t.format_instruction_uncertain = "Please output the label or uncertain.";
  t.definitions_header = "Definitions:";
  t.definition_block = "{{label}}: {{definition}}";
  t.example_block = "Example {{index}}:\nText: {{text}}\nCategory: {{label}}";
  t.current_case_block = "Current case:\nText: {{text}}";
  t.request_line = "Please output the category.";
  return t;
}

Dataset bench_dataset(size_t n, const LabelSchema& schema) {
  Dataset d;
  for (size_t i = 0; i < n; ++i) {
    Example ex;
    ex.id = "e" + std::to_string(i);
    ex.slots["text"] = "a fairly typical input sentence number " + std::to_string(i);
    ex.gold = schema.labels[i % schema.labels.size()];
    d.examples.push_back(std::move(ex));
  }
  return d;
}

}  // namespace

static void BM_RenderThreeShotPrompt(benchmark::State& state) {
  LabelSchema schema = bench_schema();
  PromptTemplate templates = bench_templates();
  Dataset train = bench_dataset(100, schema);
  ShotContext shots = sample_shots(train, 3, 7);
  const Example& target = train.examples[50];
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_prompt_text(StrategyId::n_shot(3), schema,
                                                target, shots, templates));
  }
}
BENCHMARK(BM_RenderThreeShotPrompt);

static void BM_BuildCorpus(benchmark::State& state) {
  LabelSchema schema = bench_schema();
  PromptTemplate templates = bench_templates();
  Dataset train = bench_dataset(static_cast<size_t>(state.range(0)), schema);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        build_sft_corpus(train, schema, StrategyId::n_shot(3), 11, templates));
  }
}
BENCHMARK(BM_BuildCorpus)->Arg(100)->Arg(1000);

static void BM_Evaluate(benchmark::State& state) {
  LabelSchema schema = bench_schema();
  size_t n = static_cast<size_t>(state.range(0));
  Dataset test = bench_dataset(n, schema);
  test.split = Split::Test;
  SplitMix64 rng(3);
  std::vector<Prediction> predictions;
  for (const auto& ex : test.examples) {
    Prediction p;
    p.example_id = ex.id;
    if (rng.bounded(10) == 0) {
      p.format_ok = false;
    } else {
      p.format_ok = true;
      p.parsed_label = schema.labels[rng.bounded(schema.labels.size())];
    }
    predictions.push_back(std::move(p));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(predictions, test, schema));
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(n));
}
BENCHMARK(BM_Evaluate)->Arg(1000)->Arg(10000);

static void BM_PackRecords(benchmark::State& state) {
  SplitMix64 rng(4);
  std::vector<TrainingRecord> records;
  for (size_t i = 0; i < 10000; ++i) {
    TrainingRecord r;
    r.example_id = "r" + std::to_string(i);
    r.strategy = "zero_shot";
    r.token_length = 16 + rng.bounded(496);
    records.push_back(std::move(r));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(pack_records(records, 2048, PackMode::Neat));
  }
}
BENCHMARK(BM_PackRecords);

BENCHMARK_MAIN();
