#include <benchmark/benchmark.h>

#include "genclass/inference.hpp"
#include "genclass/io.hpp"

using namespace genclass;

namespace {

LabelSchema bench_schema() {
  LabelSchema schema;
  schema.labels = {"sadness", "joy", "love", "anger", "fear", "surprise"};
  return schema;
}

}  // namespace

static void BM_ParseCategoryHit(benchmark::State& state) {
  LabelSchema schema = bench_schema();
  std::string text = "Let me think about this.\nCategory: surprise\n";
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_category(text, schema, ParseMode::CategoryText));
  }
}
BENCHMARK(BM_ParseCategoryHit);

static void BM_ParseCategoryMiss(benchmark::State& state) {
  LabelSchema schema = bench_schema();
  std::string text(512, 'x');
  text += "\nno structured answer anywhere\n";
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_category(text, schema, ParseMode::CategoryText));
  }
}
BENCHMARK(BM_ParseCategoryMiss);

static void BM_ParseTagged(benchmark::State& state) {
  std::string text =
      "<reason>the edit rewrites the sentence to add concrete detail about the "
      "subject, which matches the elaboration pattern</reason> "
      "<answer>elaboration</answer>";
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_tagged(text));
  }
}
BENCHMARK(BM_ParseTagged);
