#include <benchmark/benchmark.h>

#include "genclass/retrieval.hpp"
#include "genclass/rng.hpp"

using namespace genclass;

namespace {

EmbeddingStore make_store(size_t entries, size_t dim) {
  SplitMix64 rng(9);
  EmbeddingStore store(dim);
  for (size_t i = 0; i < entries; ++i) {
    std::vector<double> vec(dim);
    for (auto& v : vec) v = rng.uniform() * 2.0 - 1.0;
    store.add("id" + std::to_string(i), std::move(vec));
  }
  return store;
}

}  // namespace

static void BM_Cosine(benchmark::State& state) {
  size_t dim = static_cast<size_t>(state.range(0));
  SplitMix64 rng(1);
  std::vector<double> u(dim), v(dim);
  for (size_t i = 0; i < dim; ++i) {
    u[i] = rng.uniform();
    v[i] = rng.uniform();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(cosine(u, v));
  }
}
BENCHMARK(BM_Cosine)->Arg(32)->Arg(256)->Arg(1024);

static void BM_TopK(benchmark::State& state) {
  size_t entries = static_cast<size_t>(state.range(0));
  EmbeddingStore store = make_store(entries, 64);
  SplitMix64 rng(2);
  std::vector<double> query(64);
  for (auto& v : query) v = rng.uniform();
  for (auto _ : state) {
    benchmark::DoNotOptimize(top_k(store, query, 3));
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(entries));
}
BENCHMARK(BM_TopK)->Arg(1000)->Arg(10000)->Arg(100000);
