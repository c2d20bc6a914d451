#include <benchmark/benchmark.h>

#include "convoforge/featurize.hpp"
#include "convoforge/resources.hpp"
#include "convoforge/synthetic.hpp"
#include "convoforge/vectors.hpp"

using namespace convoforge;

namespace {

const Resources& resources() {
  static const Resources r = Resources::load(default_resource_dir());
  return r;
}

void BM_FallbackEmbed(benchmark::State& state) {
  const std::string text = "I honestly think this plan could work if we split the tasks more evenly.";
  for (auto _ : state) benchmark::DoNotOptimize(fallback_embed(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_FallbackEmbed);

void BM_Tokenize(benchmark::State& state) {
  const std::string text = "Well... THAT is not what I said (at all). Did you read u/someone's post? Maybe not!";
  for (auto _ : state) benchmark::DoNotOptimize(tokenize(text));
}
BENCHMARK(BM_Tokenize);

// Arg: conversations; second arg: worker threads.
void BM_FeaturizeCorpus(benchmark::State& state) {
  SyntheticOptions opts;
  opts.n_conversations = static_cast<std::size_t>(state.range(0));
  opts.seed = 1;
  const auto corpus = generate_synthetic_corpus(opts);
  const VectorProvider vectors(nullptr, nullptr, true);
  FeaturizeOptions fopts;
  fopts.lda_iterations = 100;
  fopts.jobs = static_cast<std::size_t>(state.range(1));
  resources();
  for (auto _ : state) benchmark::DoNotOptimize(featurize_corpus(corpus, resources(), vectors, fopts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FeaturizeCorpus)->Args({100, 1})->Args({100, 4})->Args({400, 1})->Unit(benchmark::kMillisecond);

}  // namespace
