#include <benchmark/benchmark.h>

#include "monoseq/aligner.hpp"
#include "monoseq/jointngram.hpp"
#include "monoseq/lattice.hpp"
#include "monoseq/pcrf.hpp"
#include "monoseq/rng.hpp"
#include "monoseq/synth.hpp"

using namespace monoseq;

namespace {

// Random observation and transition weights over `labels` labels.
WeightTable random_table(std::size_t order, std::size_t labels, std::size_t features, Rng& rng) {
  WeightTable w(order);
  for (FeatureId f = 0; f < features; ++f)
    for (LabelId y = 0; y < labels; ++y) w.set({f, {}, y}, rng.uniform(-1.0, 1.0));
  for (LabelId y = 0; y < labels; ++y) {
    LabelHistory h;
    for (std::size_t k = 0; k < order; ++k) h.push_back(static_cast<LabelId>(rng.below(labels)));
    w.set({kTransitionFeature, h.suffix(1), y}, rng.uniform(-1.0, 1.0));
  }
  return w;
}

struct Fixture {
  WeightTable weights;
  PrunedLattice lattice;
  PositionFeatures features;
};

Fixture make_fixture(std::size_t order, std::size_t candidates, std::size_t length) {
  Rng rng(7);
  const std::size_t labels = 30, n_features = 200;
  Fixture fx{random_table(order, labels, n_features, rng), {}, {}};
  for (std::size_t i = 0; i < length; ++i) {
    std::vector<LabelId> c;
    while (c.size() < candidates) {
      const auto y = static_cast<LabelId>(rng.below(labels));
      if (std::find(c.begin(), c.end(), y) == c.end()) c.push_back(y);
    }
    std::sort(c.begin(), c.end());
    fx.lattice.candidates.push_back(c);
    std::vector<FeatureId> f;
    for (int k = 0; k < 20; ++k) f.push_back(static_cast<FeatureId>(rng.below(n_features)));
    fx.features.push_back(f);
  }
  return fx;
}

void BM_ForwardBackward(benchmark::State& state) {
  const auto fx = make_fixture(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), 15);
  for (auto _ : state) benchmark::DoNotOptimize(forward_backward(fx.weights, fx.lattice, fx.features));
}
BENCHMARK(BM_ForwardBackward)->Args({1, 30})->Args({2, 12})->Args({4, 3})->Args({4, 5});

void BM_Viterbi(benchmark::State& state) {
  const auto fx = make_fixture(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), 15);
  for (auto _ : state) benchmark::DoNotOptimize(viterbi(build_graph(fx.weights, fx.lattice, fx.features), fx.lattice));
}
BENCHMARK(BM_Viterbi)->Args({1, 30})->Args({4, 3});

const Corpus& bench_corpus() {
  static const Corpus c = synth_generate(make_rule("local_sub"), 500, 3);
  return c;
}

void BM_EmEStep(benchmark::State& state) {
  const auto& corpus = bench_corpus();
  const auto model = initial_alignment_model(corpus, 2, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(e_step(model, corpus));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus.size()));
}
BENCHMARK(BM_EmEStep)->Unit(benchmark::kMillisecond);

void BM_PcrfDecode(benchmark::State& state) {
  static const ModelStack stack = [] {
    const auto& corpus = bench_corpus();
    const auto aligned = align_corpus(em_train(corpus, EmConfig{}), corpus);
    TrainConfig cfg;
    cfg.orders = {1, 2, 3};
    cfg.epochs = 2;
    cfg.tau = 1e-3;
    cfg.top_k = 4;
    return sgd_train(aligned.aligned, aligned.label_alphabet, cfg, {2, 2});
  }();
  const auto& pairs = bench_corpus().pairs();
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(decode(stack, pairs[i++ % pairs.size()].source));
}
BENCHMARK(BM_PcrfDecode);

void BM_BeamSearch(benchmark::State& state) {
  static const GraphoneLM lm = [] {
    const auto& corpus = bench_corpus();
    const auto aligned = align_corpus(em_train(corpus, EmConfig{}), corpus);
    return GraphoneLM::train(build_graphones(aligned.aligned), 6);
  }();
  const auto& pairs = bench_corpus().pairs();
  std::size_t i = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(beam_search(lm, pairs[i++ % pairs.size()].source, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_BeamSearch)->Arg(1)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
