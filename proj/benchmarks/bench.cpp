#include <benchmark/benchmark.h>

#include "dualseq/autodiff/graph.hpp"
#include "dualseq/data/vocab.hpp"
#include "dualseq/eval/bleu.hpp"
#include "dualseq/model/trainer.hpp"
#include "dualseq/nn/layers.hpp"

namespace {

using namespace dualseq;

ad::Tensor random_tensor(std::size_t rows, std::size_t cols, Rng& rng) {
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return ad::Tensor({rows, cols}, std::move(v));
}

void BM_MatMul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto a = random_tensor(64, n, rng), b = random_tensor(n, n, rng);
  for (auto _ : state) {
    ad::Graph g;
    benchmark::DoNotOptimize(ad::matmul(g.constant(a), g.constant(b)).value()[0]);
  }
  state.SetItemsProcessed(state.iterations() * 64 * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_MatMul)->Arg(64)->Arg(128)->Arg(512);

void BM_GruStepForwardBackward(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  nn::GruLayer layer("gru", 64, hidden);
  nn::init_gru(layer, 0.08, rng);
  const auto h = random_tensor(64, hidden, rng), x = random_tensor(64, 64, rng);
  for (auto _ : state) {
    ad::Graph g;
    const auto vars = nn::bind(g, layer, true);
    const auto out = nn::gru_step(vars, g.constant(h), g.constant(x));
    g.backward(ad::sum_squared_diff(out, g.constant(h)));
  }
}
BENCHMARK(BM_GruStepForwardBackward)->Arg(64)->Arg(512);

void BM_TrainStep(benchmark::State& state) {
  const nn::ModelDims dims{64, 2, 64, 2000};
  model::DualModel m(dims, 3);
  Rng rng(4);
  std::vector<data::DialogExample> batch(64);
  for (auto& ex : batch) {
    ex.src.resize(10);
    ex.tgt.resize(10);
    for (auto& t : ex.src) t = static_cast<ad::TokenId>(4 + rng.below(1996));
    for (auto& t : ex.tgt) t = static_cast<ad::TokenId>(4 + rng.below(1996));
    ex.tgt.back() = data::kEos;
  }
  model::Trainer trainer(m, model::Objective::Phase1, {});
  for (auto _ : state) benchmark::DoNotOptimize(trainer.step(batch).loss);
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

void BM_SentenceBleu(benchmark::State& state) {
  Rng rng(5);
  std::vector<std::pair<eval::Tokens, eval::Tokens>> pairs(200);
  for (auto& [c, r] : pairs) {
    c.resize(1 + rng.below(15));
    r.resize(1 + rng.below(15));
    for (auto& w : c) w = "w" + std::to_string(rng.below(20));
    for (auto& w : r) w = "w" + std::to_string(rng.below(20));
  }
  for (auto _ : state) benchmark::DoNotOptimize(eval::bleu_corpus(pairs));
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_SentenceBleu);

}  // namespace

BENCHMARK_MAIN();
