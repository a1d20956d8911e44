#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "qfsum/lstm.hpp"
#include "qfsum/random.hpp"
#include "qfsum/rl.hpp"
#include "qfsum/rouge.hpp"

namespace {

std::vector<std::string> random_tokens(qfsum::Rng& rng, std::size_t n, std::size_t vocab) {
  std::vector<std::string> t(n);
  for (auto& w : t) w = "w" + std::to_string(rng.below(vocab));
  return t;
}

void BM_RougeSu4(benchmark::State& state) {
  qfsum::Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cand = random_tokens(rng, n, 200), ref = random_tokens(rng, n, 200);
  for (auto _ : state) benchmark::DoNotOptimize(qfsum::rouge_su4(cand, ref));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RougeSu4)->Arg(30)->Arg(120)->Arg(480);

// Candidate bag against a precomputed reference, as in labeling and RL.
void BM_RougeSu4Bag(benchmark::State& state) {
  qfsum::Rng rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const qfsum::UnitBag ref(random_tokens(rng, n, 200));
  const auto cand = random_tokens(rng, n, 200);
  for (auto _ : state) benchmark::DoNotOptimize(qfsum::rouge_su4(qfsum::UnitBag(cand), ref));
}
BENCHMARK(BM_RougeSu4Bag)->Arg(30)->Arg(120);

qfsum::TokenMatrix random_matrix(qfsum::Rng& rng, std::size_t len, std::size_t dim) {
  qfsum::TokenMatrix m{qfsum::nn::Tensor({len, dim}), std::vector<std::uint8_t>(len, 1)};
  for (double& v : m.rows.values()) v = rng.uniform(-1, 1);
  return m;
}

void BM_BiLstmForward(benchmark::State& state) {
  qfsum::Rng rng(3);
  qfsum::nn::ParamSet params;
  qfsum::nn::init_bilstm(params, "r", 100, 100, rng);
  const auto seq = random_matrix(rng, static_cast<std::size_t>(state.range(0)), 100);
  for (auto _ : state) benchmark::DoNotOptimize(qfsum::nn::bilstm_reduce(seq, params, "r"));
}
BENCHMARK(BM_BiLstmForward)->Arg(10)->Arg(30);

void BM_BiLstmForwardBackward(benchmark::State& state) {
  qfsum::Rng rng(4);
  qfsum::nn::ParamSet params;
  qfsum::nn::init_bilstm(params, "r", 100, 100, rng);
  auto grads = params.zeros_like();
  const auto seq = random_matrix(rng, static_cast<std::size_t>(state.range(0)), 100);
  const std::vector<double> upstream(100, 0.01);
  for (auto _ : state) {
    qfsum::nn::BiLstmTrace trace;
    qfsum::nn::bilstm_reduce(seq, params, "r", &trace);
    qfsum::nn::bilstm_backward(seq, params, "r", trace, upstream, grads);
  }
}
BENCHMARK(BM_BiLstmForwardBackward)->Arg(10)->Arg(30);

void BM_PolicyForward(benchmark::State& state) {
  const auto params = qfsum::rl::init_policy(501, 200, 5);
  qfsum::Rng rng(5);
  std::vector<double> s(501);
  for (double& v : s) v = rng.uniform(-1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(qfsum::rl::policy_value(params, s));
}
BENCHMARK(BM_PolicyForward);

}  // namespace

BENCHMARK_MAIN();
