#include <benchmark/benchmark.h>

#include <vector>

#include "dementia/fusion/fusion.hpp"
#include "dementia/game/engine.hpp"
#include "dementia/health/preprocess.hpp"
#include "dementia/health/record.hpp"
#include "dementia/metrics/metrics.hpp"
#include "dementia/models/architectures.hpp"
#include "dementia/models/training.hpp"
#include "dementia/nn/adam.hpp"
#include "dementia/nn/loss.hpp"

using namespace dementia;

namespace {

nn::Tensor random_tensor(nn::Shape shape, std::uint64_t seed) {
  nn::Rng rng(seed);
  nn::Tensor t(std::move(shape));
  for (float& v : t.data()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

nn::Tensor alternating_targets(std::size_t n, std::size_t units) {
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 2);
  return models::make_targets(labels, units);
}

// One forward, BCE, backward and Adam update.
void train_step(nn::Model& model, nn::Adam<float>& opt, const nn::Tensor& x, const nn::Tensor& y, nn::Rng& rng) {
  const nn::Tensor out = model.forward(x, true, rng);
  const auto loss = nn::bce_loss(out, y);
  model.zero_grad();
  model.backward(loss.gradient);
  opt.step(model.parameters());
}

void BM_Mod1DTrainStep(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  nn::Model model = models::build_mod1d(1);
  nn::Adam<float> opt({}, model.parameters());
  const nn::Tensor x = random_tensor({batch, 6, 1}, 2), y = alternating_targets(batch, 2);
  nn::Rng rng(3);
  for (auto _ : state) train_step(model, opt, x, y, rng);
  state.SetItemsProcessed(state.iterations() * static_cast<long>(batch));
}
BENCHMARK(BM_Mod1DTrainStep)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_Mod2DTrainStep(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  nn::Model model = models::build_mod2d(1, side);
  nn::Adam<float> opt({.learning_rate = 1e-4}, model.parameters());
  const nn::Tensor x = random_tensor({4, side, side, 3}, 2), y = alternating_targets(4, 1);
  nn::Rng rng(3);
  for (auto _ : state) train_step(model, opt, x, y, rng);
  state.SetItemsProcessed(state.iterations() * 4);
}
BENCHMARK(BM_Mod2DTrainStep)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Mod2DPredict(benchmark::State& state) {
  const nn::Model model = models::build_mod2d(1);
  const nn::Tensor x = random_tensor({1, 224, 224, 3}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(x));
}
BENCHMARK(BM_Mod2DPredict)->Unit(benchmark::kMillisecond);

void BM_Conv2DForwardBackward(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  nn::Model model({side, side, 32}, {nn::LayerSpec::conv2d(3, 3, 64, nn::Activation::ReLU)}, 1);
  const nn::Tensor x = random_tensor({1, side, side, 32}, 2);
  nn::Tensor upstream = random_tensor({1, side - 2, side - 2, 64}, 3);
  nn::Rng rng(4);
  for (auto _ : state) {
    model.forward(x, true, rng);
    model.backward(upstream);
  }
}
BENCHMARK(BM_Conv2DForwardBackward)->Arg(56)->Arg(111)->Unit(benchmark::kMillisecond);

void BM_PrepareHealthData(benchmark::State& state) {
  const auto records = health::synthesize_health_records(static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(health::prepare_health_data(records, 5));
}
BENCHMARK(BM_PrepareHealthData)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Roc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  nn::Rng rng(6);
  std::vector<double> scores(n);
  std::vector<int> truth(n);
  for (std::size_t i = 0; i < n; ++i) {
    truth[i] = static_cast<int>(i % 2);
    scores[i] = rng.uniform() + 0.2 * truth[i];
  }
  for (auto _ : state) benchmark::DoNotOptimize(metrics::roc(scores, truth));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}
BENCHMARK(BM_Roc)->Arg(1000)->Arg(100000);

void BM_Fuse(benchmark::State& state) {
  int i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fusion::fuse({i & 1, (i >> 1) & 1}));
    ++i;
  }
}
BENCHMARK(BM_Fuse);

// A full Level 1 run: memorization tick then flips until the threshold.
void BM_GameLevel1(benchmark::State& state) {
  const game::GameConfig config;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    game::GameSession s = game::create_session(config, 1, ++seed, 0);
    game::apply_event(s, game::GameEvent::tick(config.level1.show_ms));
    for (std::size_t i = 0; s.phase == game::Phase::Playing; ++i)
      game::apply_event(s, game::GameEvent::flip(i % s.cards.size()));
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_GameLevel1)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
