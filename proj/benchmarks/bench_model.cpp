#include <benchmark/benchmark.h>

#include "vitcolor/discriminator.hpp"
#include "vitcolor/generator.hpp"
#include "vitcolor/losses.hpp"
#include "vitcolor/rng.hpp"

namespace {

using vitcolor::Rng;
using vitcolor::Tensor;
using vitcolor::make_var;

Tensor<float> random_tensor(std::vector<std::int64_t> shape, Rng& rng) {
  Tensor<float> t(std::move(shape));
  for (std::int64_t i = 0; i < t.numel(); ++i)
    t.data()[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

// Production-size colourisation forward: one 256x256 L plane to ab.
void generator_forward_256(benchmark::State& state) {
  vitcolor::GeneratorConfig cfg;
  Rng init(11);
  vitcolor::Generator<float> gen(cfg, init);
  Rng fill(12);
  auto l = make_var(random_tensor({1, 1, 256, 256}, fill));
  Tensor<float> emb = random_tensor({1, cfg.embedding_dim}, fill);
  vitcolor::NoGradGuard ng;
  for (auto _ : state) {
    auto ab = gen.forward(l, emb, false);
    benchmark::DoNotOptimize(ab->value.data());
  }
}
BENCHMARK(generator_forward_256)->Unit(benchmark::kMillisecond);

void discriminator_forward_256(benchmark::State& state) {
  vitcolor::VitConfig cfg;
  Rng init(11);
  vitcolor::VitDiscriminator<float> disc(cfg, init);
  Rng fill(12);
  auto lab = make_var(random_tensor({1, 3, 256, 256}, fill));
  Rng drop(13);
  vitcolor::NoGradGuard ng;
  for (auto _ : state) {
    auto logits = disc.forward(lab, false, drop);
    benchmark::DoNotOptimize(logits->value.data());
  }
}
BENCHMARK(discriminator_forward_256)->Unit(benchmark::kMillisecond);

// Reduced-config generator training iteration: forward, loss, backward.
void generator_train_iteration_64(benchmark::State& state) {
  vitcolor::GeneratorConfig cfg;
  cfg.image_size = 64;
  cfg.channel_div = 8;
  Rng init(11);
  vitcolor::Generator<float> gen(cfg, init);
  vitcolor::ParamStore<float> store;
  gen.collect(store);
  Rng fill(12);
  auto l = make_var(random_tensor({2, 1, 64, 64}, fill));
  auto real_ab = make_var(random_tensor({2, 2, 64, 64}, fill));
  Tensor<float> emb = random_tensor({2, cfg.embedding_dim}, fill);
  for (auto _ : state) {
    store.zero_grad();
    auto fake = gen.forward(l, emb, true);
    auto loss = vitcolor::l1_mean(fake, real_ab);
    vitcolor::backward(loss);
    benchmark::DoNotOptimize(loss->value.data());
  }
}
BENCHMARK(generator_train_iteration_64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
