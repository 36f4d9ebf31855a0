#include <benchmark/benchmark.h>

#include "vitcolor/ops.hpp"
#include "vitcolor/rng.hpp"

namespace {

using vitcolor::Rng;
using vitcolor::Tensor;
using vitcolor::Var;
using vitcolor::make_var;

Tensor<float> random_tensor(std::vector<std::int64_t> shape, Rng& rng) {
  Tensor<float> t(std::move(shape));
  for (std::int64_t i = 0; i < t.numel(); ++i)
    t.data()[i] = static_cast<float>(rng.normal(0.0, 0.1));
  return t;
}

// Square conv at the channel/spatial shapes the encoder pyramid visits.
void conv2d_forward(benchmark::State& state) {
  const std::int64_t c = state.range(0), s = state.range(1);
  Rng rng(1);
  auto x = make_var(random_tensor({1, c, s, s}, rng));
  auto w = make_var(random_tensor({c, c, 5, 5}, rng));
  auto b = make_var(random_tensor({c}, rng));
  vitcolor::NoGradGuard ng;
  for (auto _ : state) {
    auto y = vitcolor::conv2d(x, w, b, 1, 2);
    benchmark::DoNotOptimize(y->value.data());
  }
  state.SetItemsProcessed(state.iterations() * c * c * 25 * s * s * 2);
}
BENCHMARK(conv2d_forward)
    ->Args({64, 32})
    ->Args({128, 16})
    ->Args({256, 8})
    ->Args({512, 8})
    ->Unit(benchmark::kMillisecond);

void conv2d_forward_backward(benchmark::State& state) {
  const std::int64_t c = state.range(0), s = state.range(1);
  Rng rng(1);
  auto x = make_var(random_tensor({1, c, s, s}, rng), true);
  auto w = make_var(random_tensor({c, c, 5, 5}, rng), true);
  auto b = make_var(random_tensor({c}, rng), true);
  for (auto _ : state) {
    x->grad = Tensor<float>();
    w->grad = Tensor<float>();
    b->grad = Tensor<float>();
    auto y = vitcolor::sum_all(vitcolor::conv2d(x, w, b, 1, 2));
    vitcolor::backward(y);
    benchmark::DoNotOptimize(w->grad.data());
  }
}
BENCHMARK(conv2d_forward_backward)->Args({128, 16})->Args({512, 8})->Unit(benchmark::kMillisecond);

// Decoder-style transposed conv (stride 1, size-preserving).
void conv_transpose2d_forward(benchmark::State& state) {
  const std::int64_t ci = state.range(0), s = state.range(1);
  Rng rng(1);
  auto x = make_var(random_tensor({1, ci, s, s}, rng));
  auto w = make_var(random_tensor({ci, ci / 2, 3, 3}, rng));
  auto b = make_var(random_tensor({ci / 2}, rng));
  vitcolor::NoGradGuard ng;
  for (auto _ : state) {
    auto y = vitcolor::conv_transpose2d(x, w, b, 1, 1);
    benchmark::DoNotOptimize(y->value.data());
  }
}
BENCHMARK(conv_transpose2d_forward)->Args({512, 16})->Args({128, 64})->Unit(benchmark::kMillisecond);

void upsample_then_pool(benchmark::State& state) {
  const std::int64_t c = state.range(0), s = state.range(1);
  Rng rng(1);
  auto x = make_var(random_tensor({1, c, s, s}, rng));
  vitcolor::NoGradGuard ng;
  for (auto _ : state) {
    auto up = vitcolor::upsample_nearest2(x);
    auto down = vitcolor::avg_pool2(up);
    benchmark::DoNotOptimize(down->value.data());
  }
}
BENCHMARK(upsample_then_pool)->Args({64, 64})->Args({256, 16})->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
