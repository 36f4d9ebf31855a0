#include <benchmark/benchmark.h>

#include "vitcolor/fid.hpp"
#include "vitcolor/rng.hpp"

namespace {

using vitcolor::Tensor;

Tensor<double> spd_matrix(std::int64_t d, vitcolor::Rng& rng) {
  Tensor<double> base({d, d});
  for (std::int64_t i = 0; i < base.numel(); ++i) base.data()[i] = rng.normal();
  Tensor<double> m({d, d});
  for (std::int64_t i = 0; i < d; ++i)
    for (std::int64_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::int64_t k = 0; k < d; ++k)
        acc += base.data()[i * d + k] * base.data()[j * d + k];
      m.data()[i * d + j] = acc / static_cast<double>(d) + (i == j ? 0.05 : 0.0);
    }
  return m;
}

void sqrtm(benchmark::State& state) {
  const std::int64_t d = state.range(0);
  vitcolor::Rng rng(3);
  const Tensor<double> m = spd_matrix(d, rng);
  for (auto _ : state) {
    Tensor<double> r = vitcolor::sqrtm_psd(m);
    benchmark::DoNotOptimize(r.data());
  }
}
BENCHMARK(sqrtm)->Arg(64)->Arg(256)->Arg(1000)->Unit(benchmark::kMillisecond);

// Streaming mean/covariance update at the production embedding width.
void accumulator_add(benchmark::State& state) {
  const std::int64_t d = state.range(0);
  vitcolor::Rng rng(3);
  std::vector<double> v(static_cast<std::size_t>(d));
  for (auto& x : v) x = rng.normal();
  vitcolor::FidAccumulator acc(d);
  for (auto _ : state) {
    acc.add_vector(v.data());
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(accumulator_add)->Arg(1000)->Unit(benchmark::kMicrosecond);

void fid_full(benchmark::State& state) {
  const std::int64_t d = state.range(0);
  vitcolor::Rng rng(5);
  vitcolor::FidAccumulator a(d), b(d);
  std::vector<double> v(static_cast<std::size_t>(d));
  for (int n = 0; n < 64; ++n) {
    for (auto& x : v) x = rng.normal();
    a.add_vector(v.data());
    for (auto& x : v) x = rng.normal(0.1, 1.1);
    b.add_vector(v.data());
  }
  const vitcolor::FidStats sa = a.finalize(), sb = b.finalize();
  for (auto _ : state) {
    double f = vitcolor::fid(sa, sb);
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(fid_full)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
