#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "vitcolor/colorspace.hpp"
#include "vitcolor/rng.hpp"

namespace {

// Full sRGB -> Lab -> sRGB round trip, reported as pixels per second.
void lab_round_trip(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  vitcolor::Rng rng(7);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(n) * 3);
  for (auto& v : px) v = static_cast<std::uint8_t>(rng.uniform_int(256));
  for (auto _ : state) {
    for (std::int64_t i = 0; i < n; ++i) {
      double L, a, b;
      vitcolor::srgb_to_lab_pixel(px[i * 3], px[i * 3 + 1], px[i * 3 + 2], L, a, b);
      std::uint8_t r2, g2, b2;
      vitcolor::lab_to_srgb_pixel(L, a, b, r2, g2, b2);
      benchmark::DoNotOptimize(r2);
    }
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(lab_round_trip)->Arg(1 << 14)->Unit(benchmark::kMicrosecond);

void srgb_to_lab_only(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  vitcolor::Rng rng(7);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(n) * 3);
  for (auto& v : px) v = static_cast<std::uint8_t>(rng.uniform_int(256));
  for (auto _ : state) {
    for (std::int64_t i = 0; i < n; ++i) {
      double L, a, b;
      vitcolor::srgb_to_lab_pixel(px[i * 3], px[i * 3 + 1], px[i * 3 + 2], L, a, b);
      benchmark::DoNotOptimize(L);
    }
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(srgb_to_lab_only)->Arg(1 << 14)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
