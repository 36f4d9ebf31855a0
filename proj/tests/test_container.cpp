#include "vitcolor/container.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "vitcolor/nn.hpp"

using namespace vitcolor;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const char* name) {
  auto dir = fs::temp_directory_path() / "vitcolor_container_test";
  fs::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("fnv1a64 matches published vectors") {
  CHECK(fnv1a64("", 0) == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("abc", 3) == 0xe71fa2190541574bULL);
  const auto path = temp_path("hashme.bin");
  std::ofstream(path, std::ios::binary) << "abc";
  CHECK(fnv1a64_file(path) == 0xe71fa2190541574bULL);
}

TEST_CASE("raw entries round-trip bitwise") {
  Rng rng(9);
  Tensor<float> a({3, 4});
  for (std::int64_t i = 0; i < a.numel(); ++i) a.data()[i] = static_cast<float>(rng.normal());
  Tensor<double> b({2, 2, 2});
  for (std::int64_t i = 0; i < b.numel(); ++i) b.data()[i] = rng.normal();

  const auto path = temp_path("pair.vcp");
  write_entries(path, {to_entry("a", a), to_entry("b", b)});
  auto entries = read_entries(path);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].name == "a");
  CHECK(entries[1].name == "b");
  Tensor<float> a2 = from_entry<float>(entries[0]);
  Tensor<double> b2 = from_entry<double>(entries[1]);
  REQUIRE(a2.same_shape(a));
  for (std::int64_t i = 0; i < a.numel(); ++i) CHECK(a2.data()[i] == a.data()[i]);
  for (std::int64_t i = 0; i < b.numel(); ++i) CHECK(b2.data()[i] == b.data()[i]);
  CHECK_THROWS_AS(from_entry<double>(entries[0]), std::runtime_error);
}

TEST_CASE("corrupt containers are rejected") {
  const auto bad_magic = temp_path("bad_magic.vcp");
  std::ofstream(bad_magic, std::ios::binary) << "NOPE1234567890";
  CHECK_THROWS_AS(read_entries(bad_magic), std::runtime_error);

  const auto good = temp_path("good.vcp");
  Tensor<float> t({8}, 1.f);
  write_entries(good, {to_entry("t", t)});

  // Flip the version field (bytes 4..7 after the magic).
  const auto bad_version = temp_path("bad_version.vcp");
  {
    std::ifstream in(good, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    bytes[4] = 99;
    std::ofstream out(bad_version, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  CHECK_THROWS_AS(read_entries(bad_version), std::runtime_error);

  const auto truncated = temp_path("trunc.vcp");
  {
    std::ifstream in(good, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    std::ofstream out(truncated, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 6));
  }
  CHECK_THROWS_AS(read_entries(truncated), std::runtime_error);

  CHECK_THROWS_AS(read_entries(temp_path("missing.vcp")), std::runtime_error);
}

TEST_CASE("param stores save and load strictly") {
  Rng rng(10);
  Conv2dLayer<float> conv(2, 3, 3, 1, 1, rng);
  BatchNorm2dLayer<float> bn(3);
  bn.running_mean.data()[0] = 0.25f;
  ParamStore<float> store;
  conv.collect(store, "conv");
  bn.collect(store, "bn");
  CHECK(store.param_count() == 3 * 2 * 3 * 3 + 3 + 3 + 3);

  const auto path = temp_path("model.vcp");
  save_params(path, store);

  Rng rng2(99);
  Conv2dLayer<float> conv2(2, 3, 3, 1, 1, rng2);
  BatchNorm2dLayer<float> bn2(3);
  ParamStore<float> store2;
  conv2.collect(store2, "conv");
  bn2.collect(store2, "bn");
  load_params(path, store2);
  for (std::int64_t i = 0; i < conv.w->value.numel(); ++i)
    CHECK(conv2.w->value.data()[i] == conv.w->value.data()[i]);
  CHECK(bn2.running_mean.data()[0] == 0.25f);

  // A store with a different layout must be rejected.
  ParamStore<float> wrong_names;
  conv2.collect(wrong_names, "other");
  bn2.collect(wrong_names, "bn");
  CHECK_THROWS_AS(load_params(path, wrong_names), std::runtime_error);

  ParamStore<float> wrong_count;
  conv2.collect(wrong_count, "conv");
  CHECK_THROWS_AS(load_params(path, wrong_count), std::runtime_error);

  Rng rng3(5);
  Conv2dLayer<float> conv_big(2, 4, 3, 1, 1, rng3);
  BatchNorm2dLayer<float> bn_big(4);
  ParamStore<float> wrong_shape;
  conv_big.collect(wrong_shape, "conv");
  bn_big.collect(wrong_shape, "bn");
  CHECK_THROWS_AS(load_params(path, wrong_shape), std::runtime_error);
}

TEST_CASE("duplicate registration is a logic error") {
  Rng rng(11);
  Conv2dLayer<float> conv(1, 1, 1, 1, 0, rng);
  ParamStore<float> store;
  conv.collect(store, "c");
  CHECK_THROWS_AS(conv.collect(store, "c"), std::logic_error);
}

TEST_CASE("zero_grad clears accumulated gradients") {
  Rng rng(12);
  LinearLayer<float> lin(3, 2, rng);
  ParamStore<float> store;
  lin.collect(store, "lin");
  auto x = make_var(Tensor<float>({1, 3}, 1.f));
  backward(mean_all(lin.forward(x)));
  REQUIRE(lin.w->grad.defined());
  bool any = false;
  for (std::int64_t i = 0; i < lin.w->grad.numel(); ++i)
    if (lin.w->grad.data()[i] != 0.f) any = true;
  CHECK(any);
  store.zero_grad();
  for (std::int64_t i = 0; i < lin.w->grad.numel(); ++i) CHECK(lin.w->grad.data()[i] == 0.f);
}
