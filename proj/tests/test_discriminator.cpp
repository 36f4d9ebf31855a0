#include "vitcolor/discriminator.hpp"

#include "doctest.h"

using namespace vitcolor;

namespace {

VitConfig reduced_config() {
  VitConfig cfg;
  cfg.image_size = 64;
  cfg.patch_size = 16;
  cfg.depth = 2;
  cfg.heads = 4;
  cfg.mlp_dim = 64;
  cfg.token_dim = 32;
  return cfg;
}

Tensor<float> random_lab(std::int64_t n, std::int64_t size, Rng& rng) {
  Tensor<float> t({n, 3, size, size});
  for (std::int64_t i = 0; i < t.numel(); ++i)
    t.data()[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

// Closed-form parameter count for the transformer, written out term by term so
// the model's own bookkeeping is checked against arithmetic, not against itself.
std::int64_t expected_param_count(const VitConfig& cfg) {
  const std::int64_t d = cfg.token_dim;
  const std::int64_t patch_dim = cfg.in_channels * cfg.patch_size * cfg.patch_size;
  const std::int64_t tokens = cfg.tokens();
  std::int64_t total = 0;
  total += patch_dim * d + d;  // patch embedding
  total += tokens * d;         // positional table
  total += d;                  // class token
  const std::int64_t attn = 2 * d                  // pre-attention norm
                            + 3 * (d * d + d)      // q, k, v projections
                            + (d * d + d);         // output projection
  const std::int64_t ff = 2 * d                            // pre-feedforward norm
                          + d * cfg.mlp_dim + cfg.mlp_dim  // expansion
                          + cfg.mlp_dim * d + d;           // contraction
  total += cfg.depth * (attn + ff);
  total += 2 * d;     // final norm
  total += d + 1;     // scalar head
  return total;
}

}  // namespace

TEST_CASE("full-size parameter count matches the published total") {
  VitConfig cfg;  // defaults are the full 256/32 model
  CHECK(expected_param_count(cfg) == 53616641);
  Rng rng(31);
  VitDiscriminator<float> disc(cfg, rng);
  ParamStore<float> store;
  disc.collect(store);
  CHECK(store.param_count() == 53616641);
}

TEST_CASE("token count and logit shape") {
  VitConfig cfg = reduced_config();
  CHECK(cfg.patches() == 16);
  CHECK(cfg.tokens() == 17);
  Rng rng(32);
  VitDiscriminator<float> disc(cfg, rng);
  ParamStore<float> store;
  disc.collect(store);
  CHECK(store.param_count() == expected_param_count(cfg));
  auto lab = make_var(random_lab(3, 64, rng));
  VitDiscriminator<float>::Trace trace;
  NoGradGuard ng;
  Rng fwd_rng(1);
  auto logits = disc.forward(lab, false, fwd_rng, &trace);
  CHECK(trace.tokens == Shape{3, 17, 32});
  CHECK(logits->value.shape() == Shape{3, 1});
  CHECK(logits->value.all_finite());
}

TEST_CASE("config validation") {
  VitConfig cfg = reduced_config();
  cfg.patch_size = 15;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = reduced_config();
  cfg.token_dim = 30;  // not divisible by heads
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = reduced_config();
  cfg.dropout = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_NOTHROW(reduced_config().validate());
}

TEST_CASE("bad input shapes are rejected") {
  Rng rng(33);
  VitDiscriminator<float> disc(reduced_config(), rng);
  Rng fwd_rng(1);
  auto two_channels = make_var(Tensor<float>({1, 2, 64, 64}, 0.f));
  CHECK_THROWS_AS(disc.forward(two_channels, false, fwd_rng), std::invalid_argument);
  auto wrong_size = make_var(Tensor<float>({1, 3, 32, 32}, 0.f));
  CHECK_THROWS_AS(disc.forward(wrong_size, false, fwd_rng), std::invalid_argument);
}

TEST_CASE("eval is deterministic, training dropout is not a no-op") {
  Rng rng(34);
  VitDiscriminator<float> disc(reduced_config(), rng);
  auto lab = make_var(random_lab(2, 64, rng));
  NoGradGuard ng;
  Rng r1(5), r2(5), r3(6);
  auto a = disc.forward(lab, false, r1)->value;
  auto b = disc.forward(lab, false, r2)->value;
  for (std::int64_t i = 0; i < a.numel(); ++i) CHECK(a.data()[i] == b.data()[i]);
  auto c = disc.forward(lab, true, r3)->value;
  bool differs = false;
  for (std::int64_t i = 0; i < a.numel(); ++i)
    if (a.data()[i] != c.data()[i]) differs = true;
  CHECK(differs);
}

TEST_CASE("gradients reach every parameter") {
  Rng rng(35);
  VitDiscriminator<float> disc(reduced_config(), rng);
  ParamStore<float> store;
  disc.collect(store);
  auto lab = make_var(random_lab(2, 64, rng));
  Rng fwd_rng(9);
  auto logits = disc.forward(lab, true, fwd_rng);
  backward(bce_with_logits_mean(logits, 1.0f));
  for (const auto& [name, p] : store.params()) {
    REQUIRE_MESSAGE(p->grad.defined(), name);
    bool nonzero = false;
    for (std::int64_t i = 0; i < p->grad.numel(); ++i)
      if (p->grad.data()[i] != 0.f) nonzero = true;
    CHECK_MESSAGE(nonzero, name);
  }
}
