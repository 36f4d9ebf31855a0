#pragma once

#include "vitcolor/ops.hpp"

namespace vitcolor {

/// Scalar loss values for one training step, in the order they land in the
/// metrics stream.
template <typename T>
struct LossBreakdown {
  T l1 = 0;
  T adv_g = 0;
  T adv_d_real = 0;
  T adv_d_fake = 0;
  T total_g = 0;
  T total_d = 0;
};

template <typename T>
struct GeneratorLossParts {
  Var<T> total;  // adv + lambda * l1
  Var<T> adv;    // bce(fake logits, 1)
  Var<T> l1;     // mean |fake_ab - real_ab|
};

/// Generator objective: fool the critic while staying close to the real
/// chroma. The reconstruction term is a mean (not a sum), and lambda is
/// calibrated for that scaling.
template <typename T>
GeneratorLossParts<T> generator_loss(const Var<T>& fake_logits, const Var<T>& fake_ab,
                                     const Var<T>& real_ab, T lambda) {
  GeneratorLossParts<T> parts;
  parts.adv = bce_with_logits_mean(fake_logits, T(1));
  parts.l1 = l1_mean(fake_ab, real_ab);
  parts.total = add(parts.adv, mul_scalar(parts.l1, lambda));
  return parts;
}

template <typename T>
struct DiscriminatorLossParts {
  Var<T> total;      // (real + fake) / 2
  Var<T> real_term;  // bce(real logits, 1)
  Var<T> fake_term;  // bce(fake logits, 0)
};

/// Critic objective, halved so its gradient scale matches a single combined
/// batch pass.
template <typename T>
DiscriminatorLossParts<T> discriminator_loss(const Var<T>& real_logits,
                                             const Var<T>& fake_logits) {
  DiscriminatorLossParts<T> parts;
  parts.real_term = bce_with_logits_mean(real_logits, T(1));
  parts.fake_term = bce_with_logits_mean(fake_logits, T(0));
  parts.total = mul_scalar(add(parts.real_term, parts.fake_term), T(0.5));
  return parts;
}

}  // namespace vitcolor
