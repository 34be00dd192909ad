#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "t2t/tensor.hpp"

namespace t2t::autodiff {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;  // global-norm clip applied before the update
};

struct OptimizerState {
  AdamConfig config;
  std::int64_t step = 0;
  std::vector<Tensor> m;  // first moments, shaped like the parameters
  std::vector<Tensor> v;  // second moments

  OptimizerState() = default;
  OptimizerState(AdamConfig cfg, const std::vector<Tensor*>& params);
};

// One optimizer step: scale all gradients by clip_norm/norm when their
// global L2 norm exceeds clip_norm, then the bias-corrected
// adaptive-moment update. Empty gradient slots count as zeros.
// Throws ShapeMismatch on misaligned shapes, NonFiniteValue on bad input.
void adam_step(const std::vector<Tensor*>& params, std::vector<Tensor>& grads,
               OptimizerState& state);

// Computes the loss with the current parameter values; when grads is
// non-null, also accumulates dLoss/dparam into it (slots indexed like
// `params`, allocated on demand).
using LossBuilder = std::function<double(std::vector<Tensor>* grads)>;

// Central finite differences against the builder's own gradients, over
// every scalar parameter. Returns the maximum relative error
// |a - n| / max(1e-8, |a| + |n|). Parameters are restored afterwards.
double grad_check(const LossBuilder& builder,
                  const std::vector<Tensor*>& params, double eps = 1e-5);

}  // namespace t2t::autodiff
