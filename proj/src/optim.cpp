#include "t2t/optim.hpp"

#include <cmath>

#include "t2t/errors.hpp"

namespace t2t::autodiff {

OptimizerState::OptimizerState(AdamConfig cfg,
                               const std::vector<Tensor*>& params)
    : config(cfg) {
  m.reserve(params.size());
  v.reserve(params.size());
  for (const Tensor* p : params) {
    m.emplace_back(p->rows, p->cols);
    v.emplace_back(p->rows, p->cols);
  }
}

void adam_step(const std::vector<Tensor*>& params, std::vector<Tensor>& grads,
               OptimizerState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw ShapeMismatch("optimizer state does not match the parameter list");

  double sq = 0;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].size() == 0) continue;  // never touched: zero gradient
    if (!grads[i].same_shape(*params[i]))
      throw ShapeMismatch("gradient " + std::to_string(i) + " has shape " +
                          shape_string(grads[i]) + ", parameter has " +
                          shape_string(*params[i]));
    require_finite(grads[i], "gradient");
    for (double g : grads[i].data) sq += g * g;
  }
  double norm = std::sqrt(sq);
  double shrink = (state.config.clip_norm > 0 && norm > state.config.clip_norm)
                      ? state.config.clip_norm / norm
                      : 1.0;

  state.step += 1;
  double bc1 = 1.0 - std::pow(state.config.beta1, double(state.step));
  double bc2 = 1.0 - std::pow(state.config.beta2, double(state.step));

  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    if (!m.same_shape(p))
      throw ShapeMismatch("moment " + std::to_string(i) +
                          " does not match its parameter");
    bool empty = grads[i].size() == 0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      double g = empty ? 0.0 : grads[i].data[k] * shrink;
      m.data[k] = state.config.beta1 * m.data[k] +
                  (1.0 - state.config.beta1) * g;
      v.data[k] = state.config.beta2 * v.data[k] +
                  (1.0 - state.config.beta2) * g * g;
      double mhat = m.data[k] / bc1;
      double vhat = v.data[k] / bc2;
      p.data[k] -= state.config.learning_rate * mhat /
                   (std::sqrt(vhat) + state.config.epsilon);
    }
    require_finite(p, "updated parameter");
  }
}

double grad_check(const LossBuilder& builder,
                  const std::vector<Tensor*>& params, double eps) {
  std::vector<Tensor> analytic(params.size());
  builder(&analytic);

  double worst = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      double saved = p.data[k];
      p.data[k] = saved + eps;
      double up = builder(nullptr);
      p.data[k] = saved - eps;
      double down = builder(nullptr);
      p.data[k] = saved;
      double numeric = (up - down) / (2.0 * eps);
      double a = analytic[i].size() == 0 ? 0.0 : analytic[i].data[k];
      double err = std::abs(a - numeric) /
                   std::max(1e-8, std::abs(a) + std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace t2t::autodiff
