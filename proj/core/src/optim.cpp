#include "qfsum/optim.hpp"

#include <cmath>

#include "qfsum/error.hpp"

namespace qfsum::nn {

AdamState AdamState::for_params(const ParamSet& params) {
  return {params.zeros_like(), params.zeros_like(), 0};
}

void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state,
               const AdamConfig& config) {
  if (grads.tensors().size() != params.tensors().size() ||
      state.first_moment.tensors().size() != params.tensors().size()) {
    throw ShapeError("adam_step: gradient/state sets do not mirror parameters");
  }
  ++state.step;
  const double step = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, step);
  const double c2 = 1.0 - std::pow(config.beta2, step);
  for (const auto& [name, p_const] : params.tensors()) {
    Tensor& p = params.at(name);
    const Tensor& g = grads.at(name);
    Tensor& m = state.first_moment.at(name);
    Tensor& v = state.second_moment.at(name);
    if (g.shape() != p.shape() || m.shape() != p.shape()) {
      throw ShapeError("adam_step: shape mismatch for '" + name + "': " +
                       p.shape_string() + " vs " + g.shape_string());
    }
    auto pd = p.data();
    auto gd = g.data();
    auto md = m.data();
    auto vd = v.data();
    for (std::size_t i = 0; i < pd.size(); ++i) {
      md[i] = config.beta1 * md[i] + (1.0 - config.beta1) * gd[i];
      vd[i] = config.beta2 * vd[i] + (1.0 - config.beta2) * gd[i] * gd[i];
      const double mhat = md[i] / c1;
      const double vhat = vd[i] / c2;
      pd[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
    }
  }
}

double clip_grad_norm(ParamSet& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (max_norm > 0.0 && norm > max_norm) grads.scale(max_norm / (norm + 1e-12));
  return norm;
}

}  // namespace qfsum::nn
