#ifndef QFSUM_OPTIM_HPP_
#define QFSUM_OPTIM_HPP_

#include "qfsum/params.hpp"

namespace qfsum::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  ParamSet first_moment;
  ParamSet second_moment;
  long step = 0;

  static AdamState for_params(const ParamSet& params);
};

// Bias-corrected Adam update. Throws ShapeError when grads do not mirror
// params.
void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state,
               const AdamConfig& config);

// Rescales grads so their global L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_grad_norm(ParamSet& grads, double max_norm);

}  // namespace qfsum::nn

#endif  // QFSUM_OPTIM_HPP_
