#ifndef QFSUM_OPS_HPP_
#define QFSUM_OPS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "qfsum/random.hpp"
#include "qfsum/tensor.hpp"

namespace qfsum::nn {

inline constexpr double kBceEpsilon = 1e-7;

// ---- dense -----------------------------------------------------------------
//
// Weights are stored input-major (in x out): y[j] = b[j] + sum_i x[i] w[i][j].

// Single-row kernels used by the model code.
void affine(std::span<const double> x, const Tensor& w, std::span<const double> b,
            std::span<double> y);
// Accumulates into dw/db; dx is overwritten unless empty.
void affine_backward(std::span<const double> x, const Tensor& w,
                     std::span<const double> dy, std::span<double> dx,
                     Tensor& dw, std::span<double> db);

// Batch form: input is (batch x in) or a rank-1 vector of length in.
Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias);

struct DenseGrad {
  Tensor input;
  Tensor weights;
  Tensor bias;
};
DenseGrad dense_backward(const Tensor& input, const Tensor& weights,
                         const Tensor& upstream);

// ---- activations -----------------------------------------------------------

double sigmoid(double x);

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& upstream);
Tensor sigmoid(const Tensor& x);
Tensor sigmoid_backward(const Tensor& x, const Tensor& upstream);
Tensor tanh(const Tensor& x);
Tensor tanh_backward(const Tensor& x, const Tensor& upstream);

std::vector<double> softmax(std::span<const double> logits);
// Vector-Jacobian product of softmax given its output.
std::vector<double> softmax_backward(std::span<const double> probs,
                                     std::span<const double> upstream);

// ---- losses ----------------------------------------------------------------

struct ScalarLoss {
  double value = 0.0;
  double grad = 0.0;  // d value / d prediction
};

// Binary cross-entropy; the prediction is clamped to [eps, 1 - eps].
ScalarLoss bce(double prediction, double label);
ScalarLoss mse(double prediction, double target);

struct VectorLoss {
  double value = 0.0;
  std::vector<double> grad;
};

// Mean over the batch; grad is per element of `predictions`.
VectorLoss bce(std::span<const double> predictions, std::span<const double> labels);
VectorLoss mse(std::span<const double> predictions, std::span<const double> targets);

// Softmax cross-entropy on raw logits; grad is with respect to the logits.
VectorLoss ce_softmax(std::span<const double> logits, int target_class);

// ---- dropout ---------------------------------------------------------------

// Inverted dropout. `scale` holds the per-element multiplier (0 or
// 1/(1-rate)), which is also the backward factor.
struct DropoutResult {
  std::vector<double> output;
  std::vector<double> scale;
};
DropoutResult dropout(std::span<const double> input, double rate, Rng& rng,
                      bool train);
Tensor dropout(const Tensor& input, double rate, Rng& rng, bool train);

}  // namespace qfsum::nn

#endif  // QFSUM_OPS_HPP_
