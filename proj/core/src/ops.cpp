#include "qfsum/ops.hpp"

#include <algorithm>
#include <cmath>

#include "qfsum/error.hpp"

namespace qfsum::nn {

void affine(std::span<const double> x, const Tensor& w, std::span<const double> b,
            std::span<double> y) {
  const std::size_t in = w.rows();
  const std::size_t out = w.cols();
  if (x.size() != in || y.size() != out || (!b.empty() && b.size() != out)) {
    throw ShapeError("affine: input " + std::to_string(x.size()) +
                     " vs weights " + w.shape_string());
  }
  if (b.empty()) {
    std::fill(y.begin(), y.end(), 0.0);
  } else {
    std::copy(b.begin(), b.end(), y.begin());
  }
  const double* wp = w.data().data();
  double* yp = y.data();
  for (std::size_t i = 0; i < in; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = wp + i * out;
    for (std::size_t j = 0; j < out; ++j) yp[j] += xi * row[j];
  }
}

void affine_backward(std::span<const double> x, const Tensor& w,
                     std::span<const double> dy, std::span<double> dx,
                     Tensor& dw, std::span<double> db) {
  const std::size_t in = w.rows();
  const std::size_t out = w.cols();
  const double* wp = w.data().data();
  double* dwp = dw.data().data();
  const double* dyp = dy.data();
  for (std::size_t i = 0; i < in; ++i) {
    const double* row = wp + i * out;
    if (!dx.empty()) {
      double acc = 0.0;
      for (std::size_t j = 0; j < out; ++j) acc += row[j] * dyp[j];
      dx[i] = acc;
    }
    const double xi = x[i];
    if (xi == 0.0) continue;
    double* drow = dwp + i * out;
    for (std::size_t j = 0; j < out; ++j) drow[j] += xi * dyp[j];
  }
  if (!db.empty()) {
    for (std::size_t j = 0; j < out; ++j) db[j] += dyp[j];
  }
}

namespace {

void check_dense_shapes(const Tensor& input, const Tensor& weights,
                        const Tensor& bias) {
  if (weights.rank() != 2 || input.cols() != weights.rows() ||
      bias.size() != weights.cols()) {
    throw ShapeError("dense: input " + input.shape_string() + " vs weights " +
                     weights.shape_string() + " and bias " + bias.shape_string());
  }
}

std::size_t batch_rows(const Tensor& t) { return t.rank() >= 2 ? t.rows() : 1; }

}  // namespace

Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  check_dense_shapes(input, weights, bias);
  const std::size_t batch = batch_rows(input);
  Tensor out = input.rank() >= 2 ? Tensor({batch, weights.cols()})
                                 : Tensor({weights.cols()});
  for (std::size_t r = 0; r < batch; ++r) {
    affine(input.row(r), weights, bias.data(), out.row(r));
  }
  return out;
}

DenseGrad dense_backward(const Tensor& input, const Tensor& weights,
                         const Tensor& upstream) {
  const std::size_t batch = batch_rows(input);
  if (upstream.cols() != weights.cols() || batch_rows(upstream) != batch ||
      input.cols() != weights.rows()) {
    throw ShapeError("dense_backward: upstream " + upstream.shape_string() +
                     " vs weights " + weights.shape_string());
  }
  DenseGrad g{Tensor(input.shape()), Tensor(weights.shape()),
              Tensor({weights.cols()})};
  for (std::size_t r = 0; r < batch; ++r) {
    affine_backward(input.row(r), weights, upstream.row(r), g.input.row(r),
                    g.weights, g.bias.data());
  }
  return g;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

template <typename F>
Tensor map(const Tensor& x, F f) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return out;
}

template <typename F>
Tensor map_backward(const Tensor& x, const Tensor& upstream, F local_grad) {
  if (x.shape() != upstream.shape()) {
    throw ShapeError("activation backward: " + x.shape_string() + " vs " +
                     upstream.shape_string());
  }
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = upstream[i] * local_grad(x[i]);
  return out;
}

}  // namespace

Tensor relu(const Tensor& x) {
  return map(x, [](double v) { return v > 0.0 ? v : 0.0; });
}
Tensor relu_backward(const Tensor& x, const Tensor& upstream) {
  return map_backward(x, upstream, [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}
Tensor sigmoid(const Tensor& x) {
  return map(x, [](double v) { return sigmoid(v); });
}
Tensor sigmoid_backward(const Tensor& x, const Tensor& upstream) {
  return map_backward(x, upstream, [](double v) {
    const double s = sigmoid(v);
    return s * (1.0 - s);
  });
}
Tensor tanh(const Tensor& x) {
  return map(x, [](double v) { return std::tanh(v); });
}
Tensor tanh_backward(const Tensor& x, const Tensor& upstream) {
  return map_backward(x, upstream, [](double v) {
    const double t = std::tanh(v);
    return 1.0 - t * t;
  });
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    total += p[i];
  }
  for (auto& v : p) v /= total;
  return p;
}

std::vector<double> softmax_backward(std::span<const double> probs,
                                     std::span<const double> upstream) {
  double dot = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) dot += probs[i] * upstream[i];
  std::vector<double> g(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) g[i] = probs[i] * (upstream[i] - dot);
  return g;
}

ScalarLoss bce(double prediction, double label) {
  const bool clamped = prediction < kBceEpsilon || prediction > 1.0 - kBceEpsilon;
  const double p = std::clamp(prediction, kBceEpsilon, 1.0 - kBceEpsilon);
  ScalarLoss out;
  out.value = -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
  out.grad = clamped ? 0.0 : -label / p + (1.0 - label) / (1.0 - p);
  return out;
}

ScalarLoss mse(double prediction, double target) {
  const double d = prediction - target;
  return {d * d, 2.0 * d};
}

namespace {

template <typename F>
VectorLoss batch_loss(std::span<const double> a, std::span<const double> b, F f) {
  if (a.size() != b.size()) {
    throw ShapeError("loss: " + std::to_string(a.size()) + " predictions vs " +
                     std::to_string(b.size()) + " targets");
  }
  VectorLoss out;
  out.grad.resize(a.size());
  if (a.empty()) return out;
  const double inv = 1.0 / static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const ScalarLoss l = f(a[i], b[i]);
    out.value += l.value * inv;
    out.grad[i] = l.grad * inv;
  }
  return out;
}

}  // namespace

VectorLoss bce(std::span<const double> predictions, std::span<const double> labels) {
  return batch_loss(predictions, labels,
                    [](double p, double y) { return bce(p, y); });
}

VectorLoss mse(std::span<const double> predictions, std::span<const double> targets) {
  return batch_loss(predictions, targets,
                    [](double p, double t) { return mse(p, t); });
}

VectorLoss ce_softmax(std::span<const double> logits, int target_class) {
  if (target_class < 0 || static_cast<std::size_t>(target_class) >= logits.size()) {
    throw ShapeError("ce_softmax: class " + std::to_string(target_class) +
                     " out of range for " + std::to_string(logits.size()) +
                     " logits");
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) total += std::exp(z - top);
  const double log_norm = top + std::log(total);
  VectorLoss out;
  out.value = log_norm - logits[static_cast<std::size_t>(target_class)];
  out.grad.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.grad[i] = std::exp(logits[i] - log_norm);
  }
  out.grad[static_cast<std::size_t>(target_class)] -= 1.0;
  return out;
}

DropoutResult dropout(std::span<const double> input, double rate, Rng& rng,
                      bool train) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ValidationError("dropout rate must be in [0, 1)");
  }
  DropoutResult r;
  r.output.assign(input.begin(), input.end());
  r.scale.assign(input.size(), 1.0);
  if (!train || rate == 0.0) return r;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < input.size(); ++i) {
    r.scale[i] = rng.uniform() < rate ? 0.0 : keep_scale;
    r.output[i] *= r.scale[i];
  }
  return r;
}

Tensor dropout(const Tensor& input, double rate, Rng& rng, bool train) {
  auto r = dropout(input.data(), rate, rng, train);
  return Tensor(input.shape(), std::move(r.output));
}

}  // namespace qfsum::nn
