// Randomized finite-difference checks shared by the unit and acceptance
// suites. Each returns the worst norm-wise relative error over `configs`
// random configurations.
#ifndef QFSUM_TESTS_GRADCHECKS_HPP_
#define QFSUM_TESTS_GRADCHECKS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qfsum/lstm.hpp"
#include "qfsum/ops.hpp"
#include "qfsum/rl.hpp"
#include "qfsum/scorer.hpp"

namespace gradcheck {

using qfsum::Rng;
using qfsum::nn::ParamSet;
using qfsum::nn::Tensor;

struct Result {
  std::string name;
  double worst = 0.0;
  int configs = 0;
};

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.below(hi - lo + 1);
}

inline std::vector<double> uniform_vec(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Values bounded away from zero, so relu kinks stay out of reach.
inline std::vector<double> away_from_zero(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(0.05, 1.5);
  return v;
}

inline double dot(const std::vector<double>& a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void perturb(ParamSet& p, Rng& rng, double scale) {
  for (const auto& name : p.names()) {
    for (double& v : p.at(name).data()) v += rng.uniform(-scale, scale);
  }
}

inline Result dense(int configs, std::uint64_t seed) {
  Result r{"dense", 0.0, configs};
  Rng rng(seed);
  for (int c = 0; c < configs; ++c) {
    const std::size_t b = pick(rng, 1, 4), in = pick(rng, 1, 6), out = pick(rng, 1, 5);
    Tensor x({b, in}, uniform_vec(rng, b * in));
    Tensor w({in, out}, uniform_vec(rng, in * out));
    Tensor bias({out}, uniform_vec(rng, out));
    const auto weights = uniform_vec(rng, b * out);
    auto loss = [&] { return dot(weights, qfsum::nn::dense(x, w, bias).data()); };
    const auto g = qfsum::nn::dense_backward(x, w, Tensor({b, out}, weights));
    r.worst = std::max({r.worst, oracle::vector_gradient_error(x.values(), g.input.values(), loss),
                        oracle::vector_gradient_error(w.values(), g.weights.values(), loss),
                        oracle::vector_gradient_error(bias.values(), g.bias.values(), loss)});
  }
  return r;
}

template <typename Fwd, typename Bwd>
Result activation(const std::string& name, int configs, std::uint64_t seed, Fwd fwd, Bwd bwd) {
  Result r{name, 0.0, configs};
  Rng rng(seed);
  for (int c = 0; c < configs; ++c) {
    const std::size_t n = pick(rng, 1, 8);
    Tensor x({n}, away_from_zero(rng, n));
    const auto weights = uniform_vec(rng, n);
    auto loss = [&] { return dot(weights, fwd(x).data()); };
    const auto g = bwd(x, Tensor({n}, weights));
    r.worst = std::max(r.worst, oracle::vector_gradient_error(x.values(), g.values(), loss));
  }
  return r;
}

inline std::vector<Result> activations(int configs, std::uint64_t seed) {
  namespace nn = qfsum::nn;
  std::vector<Result> out;
  out.push_back(activation("relu", configs, seed,
                           [](const Tensor& x) { return nn::relu(x); },
                           [](const Tensor& x, const Tensor& u) { return nn::relu_backward(x, u); }));
  out.push_back(activation("sigmoid", configs, seed + 1,
                           [](const Tensor& x) { return nn::sigmoid(x); },
                           [](const Tensor& x, const Tensor& u) { return nn::sigmoid_backward(x, u); }));
  out.push_back(activation("tanh", configs, seed + 2,
                           [](const Tensor& x) { return nn::tanh(x); },
                           [](const Tensor& x, const Tensor& u) { return nn::tanh_backward(x, u); }));
  out.push_back(activation(
      "softmax", configs, seed + 3,
      [](const Tensor& x) { return Tensor({x.size()}, nn::softmax(x.data())); },
      [](const Tensor& x, const Tensor& u) {
        return Tensor({x.size()}, nn::softmax_backward(nn::softmax(x.data()), u.data()));
      }));
  return out;
}

inline std::vector<Result> losses(int configs, std::uint64_t seed) {
  namespace nn = qfsum::nn;
  Result bce{"bce", 0.0, configs}, mse{"mse", 0.0, configs}, ce{"ce_softmax", 0.0, configs};
  Rng rng(seed);
  for (int c = 0; c < configs; ++c) {
    const std::size_t n = pick(rng, 1, 6);
    std::vector<double> p = uniform_vec(rng, n, 0.02, 0.98);
    std::vector<double> labels(n);
    for (auto& l : labels) l = rng.bernoulli(0.5) ? 1.0 : 0.0;
    bce.worst = std::max(bce.worst, oracle::vector_gradient_error(
                                        p, nn::bce(p, labels).grad,
                                        [&] { return nn::bce(p, labels).value; }));
    std::vector<double> y = uniform_vec(rng, n, -2, 2), t = uniform_vec(rng, n, -2, 2);
    mse.worst = std::max(mse.worst, oracle::vector_gradient_error(
                                        y, nn::mse(y, t).grad,
                                        [&] { return nn::mse(y, t).value; }));
    const std::size_t k = pick(rng, 2, 6);
    std::vector<double> logits = uniform_vec(rng, k, -3, 3);
    const int cls = static_cast<int>(rng.below(k));
    ce.worst = std::max(ce.worst, oracle::vector_gradient_error(
                                      logits, nn::ce_softmax(logits, cls).grad,
                                      [&] { return nn::ce_softmax(logits, cls).value; }));
  }
  return {bce, mse, ce};
}

inline Result bilstm(int configs, std::uint64_t seed) {
  Result r{"bilstm", 0.0, configs};
  Rng rng(seed);
  for (int c = 0; c < configs; ++c) {
    const std::size_t in = pick(rng, 1, 4), hidden = pick(rng, 1, 4), len = pick(rng, 1, 5);
    ParamSet params(c);
    qfsum::nn::init_bilstm(params, "enc", in, hidden, rng);
    perturb(params, rng, 0.3);
    auto seq = oracle::random_matrix(rng, len, in, pick(rng, 0, 2));
    const auto weights = uniform_vec(rng, hidden);
    auto loss = [&] { return dot(weights, qfsum::nn::bilstm_reduce(seq, params, "enc")); };
    qfsum::nn::BiLstmTrace trace;
    qfsum::nn::bilstm_reduce(seq, params, "enc", &trace);
    auto grads = params.zeros_like();
    Tensor input_grad;
    qfsum::nn::bilstm_backward(seq, params, "enc", trace, weights, grads, &input_grad);
    r.worst = std::max({r.worst, oracle::param_gradient_error(params, grads, loss),
                        oracle::vector_gradient_error(seq.rows.values(), input_grad.values(), loss)});
  }
  return r;
}

inline qfsum::TokenMatrix single_row(Rng& rng, std::size_t dim) {
  return oracle::random_matrix(rng, 1, dim, 0);
}

// Word-vector scorers and the SBERT heads, checked through group_loss.
inline Result scorer(int configs, std::uint64_t seed) {
  using qfsum::ScorerVariant;
  Result r{"scorer composite", 0.0, 0};
  Rng rng(seed);
  const ScorerVariant variants[] = {ScorerVariant::kNNR, ScorerVariant::kNNC,
                                    ScorerVariant::kMeanContextual, ScorerVariant::kContextualLSTM,
                                    ScorerVariant::kSiameseLSTM, ScorerVariant::kSbertC,
                                    ScorerVariant::kSbertMR, ScorerVariant::kSbertMC};
  for (int c = 0; c < configs; ++c) {
    const auto variant = variants[static_cast<std::size_t>(c) % std::size(variants)];
    auto config = qfsum::ScorerConfig::defaults_for(variant);
    config.hidden_dim = static_cast<int>(pick(rng, 2, 4));
    config.dropout = rng.bernoulli(0.5) ? 0.0 : 0.3;
    config.seed = rng.next();
    const std::size_t dim = pick(rng, 2, 4);
    auto model = qfsum::init_scorer(config, dim);
    perturb(model.params, rng, 0.2);
    const bool sbert = qfsum::is_sbert(variant);
    qfsum::QuestionGroup group;
    group.question = sbert ? single_row(rng, dim) : oracle::random_matrix(rng, pick(rng, 1, 4), dim, 1);
    for (std::size_t e = 0, n = pick(rng, 1, 3); e < n; ++e) {
      qfsum::ScoringExample ex;
      ex.sentence = sbert ? single_row(rng, dim) : oracle::random_matrix(rng, pick(rng, 1, 4), dim, 1);
      ex.position = static_cast<int>(pick(rng, 1, 6));
      ex.target = rng.uniform(0.0, 1.0);
      ex.label = rng.bernoulli(0.5) ? 1 : 0;
      ex.noise_seed = rng.next();
      group.examples.push_back(std::move(ex));
    }
    auto grads = model.params.zeros_like();
    qfsum::group_loss(model, group, &grads, true);
    auto loss = [&] { return qfsum::group_loss(model, group, nullptr, true); };
    r.worst = std::max(r.worst, oracle::param_gradient_error(model.params, grads, loss));
    ++r.configs;
  }
  return r;
}

// Policy network: the raw policy/value outputs and the clipped PPO loss.
inline std::vector<Result> policy(int configs, std::uint64_t seed) {
  namespace rl = qfsum::rl;
  Result net{"policy/value network", 0.0, configs}, ppo{"ppo loss", 0.0, configs};
  Rng rng(seed);
  for (int c = 0; c < configs; ++c) {
    const std::size_t sdim = pick(rng, 3, 8);
    const int hidden = static_cast<int>(pick(rng, 2, 5));
    auto params = rl::init_policy(sdim, hidden, rng.next());
    perturb(params, rng, 0.2);
    auto state = uniform_vec(rng, sdim);
    const std::array<double, 2> dl{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double dv = rng.uniform(-1, 1);
    auto out_loss = [&] {
      const auto t = rl::policy_forward(params, state);
      return dl[0] * t.logits[0] + dl[1] * t.logits[1] + dv * t.value;
    };
    auto grads = params.zeros_like();
    rl::policy_backward(params, state, rl::policy_forward(params, state), dl, dv, grads);
    net.worst = std::max(net.worst, oracle::param_gradient_error(params, grads, out_loss));

    rl::PpoConfig config;
    std::vector<std::vector<double>> states;
    std::vector<rl::PpoSample> batch;
    const std::size_t n = pick(rng, 1, 6);
    for (std::size_t i = 0; i < n; ++i) states.push_back(uniform_vec(rng, sdim));
    for (std::size_t i = 0; i < n; ++i) {
      const auto pv = rl::policy_value(params, states[i]);
      const int action = rng.bernoulli(0.5) ? 1 : 0;
      // Old probabilities differ from the current ones by up to ~15%, so
      // both the clipped and unclipped branches are exercised.
      const double old = std::log(pv.probabilities[action]) + rng.uniform(-0.15, 0.15);
      batch.push_back({states[i], action, old, rng.uniform(-2, 2), rng.uniform(-1, 1)});
    }
    auto pgrads = params.zeros_like();
    rl::ppo_loss(params, batch, config, &pgrads);
    auto ppo_total = [&] { return rl::ppo_loss(params, batch, config, nullptr).total; };
    ppo.worst = std::max(ppo.worst, oracle::param_gradient_error(params, pgrads, ppo_total));
  }
  return {net, ppo};
}

}  // namespace gradcheck

#endif  // QFSUM_TESTS_GRADCHECKS_HPP_
