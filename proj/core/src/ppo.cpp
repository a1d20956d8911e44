#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

#include "qfsum/error.hpp"
#include "qfsum/ops.hpp"
#include "qfsum/rl.hpp"

namespace qfsum::rl {

void PpoConfig::validate() const {
  if (horizon < 1) throw ValidationError("horizon must be >= 1");
  if (minibatches < 1 || horizon % minibatches != 0) {
    throw ValidationError("horizon must be divisible by minibatches");
  }
  if (total_timesteps < 1) throw ValidationError("total_timesteps must be >= 1");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) {
    throw ValidationError("clip_epsilon must be in (0, 1)");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("gamma must be in [0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
    throw ValidationError("gae_lambda must be in [0, 1]");
  }
  if (update_epochs < 1) throw ValidationError("update_epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (hidden_dim < 1) throw ValidationError("hidden_dim must be >= 1");
  if (eval_samples < 1) throw ValidationError("eval_samples must be >= 1");
  if (eval_interval < 1) throw ValidationError("eval_interval must be >= 1");
  if (max_grad_norm < 0.0) throw ValidationError("max_grad_norm must be >= 0");
}

nlohmann::json to_json(const PpoConfig& c) {
  return {{"horizon", c.horizon},
          {"minibatches", c.minibatches},
          {"total_timesteps", c.total_timesteps},
          {"clip_epsilon", c.clip_epsilon},
          {"gamma", c.gamma},
          {"gae_lambda", c.gae_lambda},
          {"update_epochs", c.update_epochs},
          {"learning_rate", c.learning_rate},
          {"vf_coef", c.vf_coef},
          {"ent_coef", c.ent_coef},
          {"max_grad_norm", c.max_grad_norm},
          {"hidden_dim", c.hidden_dim},
          {"eval_samples", c.eval_samples},
          {"eval_interval", c.eval_interval},
          {"seed", c.seed}};
}

PpoConfig ppo_config_from_json(const nlohmann::json& j) {
  try {
    PpoConfig c;
    c.horizon = j.value("horizon", c.horizon);
    c.minibatches = j.value("minibatches", c.minibatches);
    c.total_timesteps = j.value("total_timesteps", c.total_timesteps);
    c.clip_epsilon = j.value("clip_epsilon", c.clip_epsilon);
    c.gamma = j.value("gamma", c.gamma);
    c.gae_lambda = j.value("gae_lambda", c.gae_lambda);
    c.update_epochs = j.value("update_epochs", c.update_epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.vf_coef = j.value("vf_coef", c.vf_coef);
    c.ent_coef = j.value("ent_coef", c.ent_coef);
    c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.eval_samples = j.value("eval_samples", c.eval_samples);
    c.eval_interval = j.value("eval_interval", c.eval_interval);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("ppo config: ") + e.what());
  }
}

nn::ParamSet init_policy(std::size_t state_dim, int hidden_dim, std::uint64_t seed) {
  if (state_dim == 0 || hidden_dim < 1) throw ValidationError("bad policy dimensions");
  const auto h = static_cast<std::size_t>(hidden_dim);
  nn::ParamSet p(seed);
  Rng rng(Rng::derive(seed, 0x9011C7));
  p.add_glorot("layer1.w", state_dim, h, rng);
  p.add_zeros("layer1.b", {h});
  p.add_glorot("layer2.w", h, h, rng);
  p.add_zeros("layer2.b", {h});
  p.add_glorot("policy.w", h, 2, rng);
  p.add_zeros("policy.b", {2});
  p.add_glorot("value.w", h, 1, rng);
  p.add_zeros("value.b", {1});
  // A near-uniform initial policy.
  for (double& w : p.at("policy.w").data()) w *= 0.01;
  return p;
}

namespace {

void relu_inplace(const std::vector<double>& pre, std::vector<double>& out) {
  out.resize(pre.size());
  for (std::size_t k = 0; k < pre.size(); ++k) out[k] = pre[k] > 0.0 ? pre[k] : 0.0;
}

double log_sum_exp(const std::array<double, 2>& z) {
  const double m = std::max(z[0], z[1]);
  return m + std::log(std::exp(z[0] - m) + std::exp(z[1] - m));
}

}  // namespace

PolicyTrace policy_forward(const nn::ParamSet& params, std::span<const double> state) {
  const auto& w1 = params.at("layer1.w");
  if (state.size() != w1.rows()) {
    throw ShapeError("policy expects a state of dim " + std::to_string(w1.rows()) +
                     ", got " + std::to_string(state.size()));
  }
  PolicyTrace t;
  t.pre1.resize(w1.cols());
  nn::affine(state, w1, params.at("layer1.b").data(), t.pre1);
  relu_inplace(t.pre1, t.hidden1);
  const auto& w2 = params.at("layer2.w");
  t.pre2.resize(w2.cols());
  nn::affine(t.hidden1, w2, params.at("layer2.b").data(), t.pre2);
  relu_inplace(t.pre2, t.hidden2);
  nn::affine(t.hidden2, params.at("policy.w"), params.at("policy.b").data(), t.logits);
  nn::affine(t.hidden2, params.at("value.w"), params.at("value.b").data(),
             std::span<double>(&t.value, 1));
  const double lse = log_sum_exp(t.logits);
  t.probabilities = {std::exp(t.logits[0] - lse), std::exp(t.logits[1] - lse)};
  return t;
}

PolicyValue policy_value(const nn::ParamSet& params, std::span<const double> state) {
  const auto t = policy_forward(params, state);
  return {t.probabilities, t.value};
}

void policy_backward(const nn::ParamSet& params, std::span<const double> state,
                     const PolicyTrace& trace, std::array<double, 2> dlogits,
                     double dvalue, nn::ParamSet& grads) {
  const std::size_t h = trace.hidden2.size();
  std::vector<double> dh2(h), dh2_value(h);
  nn::affine_backward(trace.hidden2, params.at("policy.w"), dlogits, dh2,
                      grads.at("policy.w"), grads.at("policy.b").data());
  nn::affine_backward(trace.hidden2, params.at("value.w"),
                      std::span<const double>(&dvalue, 1), dh2_value,
                      grads.at("value.w"), grads.at("value.b").data());
  for (std::size_t k = 0; k < h; ++k) {
    dh2[k] = trace.pre2[k] > 0.0 ? dh2[k] + dh2_value[k] : 0.0;
  }
  std::vector<double> dh1(trace.hidden1.size());
  nn::affine_backward(trace.hidden1, params.at("layer2.w"), dh2, dh1,
                      grads.at("layer2.w"), grads.at("layer2.b").data());
  for (std::size_t k = 0; k < dh1.size(); ++k) {
    if (trace.pre1[k] <= 0.0) dh1[k] = 0.0;
  }
  nn::affine_backward(state, params.at("layer1.w"), dh1, {}, grads.at("layer1.w"),
                      grads.at("layer1.b").data());
}

Gae compute_gae(std::span<const double> rewards, std::span<const double> values,
                std::span<const std::uint8_t> dones, double last_value,
                double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw ShapeError("compute_gae: rewards, values and dones differ in length");
  }
  Gae g;
  g.advantages.assign(n, 0.0);
  g.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double live = dones[t] ? 0.0 : 1.0;
    const double next_value = t + 1 < n ? values[t + 1] : last_value;
    const double delta = rewards[t] + gamma * next_value * live - values[t];
    running = delta + gamma * lambda * live * running;
    g.advantages[t] = running;
    g.returns[t] = running + values[t];
  }
  return g;
}

Gae compute_gae(const Rollout& rollout, double gamma, double lambda) {
  std::vector<double> rewards, values;
  std::vector<std::uint8_t> dones;
  for (const auto& s : rollout.steps) {
    rewards.push_back(s.reward);
    values.push_back(s.value);
    dones.push_back(s.done ? 1 : 0);
  }
  return compute_gae(rewards, values, dones, rollout.last_value, gamma, lambda);
}

RolloutCollector::RolloutCollector(Environment& env, std::uint64_t seed)
    : env_(env), rng_(seed) {}

Rollout RolloutCollector::collect(const nn::ParamSet& params, int horizon) {
  if (!started_) {
    state_ = env_.reset();
    started_ = true;
  }
  Rollout r;
  r.steps.reserve(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    const auto trace = policy_forward(params, state_);
    Transition tr;
    tr.action = rng_.uniform() < trace.probabilities[1] ? 1 : 0;
    tr.log_prob = trace.logits[tr.action] - log_sum_exp(trace.logits);
    tr.value = trace.value;
    auto result = env_.step(tr.action);
    tr.state = std::move(state_);
    tr.reward = result.reward;
    tr.done = result.done;
    episode_return_ += result.reward;
    if (result.done) {
      completed_.push_back(episode_return_);
      episode_return_ = 0.0;
      state_ = env_.reset();
    } else {
      state_ = std::move(result.state);
    }
    r.steps.push_back(std::move(tr));
  }
  r.last_value = policy_forward(params, state_).value;
  return r;
}

PpoLoss ppo_loss(const nn::ParamSet& params, std::span<const PpoSample> batch,
                 const PpoConfig& config, nn::ParamSet* grads) {
  PpoLoss loss;
  if (batch.empty()) return loss;
  const double m = static_cast<double>(batch.size());
  const double eps = config.clip_epsilon;
  for (const auto& s : batch) {
    const auto t = policy_forward(params, s.state);
    const double lse = log_sum_exp(t.logits);
    const std::array<double, 2> logp = {t.logits[0] - lse, t.logits[1] - lse};
    const double ratio = std::exp(logp[s.action] - s.old_log_prob);
    const double unclipped = ratio * s.advantage;
    const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * s.advantage;
    loss.policy -= std::min(unclipped, clipped);
    const double entropy = -(t.probabilities[0] * logp[0] + t.probabilities[1] * logp[1]);
    loss.entropy += entropy;
    const double err = t.value - s.ret;
    loss.value += err * err;
    if (std::abs(ratio - 1.0) > eps) loss.clip_fraction += 1.0;
    const double log_ratio = logp[s.action] - s.old_log_prob;
    loss.approx_kl += 0.5 * log_ratio * log_ratio;
    if (grads == nullptr) continue;
    const double dsurrogate = unclipped <= clipped ? unclipped : 0.0;
    std::array<double, 2> dlogits{};
    for (int j = 0; j < 2; ++j) {
      const double indicator = j == s.action ? 1.0 : 0.0;
      const double p = t.probabilities[j];
      dlogits[j] = -dsurrogate / m * (indicator - p) +
                   config.ent_coef / m * p * (logp[j] + entropy);
    }
    policy_backward(params, s.state, t, dlogits, config.vf_coef * 2.0 * err / m, *grads);
  }
  loss.policy /= m;
  loss.value /= m;
  loss.entropy /= m;
  loss.clip_fraction /= m;
  loss.approx_kl /= m;
  loss.total = loss.policy + config.vf_coef * loss.value - config.ent_coef * loss.entropy;
  return loss;
}

PpoDiagnostics ppo_update(nn::ParamSet& params, nn::AdamState& optimizer,
                          const Rollout& rollout, const PpoConfig& config, Rng& rng) {
  const std::size_t n = rollout.steps.size();
  if (n == 0) throw ValidationError("ppo_update needs a non-empty rollout");
  auto gae = compute_gae(rollout, config.gamma, config.gae_lambda);
  const double mean =
      std::accumulate(gae.advantages.begin(), gae.advantages.end(), 0.0) /
      static_cast<double>(n);
  double var = 0.0;
  for (double a : gae.advantages) var += (a - mean) * (a - mean);
  const double stdev = std::sqrt(var / static_cast<double>(n));

  std::vector<PpoSample> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& tr = rollout.steps[i];
    samples[i] = {tr.state, tr.action, tr.log_prob,
                  (gae.advantages[i] - mean) / (stdev + 1e-8), gae.returns[i]};
  }

  const auto minibatches = static_cast<std::size_t>(config.minibatches);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto grads = params.zeros_like();
  const nn::AdamConfig adam{config.learning_rate, 0.9, 0.999, 1e-5};
  PpoDiagnostics diag;
  int updates = 0;
  std::vector<PpoSample> batch;
  for (int epoch = 0; epoch < config.update_epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t mb = 0; mb < minibatches; ++mb) {
      const std::size_t lo = n * mb / minibatches;
      const std::size_t hi = n * (mb + 1) / minibatches;
      if (lo == hi) continue;
      batch.clear();
      for (std::size_t i = lo; i < hi; ++i) batch.push_back(samples[order[i]]);
      grads.set_zero();
      const auto loss = ppo_loss(params, batch, config, &grads);
      if (!std::isfinite(loss.total)) {
        throw NumericalError("non-finite PPO loss (policy " + std::to_string(loss.policy) +
                             ", value " + std::to_string(loss.value) + ", entropy " +
                             std::to_string(loss.entropy) + ", approx_kl " +
                             std::to_string(loss.approx_kl) + ")");
      }
      if (config.max_grad_norm > 0.0) nn::clip_grad_norm(grads, config.max_grad_norm);
      nn::adam_step(params, grads, optimizer, adam);
      diag.policy_loss += loss.policy;
      diag.value_loss += loss.value;
      diag.entropy += loss.entropy;
      diag.clip_fraction += loss.clip_fraction;
      diag.approx_kl += loss.approx_kl;
      ++updates;
    }
  }
  if (!params.all_finite()) throw NumericalError("non-finite policy parameters after update");
  const double u = static_cast<double>(std::max(updates, 1));
  diag.policy_loss /= u;
  diag.value_loss /= u;
  diag.entropy /= u;
  diag.clip_fraction /= u;
  diag.approx_kl /= u;
  return diag;
}

int eval_action(const nn::ParamSet& params, std::span<const double> state, int samples,
                Rng& rng) {
  if (samples < 1) throw ValidationError("eval_action needs at least one sample");
  const auto pv = policy_value(params, state);
  int ones = 0;
  for (int i = 0; i < samples; ++i) {
    if (rng.uniform() < pv.probabilities[1]) ++ones;
  }
  return 2 * ones > samples ? 1 : 0;
}

nn::ParamSet ppo_train(Environment& env, const PpoConfig& config,
                       const UpdateCallback& after_update) {
  config.validate();
  auto params = init_policy(env.state_dim(), config.hidden_dim, config.seed);
  auto optimizer = nn::AdamState::for_params(params);
  RolloutCollector collector(env, Rng::derive(config.seed, 2));
  Rng update_rng(Rng::derive(config.seed, 3));
  const long rounds = (config.total_timesteps + config.horizon - 1) / config.horizon;
  long timestep = 0;
  for (long r = 0; r < rounds; ++r) {
    const auto rollout = collector.collect(params, config.horizon);
    timestep += config.horizon;
    const auto diag = ppo_update(params, optimizer, rollout, config, update_rng);
    if (after_update) after_update(timestep, params, diag);
  }
  return params;
}

std::string encode_policy(const nn::ParamSet& params, const PpoConfig& config,
                          std::size_t embedding_dim) {
  const nlohmann::json meta = {{"kind", "policy"},
                               {"embedding_dim", embedding_dim},
                               {"config", to_json(config)}};
  return nn::encode_checkpoint(params, meta.dump());
}

PolicyCheckpoint decode_policy(std::string_view bytes) {
  auto ck = nn::decode_checkpoint(bytes);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(ck.metadata);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("policy checkpoint metadata: ") + e.what());
  }
  if (meta.value("kind", "") != "policy") {
    throw ParseError("checkpoint does not hold a policy");
  }
  PolicyCheckpoint out;
  out.config = ppo_config_from_json(meta.at("config"));
  out.embedding_dim = meta.at("embedding_dim").get<std::size_t>();
  const auto expected =
      init_policy(state_dim_for(out.embedding_dim), out.config.hidden_dim, 0);
  if (expected.names() != ck.params.names()) {
    throw ParseError("policy checkpoint parameters do not match its architecture");
  }
  for (const auto& [name, t] : expected.tensors()) {
    if (ck.params.at(name).shape() != t.shape()) {
      throw ParseError("policy checkpoint: shape mismatch for '" + name + "'");
    }
  }
  out.params = std::move(ck.params);
  return out;
}

}  // namespace qfsum::rl
