#ifndef QFSUM_RL_HPP_
#define QFSUM_RL_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <nlohmann/json_fwd.hpp>
#include <span>
#include <string>
#include <vector>

#include "qfsum/corpus.hpp"
#include "qfsum/features.hpp"
#include "qfsum/optim.hpp"
#include "qfsum/params.hpp"
#include "qfsum/random.hpp"
#include "qfsum/rouge.hpp"
#include "qfsum/summarizer.hpp"

namespace qfsum::rl {

// State layout: candidate, question, summary so far, sentences after the
// candidate, whole document (each a mean embedding), then summary length.
inline constexpr std::size_t kStateBlocks = 5;
inline std::size_t state_dim_for(std::size_t embedding_dim) {
  return kStateBlocks * embedding_dim + 1;
}

struct StepResult {
  std::vector<double> state;
  double reward = 0.0;
  bool done = false;
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::size_t state_dim() const = 0;
  // Begins the next episode and returns its first state.
  virtual std::vector<double> reset() = 0;
  virtual StepResult step(int action) = 0;
};

// Everything an episode over one question needs, computed once.
struct EpisodeData {
  Question question;
  std::vector<CandidateSentence> pool;
  std::vector<MeanStats> candidates;
  std::vector<MeanStats> suffix;  // suffix[i] covers candidates i..P-1
  MeanStats question_stats;
  std::vector<UnitBag> references;
  std::size_t dim = 0;
};

// Throws ValidationError for an empty pool or no usable ideal answer.
EpisodeData prepare_episode(const Question& question, const FeatureSource& features,
                            int cap = kDefaultCandidateCap);

// Prepares every usable question; the rest are skipped with a warning.
std::vector<EpisodeData> prepare_episodes(std::span<const Question> questions,
                                          const FeatureSource& features,
                                          int cap = kDefaultCandidateCap);

// One pass over a question's candidates; action 1 keeps the current one.
// The reward is the ROUGE-SU4 F1 of the summary, paid on the last step.
class SummaryEnvironment final : public Environment {
 public:
  explicit SummaryEnvironment(const EpisodeData& data);

  std::size_t state_dim() const override { return state_dim_for(data_->dim); }
  std::vector<double> reset() override;
  StepResult step(int action) override;

  bool done() const { return cursor_ >= data_->pool.size(); }
  const std::vector<int>& selected() const { return selected_; }
  std::vector<double> state() const;

 private:
  const EpisodeData* data_;
  std::size_t cursor_ = 0;
  MeanStats summary_;
  std::vector<std::string> summary_tokens_;
  std::vector<int> selected_;
  bool started_ = false;
};

// Cycles through questions in a reshuffled order per pass.
class CorpusEnvironment final : public Environment {
 public:
  CorpusEnvironment(std::span<const EpisodeData> episodes, std::uint64_t seed);

  std::size_t state_dim() const override;
  std::vector<double> reset() override;
  StepResult step(int action) override;

 private:
  std::span<const EpisodeData> episodes_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t next_ = 0;
  std::unique_ptr<SummaryEnvironment> current_;
};

// One-step episodes in one of two states, each with its own rewarding
// action. State k has a 1 at index k and zeros elsewhere.
class BanditEnvironment final : public Environment {
 public:
  BanditEnvironment(std::size_t state_dim, std::uint64_t seed,
                    std::array<int, 2> rewarding = {1, 0});

  std::size_t state_dim() const override { return dim_; }
  std::vector<double> reset() override;
  StepResult step(int action) override;

  std::vector<double> state_vector(int which) const;
  int rewarding_action(int which) const { return rewarding_[which]; }

 private:
  std::size_t dim_;
  Rng rng_;
  std::array<int, 2> rewarding_;
  int current_ = 0;
  bool pending_ = false;
};

struct PpoConfig {
  int horizon = 1000;
  int minibatches = 4;
  long total_timesteps = 500000;
  double clip_epsilon = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  int update_epochs = 4;
  double learning_rate = 2.5e-4;
  double vf_coef = 0.5;
  double ent_coef = 0.01;
  double max_grad_norm = 0.5;
  int hidden_dim = 200;
  int eval_samples = 100;
  long eval_interval = 10000;  // timesteps between test evaluations
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const PpoConfig& config);
PpoConfig ppo_config_from_json(const nlohmann::json& j);

// Policy/value network: two relu layers shared by a 2-logit policy head and
// a scalar value head. Names: layer1.{w,b}, layer2.{w,b}, policy.{w,b},
// value.{w,b}.
nn::ParamSet init_policy(std::size_t state_dim, int hidden_dim, std::uint64_t seed);

struct PolicyTrace {
  std::vector<double> pre1, hidden1, pre2, hidden2;
  std::array<double, 2> logits{};
  std::array<double, 2> probabilities{};
  double value = 0.0;
};

PolicyTrace policy_forward(const nn::ParamSet& params, std::span<const double> state);

struct PolicyValue {
  std::array<double, 2> probabilities{};
  double value = 0.0;
};
PolicyValue policy_value(const nn::ParamSet& params, std::span<const double> state);

// Accumulates parameter gradients for upstream d/dlogits and d/dvalue.
void policy_backward(const nn::ParamSet& params, std::span<const double> state,
                     const PolicyTrace& trace, std::array<double, 2> dlogits,
                     double dvalue, nn::ParamSet& grads);

struct Transition {
  std::vector<double> state;
  int action = 0;
  double log_prob = 0.0;
  double value = 0.0;
  double reward = 0.0;
  bool done = false;
};

struct Rollout {
  std::vector<Transition> steps;
  double last_value = 0.0;  // value of the state after the last step
};

struct Gae {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// done[t] marks the last step of an episode; the value after a non-terminal
// final step is `last_value`.
Gae compute_gae(std::span<const double> rewards, std::span<const double> values,
                std::span<const std::uint8_t> dones, double last_value,
                double gamma, double lambda);
Gae compute_gae(const Rollout& rollout, double gamma, double lambda);

// Collects fixed-size batches; episodes continue across batch boundaries.
class RolloutCollector {
 public:
  RolloutCollector(Environment& env, std::uint64_t seed);
  Rollout collect(const nn::ParamSet& params, int horizon);
  const std::vector<double>& completed_returns() const { return completed_; }

 private:
  Environment& env_;
  Rng rng_;
  std::vector<double> state_;
  bool started_ = false;
  double episode_return_ = 0.0;
  std::vector<double> completed_;
};

struct PpoLoss {
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double total = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

struct PpoSample {
  std::span<const double> state;
  int action = 0;
  double old_log_prob = 0.0;
  double advantage = 0.0;
  double ret = 0.0;
};

// Mean clipped-surrogate loss over `batch`; gradients are added to `grads`
// when it is non-null.
PpoLoss ppo_loss(const nn::ParamSet& params, std::span<const PpoSample> batch,
                 const PpoConfig& config, nn::ParamSet* grads);

struct PpoDiagnostics {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

// update_epochs passes of shuffled minibatches with per-batch advantage
// normalization. Throws NumericalError on a non-finite loss or parameters.
PpoDiagnostics ppo_update(nn::ParamSet& params, nn::AdamState& optimizer,
                          const Rollout& rollout, const PpoConfig& config, Rng& rng);

// Majority vote over `samples` draws; a tie picks action 0.
int eval_action(const nn::ParamSet& params, std::span<const double> state,
                int samples, Rng& rng);

using UpdateCallback =
    std::function<void(long timestep, const nn::ParamSet&, const PpoDiagnostics&)>;

// Runs ceil(total_timesteps / horizon) collect+update rounds.
nn::ParamSet ppo_train(Environment& env, const PpoConfig& config,
                       const UpdateCallback& after_update = {});

struct EpisodeSummary {
  SummaryResult summary;
  double reward = 0.0;
};

EpisodeSummary rl_summarize(const nn::ParamSet& params, const EpisodeData& episode,
                            int samples, Rng& rng);

// Mean terminal reward over `episodes`, one seeded stream per question.
double rl_evaluate(const nn::ParamSet& params, std::span<const EpisodeData> episodes,
                   int samples, std::uint64_t seed, int jobs = 1);

struct CurvePoint {
  long timestep = 0;
  double score = 0.0;
};

struct RlTrainResult {
  nn::ParamSet best_params;
  double best_score = -1.0;
  long best_timestep = 0;
  std::vector<CurvePoint> curve;
};

struct RlTrainOptions {
  int jobs = 1;
  std::function<void(const CurvePoint&)> on_eval;
};

RlTrainResult rl_train(std::span<const EpisodeData> train,
                       std::span<const EpisodeData> test, const PpoConfig& config,
                       const RlTrainOptions& options = {});

std::string encode_policy(const nn::ParamSet& params, const PpoConfig& config,
                          std::size_t embedding_dim);
struct PolicyCheckpoint {
  nn::ParamSet params;
  PpoConfig config;
  std::size_t embedding_dim = 0;
};
PolicyCheckpoint decode_policy(std::string_view bytes);

}  // namespace qfsum::rl

#endif  // QFSUM_RL_HPP_
