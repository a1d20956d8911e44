#include <spdlog/spdlog.h>

#include <set>

#include "qfsum/error.hpp"
#include "qfsum/rl.hpp"
#include "qfsum/util.hpp"

namespace qfsum::rl {

EpisodeSummary rl_summarize(const nn::ParamSet& params, const EpisodeData& episode,
                            int samples, Rng& rng) {
  SummaryEnvironment env(episode);
  auto state = env.reset();
  EpisodeSummary out;
  while (!env.done()) {
    auto r = env.step(eval_action(params, state, samples, rng));
    out.reward = r.reward;
    state = std::move(r.state);
  }
  out.summary.question_id = episode.question.id;
  out.summary.selected = env.selected();
  out.summary.n_used = static_cast<int>(env.selected().size());
  std::size_t i = 0;
  for (const auto& c : episode.pool) {
    if (i < out.summary.selected.size() && c.position == out.summary.selected[i]) {
      if (!out.summary.text.empty()) out.summary.text += ' ';
      out.summary.text += c.text;
      ++i;
    }
  }
  return out;
}

double rl_evaluate(const nn::ParamSet& params, std::span<const EpisodeData> episodes,
                   int samples, std::uint64_t seed, int jobs) {
  if (episodes.empty()) throw ValidationError("no evaluation episodes");
  std::vector<double> rewards(episodes.size(), 0.0);
  parallel_for(episodes.size(), jobs, [&](std::size_t i) {
    Rng rng(Rng::derive(seed, i));
    rewards[i] = rl_summarize(params, episodes[i], samples, rng).reward;
  });
  double total = 0.0;
  for (double r : rewards) total += r;
  return total / static_cast<double>(rewards.size());
}

RlTrainResult rl_train(std::span<const EpisodeData> train,
                       std::span<const EpisodeData> test, const PpoConfig& config,
                       const RlTrainOptions& options) {
  config.validate();
  if (train.empty()) throw ValidationError("empty RL training split");
  if (test.empty()) throw ValidationError("empty RL test split");
  std::set<std::string> train_ids;
  for (const auto& e : train) train_ids.insert(e.question.id);
  for (const auto& e : test) {
    if (train_ids.contains(e.question.id)) {
      throw ValidationError("question '" + e.question.id + "' is in both splits");
    }
  }
  const std::size_t dim = train.front().dim;
  for (const auto* split : {&train, &test}) {
    for (const auto& e : *split) {
      if (e.dim != dim) throw ShapeError("episodes disagree on embedding dim");
    }
  }

  CorpusEnvironment env(train, Rng::derive(config.seed, 4));
  const std::uint64_t eval_seed = Rng::derive(config.seed, 5);
  const long rounds = (config.total_timesteps + config.horizon - 1) / config.horizon;
  const long last_timestep = rounds * config.horizon;

  RlTrainResult result;
  long next_eval = config.eval_interval;
  auto after_update = [&](long timestep, const nn::ParamSet& params,
                          const PpoDiagnostics& diag) {
    spdlog::debug("t={} policy={:.4f} value={:.4f} entropy={:.4f} clip={:.3f}",
                  timestep, diag.policy_loss, diag.value_loss, diag.entropy,
                  diag.clip_fraction);
    if (timestep < next_eval && timestep < last_timestep) return;
    while (next_eval <= timestep) next_eval += config.eval_interval;
    const CurvePoint point{
        timestep, rl_evaluate(params, test, config.eval_samples, eval_seed, options.jobs)};
    result.curve.push_back(point);
    if (point.score > result.best_score) {
      result.best_score = point.score;
      result.best_timestep = timestep;
      result.best_params = params;
    }
    if (options.on_eval) options.on_eval(point);
  };
  ppo_train(env, config, after_update);
  return result;
}

}  // namespace qfsum::rl
