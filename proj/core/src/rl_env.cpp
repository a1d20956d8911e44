#include <spdlog/spdlog.h>

#include <algorithm>
#include <numeric>

#include "qfsum/error.hpp"
#include "qfsum/rl.hpp"

namespace qfsum::rl {

namespace {

void add_into(MeanStats& acc, const MeanStats& x) {
  if (acc.sum.empty()) acc.sum.assign(x.sum.size(), 0.0);
  for (std::size_t k = 0; k < x.sum.size(); ++k) acc.sum[k] += x.sum[k];
  acc.count += x.count;
}

void write_mean(const MeanStats& s, std::size_t dim, double* out) {
  if (s.count <= 0.0 || s.sum.empty()) {
    std::fill(out, out + dim, 0.0);
    return;
  }
  for (std::size_t k = 0; k < dim; ++k) out[k] = s.sum[k] / s.count;
}

MeanStats zero_stats(std::size_t dim) { return {std::vector<double>(dim, 0.0), 0.0}; }

}  // namespace

EpisodeData prepare_episode(const Question& question, const FeatureSource& features,
                            int cap) {
  EpisodeData e;
  e.question = question;
  e.pool = build_candidates(question, cap);
  if (e.pool.empty()) {
    throw ValidationError("question '" + question.id + "' has no candidate sentences");
  }
  for (const auto& answer : question.ideal_answers) {
    auto tokens = tokenize(answer);
    if (!tokens.empty()) e.references.emplace_back(tokens);
  }
  if (e.references.empty()) {
    throw ValidationError("question '" + question.id + "' has no usable ideal answer");
  }
  e.dim = features.dim();
  e.question_stats = features.question_stats(question);
  e.candidates.reserve(e.pool.size());
  for (const auto& c : e.pool) e.candidates.push_back(features.sentence_stats(question, c));
  e.suffix.assign(e.pool.size() + 1, zero_stats(e.dim));
  for (std::size_t i = e.pool.size(); i-- > 0;) {
    e.suffix[i] = e.suffix[i + 1];
    add_into(e.suffix[i], e.candidates[i]);
  }
  return e;
}

std::vector<EpisodeData> prepare_episodes(std::span<const Question> questions,
                                          const FeatureSource& features, int cap) {
  std::vector<EpisodeData> out;
  out.reserve(questions.size());
  for (const auto& q : questions) {
    try {
      out.push_back(prepare_episode(q, features, cap));
    } catch (const ValidationError& e) {
      spdlog::warn("skipping question: {}", e.what());
    }
  }
  return out;
}

SummaryEnvironment::SummaryEnvironment(const EpisodeData& data) : data_(&data) {
  if (data.pool.empty()) throw ValidationError("environment needs a non-empty pool");
}

std::vector<double> SummaryEnvironment::reset() {
  cursor_ = 0;
  summary_ = zero_stats(data_->dim);
  summary_tokens_.clear();
  selected_.clear();
  started_ = true;
  return state();
}

std::vector<double> SummaryEnvironment::state() const {
  const std::size_t d = data_->dim;
  std::vector<double> s(state_dim_for(d), 0.0);
  const std::size_t p = data_->pool.size();
  if (cursor_ < p) {
    write_mean(data_->candidates[cursor_], d, s.data());
    write_mean(data_->suffix[cursor_ + 1], d, s.data() + 3 * d);
  }
  write_mean(data_->question_stats, d, s.data() + d);
  write_mean(summary_, d, s.data() + 2 * d);
  write_mean(data_->suffix[0], d, s.data() + 4 * d);
  s[5 * d] = static_cast<double>(selected_.size());
  return s;
}

StepResult SummaryEnvironment::step(int action) {
  if (!started_ || done()) throw StateError("step called on a finished episode");
  if (action != 0 && action != 1) {
    throw ValidationError("action must be 0 or 1, got " + std::to_string(action));
  }
  if (action == 1) {
    const auto& c = data_->pool[cursor_];
    add_into(summary_, data_->candidates[cursor_]);
    summary_tokens_.insert(summary_tokens_.end(), c.tokens.begin(), c.tokens.end());
    selected_.push_back(c.position);
  }
  ++cursor_;
  StepResult r;
  r.done = done();
  if (r.done && !summary_tokens_.empty()) {
    r.reward = rouge_su4_multi(UnitBag(summary_tokens_), data_->references).f1;
  }
  r.state = state();
  return r;
}

CorpusEnvironment::CorpusEnvironment(std::span<const EpisodeData> episodes,
                                     std::uint64_t seed)
    : episodes_(episodes), rng_(seed) {
  if (episodes.empty()) throw ValidationError("no training episodes");
}

std::size_t CorpusEnvironment::state_dim() const {
  return state_dim_for(episodes_.front().dim);
}

std::vector<double> CorpusEnvironment::reset() {
  if (next_ >= order_.size()) {
    order_.resize(episodes_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    rng_.shuffle(std::span(order_));
    next_ = 0;
  }
  current_ = std::make_unique<SummaryEnvironment>(episodes_[order_[next_++]]);
  return current_->reset();
}

StepResult CorpusEnvironment::step(int action) {
  if (!current_) throw StateError("step called before reset");
  return current_->step(action);
}

BanditEnvironment::BanditEnvironment(std::size_t state_dim, std::uint64_t seed,
                                     std::array<int, 2> rewarding)
    : dim_(state_dim), rng_(seed), rewarding_(rewarding) {
  if (state_dim < 2) throw ValidationError("bandit state needs at least 2 dims");
}

std::vector<double> BanditEnvironment::state_vector(int which) const {
  std::vector<double> s(dim_, 0.0);
  s[static_cast<std::size_t>(which)] = 1.0;
  return s;
}

std::vector<double> BanditEnvironment::reset() {
  current_ = static_cast<int>(rng_.below(2));
  pending_ = true;
  return state_vector(current_);
}

StepResult BanditEnvironment::step(int action) {
  if (!pending_) throw StateError("step called on a finished episode");
  pending_ = false;
  StepResult r;
  r.done = true;
  r.reward = action == rewarding_[static_cast<std::size_t>(current_)] ? 1.0 : 0.0;
  r.state.assign(dim_, 0.0);
  return r;
}

}  // namespace qfsum::rl
