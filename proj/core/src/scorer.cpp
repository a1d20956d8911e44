#include "qfsum/scorer.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <unordered_map>

#include "qfsum/error.hpp"
#include "qfsum/lstm.hpp"
#include "qfsum/ops.hpp"
#include "qfsum/optim.hpp"
#include "qfsum/util.hpp"

namespace qfsum {

namespace {

// Gradient accumulation is split into a fixed number of chunks that are
// summed in order, so results do not depend on the thread count.
constexpr std::size_t kGradientChunks = 4;

struct VariantInfo {
  ScorerVariant variant;
  std::string_view name;
};

constexpr VariantInfo kVariants[] = {
    {ScorerVariant::kNNR, "nnr"},
    {ScorerVariant::kNNC, "nnc"},
    {ScorerVariant::kMeanContextual, "mean-contextual"},
    {ScorerVariant::kContextualLSTM, "contextual-lstm"},
    {ScorerVariant::kSiameseLSTM, "siamese-lstm"},
    {ScorerVariant::kSbertR, "sbert-r"},
    {ScorerVariant::kSbertC, "sbert-c"},
    {ScorerVariant::kSbertMR, "sbert-m-r"},
    {ScorerVariant::kSbertMC, "sbert-m-c"},
};

bool trains_classifier(ScorerVariant v) {
  return v == ScorerVariant::kSbertC || v == ScorerVariant::kSbertMR ||
         v == ScorerVariant::kSbertMC;
}
bool trains_regression(ScorerVariant v) {
  return v == ScorerVariant::kSbertR || v == ScorerVariant::kSbertMR ||
         v == ScorerVariant::kSbertMC;
}
bool predicts_with_classifier(ScorerVariant v) {
  return v == ScorerVariant::kSbertC || v == ScorerVariant::kSbertMC;
}

struct Prefixes {
  std::string sentence;
  std::string question;
};

Prefixes reductor_prefixes(const ScorerConfig& c) {
  if (c.share_reductor) return {"reductor", "reductor"};
  return {"sentence_reductor", "question_reductor"};
}

}  // namespace

std::string_view to_string(ScorerVariant variant) {
  for (const auto& v : kVariants) {
    if (v.variant == variant) return v.name;
  }
  return "nnc";
}

ScorerVariant parse_scorer_variant(std::string_view name) {
  for (const auto& v : kVariants) {
    if (v.name == name) return v.variant;
  }
  throw ValidationError("unknown scorer variant '" + std::string(name) + "'");
}

bool is_sbert(ScorerVariant v) {
  return v == ScorerVariant::kSbertR || v == ScorerVariant::kSbertC ||
         v == ScorerVariant::kSbertMR || v == ScorerVariant::kSbertMC;
}

bool uses_lstm(ScorerVariant v) {
  return v == ScorerVariant::kNNR || v == ScorerVariant::kNNC ||
         v == ScorerVariant::kContextualLSTM || v == ScorerVariant::kSiameseLSTM;
}

ScorerConfig ScorerConfig::defaults_for(ScorerVariant variant) {
  ScorerConfig c;
  c.variant = variant;
  switch (variant) {
    case ScorerVariant::kNNR:
    case ScorerVariant::kNNC:
      c.batch_size = 1024;
      c.dropout = 0.3;
      c.epochs = 10;
      c.max_sentence_len = 300;
      break;
    case ScorerVariant::kMeanContextual:
      c.batch_size = 32;
      c.dropout = 0.0;
      c.epochs = 50;
      c.max_sentence_len = 250;
      break;
    case ScorerVariant::kContextualLSTM:
      c.batch_size = 1024;
      c.dropout = 0.6;
      c.epochs = 10;
      c.max_sentence_len = 250;
      break;
    case ScorerVariant::kSiameseLSTM:
      c.batch_size = 1024;
      c.dropout = 0.2;
      c.epochs = 10;
      c.max_sentence_len = 300;
      c.share_reductor = true;
      break;
    case ScorerVariant::kSbertR:
    case ScorerVariant::kSbertC:
    case ScorerVariant::kSbertMR:
    case ScorerVariant::kSbertMC:
      c.batch_size = 32;
      c.dropout = 0.0;
      c.epochs = 20;
      c.max_sentence_len = 1;
      break;
  }
  return c;
}

void ScorerConfig::validate() const {
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ValidationError("dropout must be in [0, 1)");
  }
  if (epochs < 0) throw ValidationError("epochs must be >= 0");
  if (max_sentence_len < 1) throw ValidationError("max_sentence_len must be >= 1");
  if (hidden_dim < 1) throw ValidationError("hidden_dim must be >= 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (share_reductor != (variant == ScorerVariant::kSiameseLSTM)) {
    throw ValidationError("share_reductor must be set exactly for siamese-lstm");
  }
}

nlohmann::json to_json(const ScorerConfig& c) {
  return {{"variant", std::string(to_string(c.variant))},
          {"batch_size", c.batch_size},
          {"dropout", c.dropout},
          {"epochs", c.epochs},
          {"max_sentence_len", c.max_sentence_len},
          {"hidden_dim", c.hidden_dim},
          {"share_reductor", c.share_reductor},
          {"seed", c.seed},
          {"learning_rate", c.learning_rate}};
}

ScorerConfig scorer_config_from_json(const nlohmann::json& j) {
  try {
    ScorerConfig c = ScorerConfig::defaults_for(
        parse_scorer_variant(j.at("variant").get<std::string>()));
    c.batch_size = j.value("batch_size", c.batch_size);
    c.dropout = j.value("dropout", c.dropout);
    c.epochs = j.value("epochs", c.epochs);
    c.max_sentence_len = j.value("max_sentence_len", c.max_sentence_len);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.share_reductor = j.value("share_reductor", c.share_reductor);
    c.seed = j.value("seed", c.seed);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scorer config: ") + e.what());
  }
}

ScorerModel init_scorer(const ScorerConfig& config, std::size_t input_dim) {
  config.validate();
  if (input_dim == 0) throw ValidationError("input dimension must be > 0");
  ScorerModel m{config, input_dim, nn::ParamSet(config.seed)};
  Rng rng(Rng::derive(config.seed, 0x1417));
  const auto hidden = static_cast<std::size_t>(config.hidden_dim);
  if (is_sbert(config.variant)) {
    if (trains_classifier(config.variant)) {
      m.params.add_glorot("classifier.w", 3 * input_dim, 2, rng);
      m.params.add_zeros("classifier.b", {2});
    }
    return m;
  }
  if (uses_lstm(config.variant)) {
    const auto prefixes = reductor_prefixes(config);
    nn::init_bilstm(m.params, prefixes.sentence, input_dim, hidden, rng);
    if (!config.share_reductor) {
      nn::init_bilstm(m.params, prefixes.question, input_dim, hidden, rng);
    }
  }
  const std::size_t features = 1 + 2 * reduced_dim(m);
  m.params.add_glorot("hidden.w", features, hidden, rng);
  m.params.add_zeros("hidden.b", {hidden});
  m.params.add_glorot("output.w", hidden, 1, rng);
  m.params.add_zeros("output.b", {1});
  return m;
}

std::size_t reduced_dim(const ScorerModel& model) {
  if (uses_lstm(model.config.variant)) {
    return static_cast<std::size_t>(model.config.hidden_dim);
  }
  return model.input_dim;
}

namespace {

bool sigmoid_head(ScorerVariant v) { return v != ScorerVariant::kNNR; }

struct Reduced {
  std::vector<double> vector;
  nn::BiLstmTrace trace;
};

void check_input_dim(const ScorerModel& model, const TokenMatrix& m) {
  if (m.dim() != model.input_dim) {
    throw ShapeError("embedding dim " + std::to_string(m.dim()) +
                     " does not match model input dim " +
                     std::to_string(model.input_dim));
  }
}

Reduced reduce(const ScorerModel& model, const TokenMatrix& m,
               const std::string& prefix) {
  check_input_dim(model, m);
  Reduced r;
  if (uses_lstm(model.config.variant)) {
    r.vector = nn::bilstm_reduce(m, model.params, prefix, &r.trace);
  } else {
    r.vector = mean_reduce(m);
  }
  return r;
}

// Activations of the post-reduction head for one candidate.
struct HeadPass {
  std::vector<double> features;  // after dropout
  std::vector<double> dropout_scale;
  std::vector<double> hidden_pre;
  std::vector<double> hidden;
  double logit = 0.0;
  double score = 0.0;
};

HeadPass head_forward(const ScorerModel& model, std::span<const double> s,
                      std::span<const double> q, int position, bool train,
                      std::uint64_t noise_seed) {
  const std::size_t d = s.size();
  std::vector<double> features(1 + 2 * d);
  features[0] = static_cast<double>(position);
  for (std::size_t k = 0; k < d; ++k) {
    features[1 + k] = s[k];
    features[1 + d + k] = s[k] * q[k];
  }
  HeadPass h;
  Rng rng(noise_seed);
  auto dropped = nn::dropout(features, model.config.dropout, rng, train);
  h.features = std::move(dropped.output);
  h.dropout_scale = std::move(dropped.scale);
  const auto& hw = model.params.at("hidden.w");
  h.hidden_pre.resize(hw.cols());
  nn::affine(h.features, hw, model.params.at("hidden.b").data(), h.hidden_pre);
  h.hidden.resize(h.hidden_pre.size());
  for (std::size_t k = 0; k < h.hidden.size(); ++k) {
    h.hidden[k] = h.hidden_pre[k] > 0.0 ? h.hidden_pre[k] : 0.0;
  }
  double out = 0.0;
  nn::affine(h.hidden, model.params.at("output.w"), model.params.at("output.b").data(),
             std::span<double>(&out, 1));
  h.logit = out;
  h.score = sigmoid_head(model.config.variant) ? nn::sigmoid(out) : out;
  return h;
}

// Backward from d loss / d logit; returns (d s, d q).
std::pair<std::vector<double>, std::vector<double>> head_backward(
    const ScorerModel& model, const HeadPass& h, std::span<const double> s,
    std::span<const double> q, double dlogit, nn::ParamSet& grads) {
  const auto& ow = model.params.at("output.w");
  std::vector<double> dhidden(ow.rows());
  nn::affine_backward(h.hidden, ow, std::span<const double>(&dlogit, 1), dhidden,
                      grads.at("output.w"), grads.at("output.b").data());
  for (std::size_t k = 0; k < dhidden.size(); ++k) {
    if (h.hidden_pre[k] <= 0.0) dhidden[k] = 0.0;
  }
  const auto& hw = model.params.at("hidden.w");
  std::vector<double> dfeatures(hw.rows());
  nn::affine_backward(h.features, hw, dhidden, dfeatures, grads.at("hidden.w"),
                      grads.at("hidden.b").data());
  const std::size_t d = s.size();
  std::vector<double> ds(d), dq(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double g_plain = dfeatures[1 + k] * h.dropout_scale[1 + k];
    const double g_prod = dfeatures[1 + d + k] * h.dropout_scale[1 + d + k];
    ds[k] = g_plain + g_prod * q[k];
    dq[k] = g_prod * s[k];
  }
  return {std::move(ds), std::move(dq)};
}

std::span<const double> single_row(const TokenMatrix& m) {
  if (m.real_count() != 1 || !m.mask[0]) {
    throw ValidationError(
        "SBERT variants need sentence-level embeddings (exactly one row)");
  }
  return m.rows.row(0);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    dot += u[k] * v[k];
    nu += u[k] * u[k];
    nv += v[k] * v[k];
  }
  if (nu == 0.0 || nv == 0.0) {
    spdlog::warn("cosine of a zero-norm embedding; using 0");
    return 0.0;
  }
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

std::vector<double> sbert_features(std::span<const double> u,
                                   std::span<const double> v) {
  const std::size_t d = u.size();
  std::vector<double> x(3 * d);
  for (std::size_t k = 0; k < d; ++k) {
    x[k] = u[k];
    x[d + k] = v[k];
    x[2 * d + k] = std::abs(u[k] - v[k]);
  }
  return x;
}

double sbert_example(const ScorerModel& model, std::span<const double> u,
                     std::span<const double> v, int label, nn::ParamSet* grads,
                     bool train, std::uint64_t noise_seed, SbertLosses* parts) {
  if (u.size() != model.input_dim || v.size() != model.input_dim) {
    throw ShapeError("SBERT embeddings have dim " + std::to_string(u.size()) +
                     "/" + std::to_string(v.size()) + ", model expects " +
                     std::to_string(model.input_dim));
  }
  SbertLosses losses;
  const auto variant = model.config.variant;
  if (trains_regression(variant)) {
    losses.regression = nn::mse(cosine(u, v), static_cast<double>(label)).value;
  }
  if (trains_classifier(variant)) {
    Rng rng(noise_seed);
    auto dropped = nn::dropout(sbert_features(u, v), model.config.dropout, rng, train);
    const auto& w = model.params.at("classifier.w");
    std::vector<double> logits(2);
    nn::affine(dropped.output, w, model.params.at("classifier.b").data(), logits);
    const auto ce = nn::ce_softmax(logits, label);
    losses.classification = ce.value;
    if (grads != nullptr) {
      nn::affine_backward(dropped.output, w, ce.grad, {}, grads->at("classifier.w"),
                          grads->at("classifier.b").data());
    }
  }
  losses.total = losses.classification + losses.regression;
  if (parts != nullptr) *parts = losses;
  return losses.total;
}

}  // namespace

double forward_fig1(const ScorerModel& model, const TokenMatrix& sentence,
                    const TokenMatrix& question, int position) {
  if (is_sbert(model.config.variant)) {
    throw ValidationError("forward_fig1 does not apply to SBERT variants");
  }
  const auto prefixes = reductor_prefixes(model.config);
  const auto s = reduce(model, sentence, prefixes.sentence);
  const auto q = reduce(model, question, prefixes.question);
  return head_forward(model, s.vector, q.vector, position, false, 0).score;
}

SbertOutput forward_sbert(const ScorerModel& model, std::span<const double> u,
                          std::span<const double> v) {
  if (!is_sbert(model.config.variant)) {
    throw ValidationError("forward_sbert needs an SBERT variant");
  }
  if (u.size() != v.size()) {
    throw ShapeError("forward_sbert: u has dim " + std::to_string(u.size()) +
                     ", v has dim " + std::to_string(v.size()));
  }
  SbertOutput out;
  out.regression = cosine(u, v);
  if (model.params.contains("classifier.w")) {
    std::vector<double> logits(2);
    nn::affine(sbert_features(u, v), model.params.at("classifier.w"),
               model.params.at("classifier.b").data(), logits);
    const auto p = nn::softmax(logits);
    out.logits = {logits[0], logits[1]};
    out.probabilities = {p[0], p[1]};
  } else {
    out.probabilities = {0.5, 0.5};
  }
  return out;
}

SbertLosses sbert_losses(const ScorerModel& model, std::span<const double> u,
                         std::span<const double> v, int label) {
  SbertLosses parts;
  sbert_example(model, u, v, label, nullptr, false, 0, &parts);
  return parts;
}

double group_loss(const ScorerModel& model, const QuestionGroup& group,
                  nn::ParamSet* grads, bool train) {
  const auto variant = model.config.variant;
  double total = 0.0;
  if (is_sbert(variant)) {
    const auto v = single_row(group.question);
    for (const auto& ex : group.examples) {
      total += sbert_example(model, single_row(ex.sentence), v, ex.label, grads,
                             train, ex.noise_seed, nullptr);
    }
    return total;
  }

  const auto prefixes = reductor_prefixes(model.config);
  const bool lstm = uses_lstm(variant);
  const auto q = reduce(model, group.question, prefixes.question);
  std::vector<double> dq_total(q.vector.size(), 0.0);
  for (const auto& ex : group.examples) {
    const auto s = reduce(model, ex.sentence, prefixes.sentence);
    const auto h = head_forward(model, s.vector, q.vector, ex.position, train,
                                ex.noise_seed);
    double dlogit = 0.0;
    if (variant == ScorerVariant::kNNR) {
      const auto l = nn::mse(h.logit, ex.target);
      total += l.value;
      dlogit = l.grad;
    } else {
      const auto l = nn::bce(h.score, static_cast<double>(ex.label));
      total += l.value;
      dlogit = l.grad * h.score * (1.0 - h.score);
    }
    if (grads == nullptr) continue;
    auto [ds, dq] = head_backward(model, h, s.vector, q.vector, dlogit, *grads);
    for (std::size_t k = 0; k < dq.size(); ++k) dq_total[k] += dq[k];
    if (lstm) {
      nn::bilstm_backward(ex.sentence, model.params, prefixes.sentence, s.trace,
                          ds, *grads);
    }
  }
  if (grads != nullptr && lstm) {
    nn::bilstm_backward(group.question, model.params, prefixes.question, q.trace,
                        dq_total, *grads);
  }
  return total;
}

std::vector<double> group_scores(const ScorerModel& model,
                                 const QuestionGroup& group) {
  std::vector<double> scores;
  scores.reserve(group.examples.size());
  if (is_sbert(model.config.variant)) {
    const auto v = single_row(group.question);
    const bool cls = predicts_with_classifier(model.config.variant);
    for (const auto& ex : group.examples) {
      const auto out = forward_sbert(model, single_row(ex.sentence), v);
      scores.push_back(cls ? out.probabilities[1] : out.regression);
    }
    return scores;
  }
  const auto prefixes = reductor_prefixes(model.config);
  const auto q = reduce(model, group.question, prefixes.question);
  for (const auto& ex : group.examples) {
    const auto s = reduce(model, ex.sentence, prefixes.sentence);
    scores.push_back(head_forward(model, s.vector, q.vector, ex.position, false, 0).score);
  }
  return scores;
}

namespace {

int matrix_len(const ScorerConfig& config) {
  // Two rows are requested for SBERT so that multi-row stores are detected.
  return is_sbert(config.variant) ? 2 : config.max_sentence_len;
}

}  // namespace

TrainResult train_scorer(std::span<const LabeledQuestion> data,
                         const FeatureSource& features, const ScorerConfig& config,
                         const TrainOptions& options) {
  config.validate();
  std::vector<std::pair<std::size_t, std::size_t>> examples;
  for (std::size_t qi = 0; qi < data.size(); ++qi) {
    for (std::size_t ci = 0; ci < data[qi].pool.size(); ++ci) examples.emplace_back(qi, ci);
  }
  if (examples.empty()) throw ValidationError("empty training set");

  TrainResult result{init_scorer(config, features.dim()), {}};
  ScorerModel& model = result.model;
  auto adam = nn::AdamState::for_params(model.params);
  const nn::AdamConfig adam_config{config.learning_rate, 0.9, 0.999, 1e-8};
  std::vector<nn::ParamSet> chunk_grads(kGradientChunks, model.params.zeros_like());
  const int len = matrix_len(config);
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto order = examples;
    Rng shuffle_rng(Rng::derive(config.seed, 0x5EED, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(std::span(order));
    double epoch_loss = 0.0;

    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      std::vector<QuestionGroup> groups;
      std::vector<std::size_t> group_question;
      std::unordered_map<std::size_t, std::size_t> group_of;
      for (std::size_t i = start; i < end; ++i) {
        const auto [qi, ci] = order[i];
        const LabeledQuestion& lq = data[qi];
        auto [it, fresh] = group_of.emplace(qi, groups.size());
        if (fresh) {
          groups.push_back({features.question_matrix(lq.question, len), {}});
          group_question.push_back(qi);
        }
        ScoringExample ex;
        ex.sentence = features.sentence_matrix(lq.question, lq.pool[ci], len);
        ex.position = lq.pool[ci].position;
        ex.target = lq.targets[ci];
        ex.label = lq.labels[ci];
        ex.noise_seed = Rng::derive(config.seed, static_cast<std::uint64_t>(epoch) + 1,
                                    static_cast<std::uint64_t>(i));
        groups[it->second].examples.push_back(std::move(ex));
      }

      const std::size_t chunks = std::min(kGradientChunks, groups.size());
      std::vector<double> chunk_loss(chunks, 0.0);
      parallel_for(chunks, options.jobs, [&](std::size_t c) {
        chunk_grads[c].set_zero();
        const std::size_t lo = groups.size() * c / chunks;
        const std::size_t hi = groups.size() * (c + 1) / chunks;
        for (std::size_t g = lo; g < hi; ++g) {
          chunk_loss[c] += group_loss(model, groups[g], &chunk_grads[c], true);
        }
      });
      for (std::size_t c = 1; c < chunks; ++c) chunk_grads[0].add_scaled(chunk_grads[c], 1.0);
      chunk_grads[0].scale(1.0 / static_cast<double>(end - start));
      nn::adam_step(model.params, chunk_grads[0], adam, adam_config);
      if (!model.params.all_finite()) {
        throw NumericalError("non-finite parameters after epoch " +
                             std::to_string(epoch) + " batch starting at " +
                             std::to_string(start));
      }
      for (double l : chunk_loss) epoch_loss += l;
    }
    const double mean_loss = epoch_loss / static_cast<double>(order.size());
    if (!std::isfinite(mean_loss)) {
      throw NumericalError("non-finite training loss in epoch " + std::to_string(epoch));
    }
    result.epoch_losses.push_back(mean_loss);
    if (options.on_epoch) options.on_epoch(epoch, mean_loss);
  }
  return result;
}

std::vector<double> predict_scores(const ScorerModel& model,
                                   const Question& question,
                                   std::span<const CandidateSentence> pool,
                                   const FeatureSource& features) {
  if (pool.empty()) return {};
  if (features.dim() != model.input_dim) {
    throw ShapeError("embedding dim " + std::to_string(features.dim()) +
                     " does not match model input dim " +
                     std::to_string(model.input_dim));
  }
  const int len = matrix_len(model.config);
  QuestionGroup group{features.question_matrix(question, len), {}};
  group.examples.reserve(pool.size());
  for (const auto& c : pool) {
    ScoringExample ex;
    ex.sentence = features.sentence_matrix(question, c, len);
    ex.position = c.position;
    group.examples.push_back(std::move(ex));
  }
  return group_scores(model, group);
}

std::string encode_scorer(const ScorerModel& model) {
  const nlohmann::json meta = {{"kind", "scorer"},
                               {"input_dim", model.input_dim},
                               {"config", to_json(model.config)}};
  return nn::encode_checkpoint(model.params, meta.dump());
}

ScorerModel decode_scorer(std::string_view bytes) {
  auto ck = nn::decode_checkpoint(bytes);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(ck.metadata);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("scorer checkpoint metadata: ") + e.what());
  }
  if (meta.value("kind", "") != "scorer") {
    throw ParseError("checkpoint does not hold a scorer model");
  }
  ScorerModel m;
  m.config = scorer_config_from_json(meta.at("config"));
  m.input_dim = meta.at("input_dim").get<std::size_t>();
  const auto expected = init_scorer(m.config, m.input_dim);
  if (expected.params.names() != ck.params.names()) {
    throw ParseError("scorer checkpoint parameters do not match its architecture");
  }
  for (const auto& [name, t] : expected.params.tensors()) {
    if (ck.params.at(name).shape() != t.shape()) {
      throw ParseError("scorer checkpoint: shape mismatch for '" + name + "'");
    }
  }
  m.params = std::move(ck.params);
  return m;
}

}  // namespace qfsum
