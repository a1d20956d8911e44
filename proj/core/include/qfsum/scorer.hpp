#ifndef QFSUM_SCORER_HPP_
#define QFSUM_SCORER_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <nlohmann/json_fwd.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qfsum/features.hpp"
#include "qfsum/labeling.hpp"
#include "qfsum/params.hpp"
#include "qfsum/token_matrix.hpp"

namespace qfsum {

enum class ScorerVariant {
  kNNR,             // BiLSTM reductors, linear output, MSE on ROUGE targets
  kNNC,             // BiLSTM reductors, sigmoid output, BCE on top-5 labels
  kMeanContextual,  // mean of contextual token vectors, NNC head
  kContextualLSTM,  // BiLSTM over contextual token vectors, NNC head
  kSiameseLSTM,     // NNC with one reductor shared by sentence and question
  kSbertR,          // cosine head
  kSbertC,          // softmax over [u; v; |u - v|]
  kSbertMR,         // both heads trained, cosine used for prediction
  kSbertMC,         // both heads trained, softmax used for prediction
};

std::string_view to_string(ScorerVariant variant);
// Accepts nnr, nnc, mean-contextual, contextual-lstm, siamese-lstm, sbert-r,
// sbert-c, sbert-m-r, sbert-m-c. Throws ValidationError.
ScorerVariant parse_scorer_variant(std::string_view name);

bool is_sbert(ScorerVariant variant);
bool uses_lstm(ScorerVariant variant);

struct ScorerConfig {
  ScorerVariant variant = ScorerVariant::kNNC;
  int batch_size = 1024;
  double dropout = 0.3;
  int epochs = 10;
  int max_sentence_len = 300;
  int hidden_dim = 100;
  bool share_reductor = false;
  std::uint64_t seed = 0;
  double learning_rate = 1e-3;

  // Per-variant hyperparameters (batch, dropout, epochs, sentence length).
  static ScorerConfig defaults_for(ScorerVariant variant);
  // Throws ValidationError when a field is out of range or share_reductor
  // disagrees with the variant.
  void validate() const;
};

nlohmann::json to_json(const ScorerConfig& config);
ScorerConfig scorer_config_from_json(const nlohmann::json& j);

struct ScorerModel {
  ScorerConfig config;
  std::size_t input_dim = 0;  // token (or sentence) embedding dimension
  nn::ParamSet params;
};

ScorerModel init_scorer(const ScorerConfig& config, std::size_t input_dim);

// Dimension of the reduced sentence/question embedding.
std::size_t reduced_dim(const ScorerModel& model);

// Score of one candidate under the position/embedding/similarity network.
// Sigmoid output for the classification family, identity for NNR.
double forward_fig1(const ScorerModel& model, const TokenMatrix& sentence,
                    const TokenMatrix& question, int position);

struct SbertOutput {
  double regression = 0.0;  // cosine(u, v)
  std::array<double, 2> logits{};
  std::array<double, 2> probabilities{};
};

// Zero-norm vectors give cosine 0 (with a warning).
SbertOutput forward_sbert(const ScorerModel& model, std::span<const double> u,
                          std::span<const double> v);

struct SbertLosses {
  double classification = 0.0;
  double regression = 0.0;
  double total = 0.0;  // what the variant optimizes
};
SbertLosses sbert_losses(const ScorerModel& model, std::span<const double> u,
                         std::span<const double> v, int label);

// One training example with its question-level context. `noise_seed` drives
// the example's dropout mask.
struct ScoringExample {
  TokenMatrix sentence;
  int position = 1;
  double target = 0.0;
  int label = 0;
  std::uint64_t noise_seed = 0;
};

struct QuestionGroup {
  TokenMatrix question;
  std::vector<ScoringExample> examples;
};

// Sum of per-example losses over the group. When `grads` is non-null the
// exact gradient of that sum is accumulated into it. Dropout is active only
// when `train` is set.
double group_loss(const ScorerModel& model, const QuestionGroup& group,
                  nn::ParamSet* grads, bool train);

// Eval-mode scores of every example in the group, in order.
std::vector<double> group_scores(const ScorerModel& model,
                                 const QuestionGroup& group);

struct TrainOptions {
  int jobs = 1;
  std::function<void(int epoch, double loss)> on_epoch;
};

struct TrainResult {
  ScorerModel model;
  std::vector<double> epoch_losses;  // mean training loss per epoch
};

// Mini-batch Adam training. Throws ValidationError on an empty training
// set, NumericalError if a parameter becomes non-finite.
TrainResult train_scorer(std::span<const LabeledQuestion> data,
                         const FeatureSource& features, const ScorerConfig& config,
                         const TrainOptions& options = {});

// One score per candidate, order-aligned with `pool`; dropout disabled.
std::vector<double> predict_scores(const ScorerModel& model,
                                   const Question& question,
                                   std::span<const CandidateSentence> pool,
                                   const FeatureSource& features);

std::string encode_scorer(const ScorerModel& model);
ScorerModel decode_scorer(std::string_view bytes);

}  // namespace qfsum

#endif  // QFSUM_SCORER_HPP_
