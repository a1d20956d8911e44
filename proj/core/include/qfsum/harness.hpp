#ifndef QFSUM_HARNESS_HPP_
#define QFSUM_HARNESS_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <nlohmann/json_fwd.hpp>
#include <span>
#include <string>
#include <vector>

#include "qfsum/corpus.hpp"
#include "qfsum/features.hpp"
#include "qfsum/labeling.hpp"
#include "qfsum/scorer.hpp"
#include "qfsum/summarizer.hpp"

namespace qfsum {

// Questions are sorted by id, shuffled with `seed`, then cut into k
// contiguous folds; the first N mod k folds hold one extra question.
// Throws ValidationError when k < 2 or there are fewer than k questions.
std::vector<std::vector<Question>> kfold_split(std::span<const Question> questions,
                                               int k, std::uint64_t seed);

struct SplitSizes {
  std::size_t train = 0;
  std::size_t test = 0;
};

// train = floor(train_parts * N / (train_parts + test_parts)), test takes
// the rest.
SplitSizes split_sizes(std::size_t n, int train_parts = 5, int test_parts = 1);

struct Split {
  std::vector<Question> train;
  std::vector<Question> test;
};

// Same canonical shuffle as kfold_split. Needs at least
// train_parts + test_parts questions.
Split split_ratio(std::span<const Question> questions, std::uint64_t seed,
                  int train_parts = 5, int test_parts = 1);

struct EvalReport {
  std::string method;
  std::vector<double> scores;  // one per fold or run
  double mean = 0.0;
  double stdev = 0.0;          // sample standard deviation, 0 for one score

  static EvalReport from_scores(std::string method, std::vector<double> scores);
};

struct MethodDescriptor {
  enum class Kind { kFirstN, kRandom, kConstant, kScorer };
  Kind kind = Kind::kFirstN;
  ScorerConfig scorer;  // used when kind == kScorer

  std::string name() const;
  // "firstn", "random", "constant", or a scorer variant name (which gets
  // that variant's defaults).
  static MethodDescriptor parse(std::string_view name);
};

using CandidateScorer = std::function<std::vector<double>(
    const Question&, std::span<const CandidateSentence>)>;

struct HarnessOptions {
  const FeatureSource* features = nullptr;  // required by scorer methods
  int cap = kDefaultCandidateCap;
  int jobs = 1;
  const std::map<std::string, QuestionLabels>* label_cache = nullptr;
  std::function<void(int epoch, double loss)> on_epoch;
};

// Trains when the method needs it; `seed` drives training and random
// selection.
CandidateScorer make_candidate_scorer(const MethodDescriptor& method,
                                      std::span<const Question> train,
                                      const HarnessOptions& options, std::uint64_t seed);

CandidateScorer model_candidate_scorer(const ScorerModel& model,
                                       const FeatureSource& features);

struct QuestionResult {
  SummaryResult summary;
  std::vector<double> scores;
  double f1 = 0.0;
};

// Summarizes every evaluable question in `test` (others are skipped with a
// warning) and scores it against its ideal answers.
std::vector<QuestionResult> summarize_and_score(std::span<const Question> test,
                                                const CandidateScorer& scorer,
                                                int cap = kDefaultCandidateCap,
                                                int jobs = 1);

double summary_f1(const Question& question, std::string_view summary_text);

double mean_f1(std::span<const QuestionResult> results);

// Per fold: train on the other folds, summarize the held-out fold and
// average its ROUGE-SU4 F1. Throws ValidationError naming a fold with no
// evaluable question.
EvalReport cross_validate(const MethodDescriptor& method,
                          std::span<const Question> corpus, int k, std::uint64_t seed,
                          const HarnessOptions& options = {});

// Method column plus "mean ± stdev" at three decimals, rows in input order.
std::string report_table(std::span<const EvalReport> reports);

nlohmann::json report_json(std::span<const EvalReport> reports);

}  // namespace qfsum

#endif  // QFSUM_HARNESS_HPP_
