#ifndef QFSUM_LABELING_HPP_
#define QFSUM_LABELING_HPP_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qfsum/corpus.hpp"

namespace qfsum {

inline constexpr int kPositiveLabels = 5;

// ROUGE-SU4 F1 of each candidate against the question's ideal answers.
std::vector<double> label_regression(const Question& question,
                                     std::span<const CandidateSentence> pool);

// The k highest targets get label 1; ties at the cut go to the earlier
// candidate.
std::vector<int> label_classification(std::span<const double> targets,
                                      int k = kPositiveLabels);

struct QuestionLabels {
  std::string question_id;
  std::vector<double> targets;
  std::vector<int> labels;

  bool operator==(const QuestionLabels&) const = default;
};

// A question prepared for supervised training: pool plus both label kinds.
struct LabeledQuestion {
  Question question;
  std::vector<CandidateSentence> pool;
  std::vector<double> targets;
  std::vector<int> labels;
};

QuestionLabels label_question(const Question& question,
                              std::span<const CandidateSentence> pool,
                              int k = kPositiveLabels);

// Builds pools and labels. Questions with no candidates or no ideal answer
// are skipped with a warning. `cache`, when given, supplies precomputed
// labels keyed by question id.
std::vector<LabeledQuestion> prepare_labeled(
    std::span<const Question> questions, int cap = kDefaultCandidateCap,
    int k = kPositiveLabels,
    const std::map<std::string, QuestionLabels>* cache = nullptr);

// Label cache: one JSON record {id, targets, labels} per line.
std::string write_label_cache(std::span<const QuestionLabels> labels);
std::map<std::string, QuestionLabels> read_label_cache(std::string_view contents);

}  // namespace qfsum

#endif  // QFSUM_LABELING_HPP_
