#ifndef QFSUM_SUMMARIZER_HPP_
#define QFSUM_SUMMARIZER_HPP_

#include <span>
#include <string>
#include <vector>

#include "qfsum/corpus.hpp"

namespace qfsum {

struct SummaryResult {
  std::string question_id;
  std::vector<int> selected;  // ascending candidate positions
  std::string text;
  int n_used = 0;

  bool operator==(const SummaryResult&) const = default;
};

// Sentences extracted per question type: summary 6, factoid 2, yesno 2,
// list 3.
int n_for_type(QuestionType type);

// The n highest scores win; equal scores prefer the smaller position.
// Selected sentences are emitted in position order, joined by one space.
// Throws ValidationError when scores and pool lengths differ.
SummaryResult select_top_n(std::span<const double> scores,
                           std::span<const CandidateSentence> pool, int n);

SummaryResult firstn(std::span<const CandidateSentence> pool, QuestionType type);

// Answer file: {"questions": [{"id", "ideal_answer"}]}.
std::string write_answer_file(std::span<const SummaryResult> summaries);

// Audit file, one JSON line per question: id, selected positions, scores.
struct AuditRecord {
  SummaryResult summary;
  std::vector<double> scores;
};
std::string write_audit_file(std::span<const AuditRecord> records);

}  // namespace qfsum

#endif  // QFSUM_SUMMARIZER_HPP_
