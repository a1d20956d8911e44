#ifndef QFSUM_CORPUS_HPP_
#define QFSUM_CORPUS_HPP_

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace qfsum {

inline constexpr int kDefaultCandidateCap = 50;

enum class QuestionType { kSummary, kFactoid, kYesNo, kList };

std::string_view to_string(QuestionType type);
// Accepts "summary", "factoid", "yesno", "list". Throws ValidationError.
QuestionType parse_question_type(std::string_view name);

struct SourceSnippet {
  std::string document_id;
  std::string text;

  bool operator==(const SourceSnippet&) const = default;
};

struct Question {
  std::string id;
  QuestionType type = QuestionType::kSummary;
  std::string body;
  std::vector<SourceSnippet> snippets;
  std::vector<std::string> ideal_answers;

  bool operator==(const Question&) const = default;
};

struct CandidateSentence {
  std::string text;
  std::vector<std::string> tokens;
  int position = 0;  // 1-based index in the question's candidate pool
  std::string document_id;

  bool operator==(const CandidateSentence&) const = default;
};

// Reads a BioASQ-style document: {"questions": [{id, body, type,
// ideal_answer, snippets: [{text, document}]}]}. A scalar ideal_answer is
// wrapped into a one-element list; snippets with blank text are dropped.
// Throws ParseError naming the entry index, ValidationError on unknown type.
std::vector<Question> parse_bioasq(std::string_view document);
std::string serialize_bioasq(const std::vector<Question>& questions);

// Normalized dump: one JSON question record per line.
std::string write_corpus_dump(const std::vector<Question>& questions);
std::vector<Question> read_corpus_dump(std::string_view contents);

// Loads either format, sniffing for a leading {"questions": ...} document.
std::vector<Question> load_corpus(std::string_view contents);

// Splits after '.', '?' or '!' when followed by whitespace and then an
// uppercase letter or a digit. Sentences are whitespace-trimmed, never empty.
std::vector<std::string> split_sentences(std::string_view text);

// Lowercases ASCII letters and splits on maximal runs of characters that are
// not ASCII alphanumerics. Empty tokens are dropped.
std::vector<std::string> tokenize(std::string_view text);

// Candidate pool: sentences in snippet order, then sentence order inside each
// snippet, truncated to `cap`. Duplicates are kept at distinct positions.
std::vector<CandidateSentence> build_candidates(const Question& question,
                                                int cap = kDefaultCandidateCap);

// Usable for training/evaluation: non-empty pool and ideal answers.
bool is_evaluable(const Question& question, int cap = kDefaultCandidateCap);

}  // namespace qfsum

#endif  // QFSUM_CORPUS_HPP_
