#include "qfsum/summarizer.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <numeric>

#include "qfsum/error.hpp"

namespace qfsum {

int n_for_type(QuestionType type) {
  switch (type) {
    case QuestionType::kSummary:
      return 6;
    case QuestionType::kFactoid:
      return 2;
    case QuestionType::kYesNo:
      return 2;
    case QuestionType::kList:
      return 3;
  }
  return 6;
}

namespace {

SummaryResult render(std::span<const CandidateSentence> pool,
                     std::vector<std::size_t> indices, int n) {
  std::sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
    return pool[a].position < pool[b].position;
  });
  SummaryResult r;
  r.n_used = n;
  for (std::size_t i : indices) {
    r.selected.push_back(pool[i].position);
    if (!r.text.empty()) r.text += ' ';
    r.text += pool[i].text;
  }
  return r;
}

}  // namespace

SummaryResult select_top_n(std::span<const double> scores,
                           std::span<const CandidateSentence> pool, int n) {
  if (scores.size() != pool.size()) {
    throw ValidationError("select_top_n: " + std::to_string(scores.size()) +
                          " scores for " + std::to_string(pool.size()) +
                          " candidates");
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return pool[a].position < pool[b].position;
  });
  const auto keep = std::min(order.size(), static_cast<std::size_t>(std::max(n, 0)));
  order.resize(keep);
  return render(pool, std::move(order), n);
}

SummaryResult firstn(std::span<const CandidateSentence> pool, QuestionType type) {
  std::vector<double> scores;
  scores.reserve(pool.size());
  for (const auto& c : pool) scores.push_back(-static_cast<double>(c.position));
  return select_top_n(scores, pool, n_for_type(type));
}

std::string write_answer_file(std::span<const SummaryResult> summaries) {
  nlohmann::json questions = nlohmann::json::array();
  for (const auto& s : summaries) {
    questions.push_back({{"id", s.question_id}, {"ideal_answer", s.text}});
  }
  return nlohmann::json{{"questions", questions}}.dump(2) + "\n";
}

std::string write_audit_file(std::span<const AuditRecord> records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::json j = {{"id", r.summary.question_id},
                        {"n", r.summary.n_used},
                        {"selected", r.summary.selected},
                        {"scores", r.scores}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace qfsum
