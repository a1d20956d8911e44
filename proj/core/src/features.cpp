#include "qfsum/features.hpp"

#include "qfsum/error.hpp"

namespace qfsum {

namespace {

MeanStats token_stats(const EmbeddingTable& table,
                      const std::vector<std::string>& tokens) {
  MeanStats s{std::vector<double>(table.dim(), 0.0),
              static_cast<double>(tokens.size())};
  for (const auto& t : tokens) {
    const auto v = table.find(t);
    for (std::size_t k = 0; k < v.size(); ++k) s.sum[k] += v[k];
  }
  return s;
}

TokenMatrix pad_rows(const nn::Tensor& rows, int max_len) {
  if (max_len < 1) throw ValidationError("max_len must be >= 1");
  const std::size_t len = static_cast<std::size_t>(max_len);
  TokenMatrix m{nn::Tensor({len, rows.cols()}), std::vector<std::uint8_t>(len, 0)};
  const std::size_t used = std::min(len, rows.rows());
  for (std::size_t r = 0; r < used; ++r) {
    m.mask[r] = 1;
    const auto src = rows.row(r);
    std::copy(src.begin(), src.end(), m.rows.row(r).begin());
  }
  return m;
}

MeanStats row_stats(const nn::Tensor& rows) {
  MeanStats s{std::vector<double>(rows.cols(), 0.0), static_cast<double>(rows.rows())};
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const auto row = rows.row(r);
    for (std::size_t k = 0; k < row.size(); ++k) s.sum[k] += row[k];
  }
  return s;
}

}  // namespace

TokenMatrix WordVectorFeatures::question_matrix(const Question& q, int max_len) const {
  return embed_tokens(table_, tokenize(q.body), max_len);
}

TokenMatrix WordVectorFeatures::sentence_matrix(const Question&,
                                                const CandidateSentence& c,
                                                int max_len) const {
  return embed_tokens(table_, c.tokens, max_len);
}

MeanStats WordVectorFeatures::question_stats(const Question& q) const {
  return token_stats(table_, tokenize(q.body));
}

MeanStats WordVectorFeatures::sentence_stats(const Question&,
                                             const CandidateSentence& c) const {
  return token_stats(table_, c.tokens);
}

TokenMatrix ContextualFeatures::question_matrix(const Question& q, int max_len) const {
  return pad_rows(store_.at(q.id, kQuestionSlot), max_len);
}

TokenMatrix ContextualFeatures::sentence_matrix(const Question& q,
                                                const CandidateSentence& c,
                                                int max_len) const {
  return pad_rows(store_.at(q.id, c.position), max_len);
}

MeanStats ContextualFeatures::question_stats(const Question& q) const {
  return row_stats(store_.at(q.id, kQuestionSlot));
}

MeanStats ContextualFeatures::sentence_stats(const Question& q,
                                             const CandidateSentence& c) const {
  return row_stats(store_.at(q.id, c.position));
}

}  // namespace qfsum
