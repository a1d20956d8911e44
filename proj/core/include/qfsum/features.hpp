#ifndef QFSUM_FEATURES_HPP_
#define QFSUM_FEATURES_HPP_

#include <vector>

#include "qfsum/corpus.hpp"
#include "qfsum/embeddings.hpp"

namespace qfsum {

// Sum of token vectors and token count for a text span; mean = sum / count.
// Sums compose, so grouped means (summary so far, rest of document) are
// cheap to assemble.
struct MeanStats {
  std::vector<double> sum;
  double count = 0.0;
};

// Where token embeddings come from: a static word-vector table or a store
// of precomputed contextual vectors. Implementations are immutable and safe
// for concurrent reads.
class FeatureSource {
 public:
  virtual ~FeatureSource() = default;

  virtual std::size_t dim() const = 0;
  virtual TokenMatrix question_matrix(const Question& q, int max_len) const = 0;
  virtual TokenMatrix sentence_matrix(const Question& q,
                                      const CandidateSentence& c,
                                      int max_len) const = 0;
  virtual MeanStats question_stats(const Question& q) const = 0;
  virtual MeanStats sentence_stats(const Question& q,
                                   const CandidateSentence& c) const = 0;
};

class WordVectorFeatures final : public FeatureSource {
 public:
  explicit WordVectorFeatures(const EmbeddingTable& table) : table_(table) {}

  std::size_t dim() const override { return table_.dim(); }
  TokenMatrix question_matrix(const Question& q, int max_len) const override;
  TokenMatrix sentence_matrix(const Question& q, const CandidateSentence& c,
                              int max_len) const override;
  MeanStats question_stats(const Question& q) const override;
  MeanStats sentence_stats(const Question& q,
                           const CandidateSentence& c) const override;

 private:
  const EmbeddingTable& table_;
};

// Looks up (question id, slot); a missing entry raises KeyError.
class ContextualFeatures final : public FeatureSource {
 public:
  explicit ContextualFeatures(const ContextualStore& store) : store_(store) {}

  std::size_t dim() const override { return store_.dim(); }
  TokenMatrix question_matrix(const Question& q, int max_len) const override;
  TokenMatrix sentence_matrix(const Question& q, const CandidateSentence& c,
                              int max_len) const override;
  MeanStats question_stats(const Question& q) const override;
  MeanStats sentence_stats(const Question& q,
                           const CandidateSentence& c) const override;

 private:
  const ContextualStore& store_;
};

}  // namespace qfsum

#endif  // QFSUM_FEATURES_HPP_
