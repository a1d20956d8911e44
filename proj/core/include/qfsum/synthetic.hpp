#ifndef QFSUM_SYNTHETIC_HPP_
#define QFSUM_SYNTHETIC_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qfsum/corpus.hpp"
#include "qfsum/embeddings.hpp"

namespace qfsum {

// Generated corpus with a planted answer. Every question belongs to a
// topic; `marked` of its candidates are written from that topic's
// vocabulary and together form the ideal answer, the rest come from other
// topics. Word vectors cluster around a per-topic centre.
struct SyntheticSpec {
  int questions = 200;
  int candidates = 20;
  int marked = 5;
  int topics = 8;
  int words_per_topic = 16;
  int filler_words = 24;
  int sentence_len = 6;
  int filler_per_sentence = 2;
  int question_len = 5;
  int dim = 100;
  double noise = 0.5;
  int snippet_size = 5;  // sentences per snippet
  bool mixed_types = false;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticCorpus {
  std::vector<Question> questions;
  EmbeddingTable table;
  std::map<std::string, std::vector<int>> marked;  // planted positions
};

SyntheticCorpus make_synthetic(const SyntheticSpec& spec);

}  // namespace qfsum

#endif  // QFSUM_SYNTHETIC_HPP_
