#ifndef QFSUM_EMBEDDINGS_HPP_
#define QFSUM_EMBEDDINGS_HPP_

#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qfsum/tensor.hpp"
#include "qfsum/token_matrix.hpp"

namespace qfsum {

inline constexpr std::size_t kDefaultEmbeddingDim = 100;

// Static word-vector table (word2vec text format).
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = kDefaultEmbeddingDim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }

  // Returns false (and keeps the existing vector) on a duplicate token.
  bool insert(const std::string& token, std::span<const double> vector);
  // Empty span when the token is out of vocabulary.
  std::span<const double> find(const std::string& token) const;

  // Tokens in insertion order.
  const std::vector<std::string>& tokens() const { return order_; }

  std::string to_word2vec_text() const;

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> order_;
  std::vector<double> data_;
};

// Header "V D", then V lines of "token v1 ... vD". Throws ParseError with the
// 1-based line number on malformed or mis-sized lines; duplicate tokens keep
// the first vector and log a warning.
EmbeddingTable load_word_vectors(std::string_view text);

// Row i is the vector of tokens[i] (zero for OOV, still mask 1); truncated to
// max_len and zero-padded to exactly max_len rows.
TokenMatrix embed_tokens(const EmbeddingTable& table,
                         std::span<const std::string> tokens, int max_len);

// Mask-weighted mean of the real rows; zero vector when there are none.
std::vector<double> mean_reduce(const TokenMatrix& matrix);

// ---- precomputed contextual embeddings ------------------------------------

inline constexpr int kQuestionSlot = 0;

struct ContextKey {
  std::string question_id;
  int slot = kQuestionSlot;  // 0 = question body, k >= 1 = candidate position

  auto operator<=>(const ContextKey&) const = default;
};

std::string slot_name(int slot);

class ContextualStore {
 public:
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }

  // Throws ValidationError on dim disagreement, zero rows or duplicate key.
  void insert(const std::string& question_id, int slot, nn::Tensor rows);
  bool contains(const std::string& question_id, int slot) const;
  // Throws KeyError naming the question and slot.
  const nn::Tensor& at(const std::string& question_id, int slot) const;

  std::vector<ContextKey> keys() const;
  const std::map<ContextKey, nn::Tensor>& entries() const { return entries_; }

 private:
  std::size_t dim_ = 0;
  std::map<ContextKey, nn::Tensor> entries_;
};

// Contextual-embedding file; layout in docs/contextual_format.md.
ContextualStore load_contextual(std::string_view bytes);
std::string write_contextual(const ContextualStore& store);

}  // namespace qfsum

#endif  // QFSUM_EMBEDDINGS_HPP_
