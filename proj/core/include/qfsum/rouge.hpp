#ifndef QFSUM_ROUGE_HPP_
#define QFSUM_ROUGE_HPP_

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qfsum {

inline constexpr int kSu4MaxSkip = 4;

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// A unigram (is_pair == false, second empty) or an ordered skip-bigram.
struct SkipUnit {
  bool is_pair = false;
  std::string first;
  std::string second;

  auto operator<=>(const SkipUnit&) const = default;
  bool operator==(const SkipUnit&) const = default;
};

// Every unigram plus every ordered pair (tokens[i], tokens[j]) with
// 0 < j - i <= max_skip + 1, returned sorted (a multiset).
std::vector<SkipUnit> skip_units(std::span<const std::string> tokens,
                                 int max_skip = kSu4MaxSkip);

// Counted multiset of skip units, precomputed for repeated scoring against
// the same reference.
class UnitBag {
 public:
  UnitBag() = default;
  explicit UnitBag(std::span<const std::string> tokens,
                   int max_skip = kSu4MaxSkip);

  std::size_t total() const { return total_; }
  std::size_t distinct() const { return counts_.size(); }

  // Clipped multiset intersection size.
  friend std::size_t match_count(const UnitBag& a, const UnitBag& b);

 private:
  std::vector<std::pair<SkipUnit, std::size_t>> counts_;
  std::size_t total_ = 0;
};

RougeScore rouge_from_counts(std::size_t matches, std::size_t candidate_total,
                             std::size_t reference_total);

RougeScore rouge_su4(std::span<const std::string> candidate,
                     std::span<const std::string> reference);
RougeScore rouge_su4(const UnitBag& candidate, const UnitBag& reference);

// Best-F1 reference wins; ties go to the earliest reference. Throws
// ValidationError when `references` is empty.
RougeScore rouge_su4_multi(std::span<const std::string> candidate,
                           std::span<const std::vector<std::string>> references);
RougeScore rouge_su4_multi(const UnitBag& candidate,
                           std::span<const UnitBag> references);

}  // namespace qfsum

#endif  // QFSUM_ROUGE_HPP_
