#include "qfsum/rouge.hpp"

#include <algorithm>

#include "qfsum/error.hpp"

namespace qfsum {

std::vector<SkipUnit> skip_units(std::span<const std::string> tokens,
                                 int max_skip) {
  if (max_skip < 0) throw ValidationError("max_skip must be >= 0");
  const std::size_t window = static_cast<std::size_t>(max_skip) + 1;
  std::vector<SkipUnit> units;
  units.reserve(tokens.size() * (window + 1));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    units.push_back({false, tokens[i], {}});
    const std::size_t last = std::min(tokens.size() - 1, i + window);
    for (std::size_t j = i + 1; j <= last; ++j) {
      units.push_back({true, tokens[i], tokens[j]});
    }
  }
  std::sort(units.begin(), units.end());
  return units;
}

UnitBag::UnitBag(std::span<const std::string> tokens, int max_skip) {
  auto units = skip_units(tokens, max_skip);
  total_ = units.size();
  for (auto& u : units) {
    if (!counts_.empty() && counts_.back().first == u) {
      ++counts_.back().second;
    } else {
      counts_.emplace_back(std::move(u), 1);
    }
  }
}

std::size_t match_count(const UnitBag& a, const UnitBag& b) {
  std::size_t matches = 0;
  auto ia = a.counts_.begin();
  auto ib = b.counts_.begin();
  while (ia != a.counts_.end() && ib != b.counts_.end()) {
    const auto order = ia->first <=> ib->first;
    if (order < 0) {
      ++ia;
    } else if (order > 0) {
      ++ib;
    } else {
      matches += std::min(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  return matches;
}

RougeScore rouge_from_counts(std::size_t matches, std::size_t candidate_total,
                             std::size_t reference_total) {
  RougeScore s;
  if (candidate_total == 0 || reference_total == 0) return s;
  s.precision = static_cast<double>(matches) / static_cast<double>(candidate_total);
  s.recall = static_cast<double>(matches) / static_cast<double>(reference_total);
  if (s.precision + s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

RougeScore rouge_su4(const UnitBag& candidate, const UnitBag& reference) {
  return rouge_from_counts(match_count(candidate, reference), candidate.total(),
                           reference.total());
}

RougeScore rouge_su4(std::span<const std::string> candidate,
                     std::span<const std::string> reference) {
  return rouge_su4(UnitBag(candidate), UnitBag(reference));
}

RougeScore rouge_su4_multi(const UnitBag& candidate,
                           std::span<const UnitBag> references) {
  if (references.empty()) {
    throw ValidationError("rouge_su4_multi needs at least one reference");
  }
  RougeScore best = rouge_su4(candidate, references.front());
  for (std::size_t i = 1; i < references.size(); ++i) {
    const RougeScore s = rouge_su4(candidate, references[i]);
    if (s.f1 > best.f1) best = s;
  }
  return best;
}

RougeScore rouge_su4_multi(
    std::span<const std::string> candidate,
    std::span<const std::vector<std::string>> references) {
  if (references.empty()) {
    throw ValidationError("rouge_su4_multi needs at least one reference");
  }
  std::vector<UnitBag> bags;
  bags.reserve(references.size());
  for (const auto& r : references) bags.emplace_back(r);
  return rouge_su4_multi(UnitBag(candidate), bags);
}

}  // namespace qfsum
