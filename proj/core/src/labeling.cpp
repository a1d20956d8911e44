#include "qfsum/labeling.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <numeric>
#include <nlohmann/json.hpp>

#include "qfsum/error.hpp"
#include "qfsum/rouge.hpp"
#include "qfsum/util.hpp"

namespace qfsum {

std::vector<double> label_regression(const Question& question,
                                     std::span<const CandidateSentence> pool) {
  if (pool.empty()) return {};
  if (question.ideal_answers.empty()) {
    throw ValidationError("question " + question.id + " has no ideal answer");
  }
  std::vector<UnitBag> references;
  for (const auto& answer : question.ideal_answers) {
    references.emplace_back(tokenize(answer));
  }
  std::vector<double> targets;
  targets.reserve(pool.size());
  for (const auto& c : pool) {
    targets.push_back(rouge_su4_multi(UnitBag(c.tokens), references).f1);
  }
  return targets;
}

std::vector<int> label_classification(std::span<const double> targets, int k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  std::vector<std::size_t> order(targets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return targets[a] > targets[b];
  });
  std::vector<int> labels(targets.size(), 0);
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
  for (std::size_t i = 0; i < keep; ++i) labels[order[i]] = 1;
  return labels;
}

QuestionLabels label_question(const Question& question,
                              std::span<const CandidateSentence> pool, int k) {
  QuestionLabels out;
  out.question_id = question.id;
  out.targets = label_regression(question, pool);
  out.labels = label_classification(out.targets, k);
  return out;
}

std::vector<LabeledQuestion> prepare_labeled(
    std::span<const Question> questions, int cap, int k,
    const std::map<std::string, QuestionLabels>* cache) {
  std::vector<LabeledQuestion> out;
  for (const auto& q : questions) {
    auto pool = build_candidates(q, cap);
    if (pool.empty()) {
      spdlog::warn("question {}: no candidate sentences, skipped", q.id);
      continue;
    }
    if (!is_evaluable(q, cap)) {
      spdlog::warn("question {}: no usable ideal answer, skipped", q.id);
      continue;
    }
    LabeledQuestion lq;
    const QuestionLabels* cached = nullptr;
    if (cache != nullptr) {
      if (auto it = cache->find(q.id); it != cache->end() &&
                                       it->second.targets.size() == pool.size()) {
        cached = &it->second;
      }
    }
    if (cached != nullptr) {
      lq.targets = cached->targets;
      lq.labels = cached->labels;
    } else {
      auto labels = label_question(q, pool, k);
      lq.targets = std::move(labels.targets);
      lq.labels = std::move(labels.labels);
    }
    lq.question = q;
    lq.pool = std::move(pool);
    out.push_back(std::move(lq));
  }
  return out;
}

std::string write_label_cache(std::span<const QuestionLabels> labels) {
  std::string out;
  for (const auto& l : labels) {
    nlohmann::json record = {
        {"id", l.question_id}, {"targets", l.targets}, {"labels", l.labels}};
    out += record.dump();
    out += '\n';
  }
  return out;
}

std::map<std::string, QuestionLabels> read_label_cache(std::string_view contents) {
  std::map<std::string, QuestionLabels> out;
  std::size_t start = 0;
  std::size_t record = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    const auto line = trim(contents.substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      QuestionLabels l;
      l.question_id = j.at("id").get<std::string>();
      l.targets = j.at("targets").get<std::vector<double>>();
      l.labels = j.at("labels").get<std::vector<int>>();
      if (l.targets.size() != l.labels.size()) {
        throw ParseError("label cache record " + std::to_string(record) +
                         ": targets/labels length mismatch");
      }
      out.emplace(l.question_id, std::move(l));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("label cache record " + std::to_string(record) + ": " +
                       e.what());
    }
    ++record;
  }
  return out;
}

}  // namespace qfsum
