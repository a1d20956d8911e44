#include "qfsum/harness.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <set>

#include "qfsum/error.hpp"
#include "qfsum/random.hpp"
#include "qfsum/rouge.hpp"
#include "qfsum/util.hpp"

namespace qfsum {

namespace {

std::vector<Question> canonical_shuffle(std::span<const Question> questions,
                                        std::uint64_t seed) {
  std::vector<Question> out(questions.begin(), questions.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const Question& a, const Question& b) { return a.id < b.id; });
  Rng rng(seed);
  rng.shuffle(std::span(out));
  return out;
}

}  // namespace

std::vector<std::vector<Question>> kfold_split(std::span<const Question> questions,
                                               int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("k must be >= 2");
  const auto folds = static_cast<std::size_t>(k);
  if (questions.size() < folds) {
    throw ValidationError("need at least " + std::to_string(k) + " questions for " +
                          std::to_string(k) + " folds, got " +
                          std::to_string(questions.size()));
  }
  auto shuffled = canonical_shuffle(questions, seed);
  const std::size_t base = shuffled.size() / folds;
  const std::size_t extra = shuffled.size() % folds;
  std::vector<std::vector<Question>> out(folds);
  std::size_t at = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    out[f].assign(std::make_move_iterator(shuffled.begin() + static_cast<long>(at)),
                  std::make_move_iterator(shuffled.begin() + static_cast<long>(at + size)));
    at += size;
  }
  return out;
}

SplitSizes split_sizes(std::size_t n, int train_parts, int test_parts) {
  if (train_parts < 1 || test_parts < 1) throw ValidationError("split parts must be >= 1");
  const auto parts = static_cast<std::size_t>(train_parts + test_parts);
  if (n < parts) {
    throw ValidationError("need at least " + std::to_string(parts) +
                          " questions to split, got " + std::to_string(n));
  }
  SplitSizes s;
  s.train = static_cast<std::size_t>(train_parts) * n / parts;
  s.test = n - s.train;
  return s;
}

Split split_ratio(std::span<const Question> questions, std::uint64_t seed,
                  int train_parts, int test_parts) {
  const auto sizes = split_sizes(questions.size(), train_parts, test_parts);
  auto shuffled = canonical_shuffle(questions, seed);
  Split s;
  const auto cut = shuffled.begin() + static_cast<long>(sizes.train);
  s.train.assign(std::make_move_iterator(shuffled.begin()), std::make_move_iterator(cut));
  s.test.assign(std::make_move_iterator(cut), std::make_move_iterator(shuffled.end()));
  return s;
}

EvalReport EvalReport::from_scores(std::string method, std::vector<double> scores) {
  EvalReport r;
  r.method = std::move(method);
  r.scores = std::move(scores);
  if (r.scores.empty()) return r;
  double sum = 0.0;
  for (double s : r.scores) sum += s;
  r.mean = sum / static_cast<double>(r.scores.size());
  if (r.scores.size() > 1) {
    double sq = 0.0;
    for (double s : r.scores) sq += (s - r.mean) * (s - r.mean);
    r.stdev = std::sqrt(sq / static_cast<double>(r.scores.size() - 1));
  }
  return r;
}

std::string MethodDescriptor::name() const {
  switch (kind) {
    case Kind::kFirstN:
      return "firstn";
    case Kind::kRandom:
      return "random";
    case Kind::kConstant:
      return "constant";
    case Kind::kScorer:
      return std::string(to_string(scorer.variant));
  }
  return "firstn";
}

MethodDescriptor MethodDescriptor::parse(std::string_view name) {
  MethodDescriptor m;
  if (name == "firstn") {
    m.kind = Kind::kFirstN;
  } else if (name == "random") {
    m.kind = Kind::kRandom;
  } else if (name == "constant") {
    m.kind = Kind::kConstant;
  } else {
    m.kind = Kind::kScorer;
    m.scorer = ScorerConfig::defaults_for(parse_scorer_variant(name));
  }
  return m;
}

CandidateScorer model_candidate_scorer(const ScorerModel& model,
                                       const FeatureSource& features) {
  return [&model, &features](const Question& q, std::span<const CandidateSentence> pool) {
    return predict_scores(model, q, pool, features);
  };
}

CandidateScorer make_candidate_scorer(const MethodDescriptor& method,
                                      std::span<const Question> train,
                                      const HarnessOptions& options, std::uint64_t seed) {
  using Kind = MethodDescriptor::Kind;
  switch (method.kind) {
    case Kind::kFirstN:
      return [](const Question&, std::span<const CandidateSentence> pool) {
        std::vector<double> s;
        for (const auto& c : pool) s.push_back(-static_cast<double>(c.position));
        return s;
      };
    case Kind::kConstant:
      return [](const Question&, std::span<const CandidateSentence> pool) {
        return std::vector<double>(pool.size(), 0.0);
      };
    case Kind::kRandom:
      return [seed](const Question& q, std::span<const CandidateSentence> pool) {
        Rng rng(Rng::derive(seed, fnv1a64(q.id)));
        std::vector<double> s;
        for (std::size_t i = 0; i < pool.size(); ++i) s.push_back(rng.uniform());
        return s;
      };
    case Kind::kScorer:
      break;
  }
  if (options.features == nullptr) {
    throw ValidationError("method '" + method.name() + "' needs an embedding source");
  }
  const auto labeled = prepare_labeled(train, options.cap, kPositiveLabels,
                                       options.label_cache);
  ScorerConfig config = method.scorer;
  config.seed = seed;
  TrainOptions train_options;
  train_options.jobs = options.jobs;
  train_options.on_epoch = options.on_epoch;
  auto model = std::make_shared<ScorerModel>(
      train_scorer(labeled, *options.features, config, train_options).model);
  const FeatureSource* features = options.features;
  return [model, features](const Question& q, std::span<const CandidateSentence> pool) {
    return predict_scores(*model, q, pool, *features);
  };
}

double summary_f1(const Question& question, std::string_view summary_text) {
  std::vector<std::vector<std::string>> refs;
  for (const auto& a : question.ideal_answers) {
    auto t = tokenize(a);
    if (!t.empty()) refs.push_back(std::move(t));
  }
  if (refs.empty()) throw ValidationError("question '" + question.id + "' has no ideal answer");
  return rouge_su4_multi(tokenize(summary_text), refs).f1;
}

std::vector<QuestionResult> summarize_and_score(std::span<const Question> test,
                                                const CandidateScorer& scorer, int cap,
                                                int jobs) {
  std::vector<const Question*> usable;
  for (const auto& q : test) {
    if (is_evaluable(q, cap)) {
      usable.push_back(&q);
    } else {
      spdlog::warn("question '{}' is not evaluable; skipped", q.id);
    }
  }
  std::vector<QuestionResult> out(usable.size());
  parallel_for(usable.size(), jobs, [&](std::size_t i) {
    const Question& q = *usable[i];
    const auto pool = build_candidates(q, cap);
    auto scores = scorer(q, pool);
    auto summary = select_top_n(scores, pool, n_for_type(q.type));
    summary.question_id = q.id;
    out[i].f1 = summary_f1(q, summary.text);
    out[i].summary = std::move(summary);
    out[i].scores = std::move(scores);
  });
  return out;
}

double mean_f1(std::span<const QuestionResult> results) {
  if (results.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : results) sum += r.f1;
  return sum / static_cast<double>(results.size());
}

EvalReport cross_validate(const MethodDescriptor& method,
                          std::span<const Question> corpus, int k, std::uint64_t seed,
                          const HarnessOptions& options) {
  const auto folds = kfold_split(corpus, k, seed);
  std::vector<double> fold_scores;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<Question> train;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    }
    std::set<std::string> train_ids;
    for (const auto& q : train) train_ids.insert(q.id);
    for (const auto& q : folds[f]) {
      if (train_ids.contains(q.id)) {
        throw ValidationError("question '" + q.id + "' appears in train and test of fold " +
                              std::to_string(f));
      }
    }
    const auto scorer = make_candidate_scorer(method, train, options, Rng::derive(seed, f));
    const auto results = summarize_and_score(folds[f], scorer, options.cap, options.jobs);
    if (results.empty()) {
      throw ValidationError("fold " + std::to_string(f) + " has no evaluable question");
    }
    fold_scores.push_back(mean_f1(results));
    spdlog::info("{} fold {}: {:.4f} over {} questions", method.name(), f,
                 fold_scores.back(), results.size());
  }
  return EvalReport::from_scores(method.name(), std::move(fold_scores));
}

std::string report_table(std::span<const EvalReport> reports) {
  std::size_t width = std::string("method").size();
  for (const auto& r : reports) width = std::max(width, r.method.size());
  auto pad = [width](const std::string& s) { return s + std::string(width - s.size(), ' '); };
  std::string out = pad("method") + "  ROUGE-SU4 F1\n";
  for (const auto& r : reports) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f ± %.3f", r.mean, r.stdev);
    out += pad(r.method) + "  " + buf + "\n";
  }
  return out;
}

nlohmann::json report_json(std::span<const EvalReport> reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    arr.push_back({{"method", r.method},
                   {"scores", r.scores},
                   {"mean", r.mean},
                   {"stdev", r.stdev}});
  }
  return {{"reports", arr}};
}

}  // namespace qfsum
