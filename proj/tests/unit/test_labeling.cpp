#include <doctest.h>

#include "oracles.hpp"
#include "qfsum/corpus.hpp"
#include "qfsum/error.hpp"
#include "qfsum/labeling.hpp"
#include "qfsum/random.hpp"
#include "qfsum/synthetic.hpp"

using namespace qfsum;

TEST_CASE("label_classification examples") {
  CHECK(label_classification(std::vector<double>{.1, .2, .3, .4, .5, .6, .7}) ==
        std::vector<int>{0, 0, 1, 1, 1, 1, 1});
  CHECK(label_classification(std::vector<double>{.3, .1, .2}) == std::vector<int>{1, 1, 1});
  CHECK(label_classification(std::vector<double>(6, .5)) == std::vector<int>{1, 1, 1, 1, 1, 0});
  CHECK(label_classification(std::vector<double>{}).empty());
  CHECK(label_classification(std::vector<double>{.2, .9, .1}, 1) == std::vector<int>{0, 1, 0});
}

TEST_CASE("label_regression matches the ROUGE oracle") {
  Question q;
  q.id = "toy";
  q.snippets = {{"d", "The cat sat. A dog ran. The cat ran far. Birds fly. Sat the cat."}};
  q.ideal_answers = {"The cat sat on the mat.", "A dog ran far."};
  const auto pool = build_candidates(q);
  REQUIRE(pool.size() == 5);
  const auto targets = label_regression(q, pool);
  REQUIRE(targets.size() == 5);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    double best = 0.0;
    for (const auto& a : q.ideal_answers) {
      best = std::max(best, oracle::rouge_su4(pool[i].tokens, tokenize(a)).f);
    }
    CHECK(targets[i] == doctest::Approx(best).epsilon(1e-12));
  }
  CHECK(targets[3] == 0.0);
}

TEST_CASE("label_regression edge cases") {
  Question q;
  q.id = "x";
  q.snippets = {{"d", "Exact answer here."}};
  q.ideal_answers = {"Exact answer here."};
  CHECK(label_regression(q, build_candidates(q)) == std::vector<double>{1.0});
  CHECK(label_regression(q, std::vector<CandidateSentence>{}).empty());
  q.ideal_answers.clear();
  CHECK_THROWS_AS(label_regression(q, build_candidates(q)), ValidationError);
}

TEST_CASE("label_regression is permutation-equivariant") {
  SyntheticSpec spec;
  spec.questions = 5;
  spec.dim = 4;
  const auto corpus = make_synthetic(spec);
  Rng rng(2);
  for (const auto& q : corpus.questions) {
    auto pool = build_candidates(q);
    const auto targets = label_regression(q, pool);
    std::vector<std::size_t> perm(pool.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(std::span(perm));
    std::vector<CandidateSentence> shuffled;
    for (auto i : perm) shuffled.push_back(pool[i]);
    const auto t2 = label_regression(q, shuffled);
    for (std::size_t i = 0; i < perm.size(); ++i) CHECK(t2[i] == targets[perm[i]]);
  }
}

TEST_CASE("labels: counts and ordering on synthetic questions") {
  SyntheticSpec spec;
  spec.questions = 40;
  spec.dim = 4;
  spec.candidates = 12;
  const auto corpus = make_synthetic(spec);
  const auto labeled = prepare_labeled(corpus.questions);
  REQUIRE(labeled.size() == 40);
  for (const auto& lq : labeled) {
    int ones = 0;
    for (int l : lq.labels) ones += l;
    CHECK(ones == std::min<int>(5, static_cast<int>(lq.pool.size())));
    for (std::size_t i = 0; i < lq.pool.size(); ++i) {
      for (std::size_t j = 0; j < lq.pool.size(); ++j) {
        if (lq.labels[i] == 1 && lq.labels[j] == 0) {
          CHECK(lq.targets[i] >= lq.targets[j]);
          if (lq.targets[i] == lq.targets[j]) CHECK(i < j);
        }
      }
    }
  }
}

TEST_CASE("prepare_labeled skips unusable questions and honours the cache") {
  Question good;
  good.id = "good";
  good.snippets = {{"d", "One here. Two there."}};
  good.ideal_answers = {"One here."};
  Question empty_pool = good;
  empty_pool.id = "nopool";
  empty_pool.snippets.clear();
  Question no_answer = good;
  no_answer.id = "noanswer";
  no_answer.ideal_answers.clear();
  const std::vector<Question> qs{good, empty_pool, no_answer};
  const auto labeled = prepare_labeled(qs);
  REQUIRE(labeled.size() == 1);
  CHECK(labeled[0].question.id == "good");

  std::vector<QuestionLabels> labels{{"good", {0.25, 0.75}, {0, 1}}};
  const auto cache = read_label_cache(write_label_cache(labels));
  REQUIRE(cache.size() == 1);
  CHECK(cache.at("good") == labels[0]);
  const auto cached = prepare_labeled(qs, kDefaultCandidateCap, kPositiveLabels, &cache);
  CHECK(cached[0].targets == std::vector<double>{0.25, 0.75});
}
