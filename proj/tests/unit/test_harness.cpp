#include <doctest.h>

#include <algorithm>
#include <nlohmann/json.hpp>
#include <set>

#include "qfsum/error.hpp"
#include "qfsum/features.hpp"
#include "qfsum/harness.hpp"
#include "qfsum/synthetic.hpp"

using namespace qfsum;

namespace {

std::vector<Question> numbered(int n) {
  std::vector<Question> qs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) qs[static_cast<std::size_t>(i)].id = "q" + std::to_string(1000 + i);
  return qs;
}

std::vector<std::string> ids(const std::vector<Question>& qs) {
  std::vector<std::string> out;
  for (const auto& q : qs) out.push_back(q.id);
  return out;
}

SyntheticCorpus corpus(int questions, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.questions = questions;
  spec.candidates = 10;
  spec.dim = 8;
  spec.mixed_types = true;
  spec.seed = seed;
  return make_synthetic(spec);
}

}  // namespace

TEST_CASE("kfold sizes and coverage") {
  const auto even = kfold_split(numbered(100), 10, 1);
  REQUIRE(even.size() == 10);
  for (const auto& f : even) CHECK(f.size() == 10);

  const auto odd = kfold_split(numbered(103), 10, 1);
  std::vector<std::size_t> sizes;
  std::set<std::string> seen;
  for (const auto& f : odd) {
    sizes.push_back(f.size());
    for (const auto& q : f) CHECK(seen.insert(q.id).second);
  }
  CHECK(sizes == std::vector<std::size_t>{11, 11, 11, 10, 10, 10, 10, 10, 10, 10});
  CHECK(seen.size() == 103);

  CHECK_THROWS_AS(kfold_split(numbered(5), 1, 1), ValidationError);
  CHECK_THROWS_AS(kfold_split(numbered(5), 6, 1), ValidationError);
}

TEST_CASE("kfold is deterministic and ignores input order") {
  auto qs = numbered(57);
  const auto a = kfold_split(qs, 10, 42);
  const auto b = kfold_split(qs, 10, 42);
  std::reverse(qs.begin(), qs.end());
  const auto c = kfold_split(qs, 10, 42);
  const auto d = kfold_split(qs, 10, 43);
  bool differs = false;
  for (std::size_t f = 0; f < a.size(); ++f) {
    CHECK(ids(a[f]) == ids(b[f]));
    CHECK(ids(a[f]) == ids(c[f]));
    differs = differs || ids(a[f]) != ids(d[f]);
  }
  CHECK(differs);
}

TEST_CASE("5:1 split sizes") {
  CHECK(split_sizes(3243).train == 2702);
  CHECK(split_sizes(3243).test == 541);
  CHECK(split_sizes(2747).train == 2289);
  CHECK(split_sizes(2747).test == 458);
  CHECK(split_sizes(6).train == 5);
  CHECK(split_sizes(6).test == 1);
  for (std::size_t n = 6; n < 500; ++n) {
    const auto s = split_sizes(n);
    CHECK(s.train + s.test == n);
    CHECK(s.train == 5 * n / 6);
  }
  const auto split = split_ratio(numbered(30), 7);
  CHECK(split.train.size() == 25);
  CHECK(split.test.size() == 5);
  for (const auto& q : split.test) {
    CHECK(std::none_of(split.train.begin(), split.train.end(),
                       [&](const Question& t) { return t.id == q.id; }));
  }
  CHECK_THROWS_AS(split_ratio(numbered(5), 7), ValidationError);
}

TEST_CASE("eval report statistics") {
  const auto r = EvalReport::from_scores("m", {0.2, 0.4});
  CHECK(r.mean == doctest::Approx(0.3));
  CHECK(r.stdev == doctest::Approx(0.1414213562));
  CHECK(EvalReport::from_scores("one", {0.5}).stdev == 0.0);
}

TEST_CASE("report table rendering") {
  const auto empty = report_table({});
  CHECK(empty.find("method") != std::string::npos);
  CHECK(std::count(empty.begin(), empty.end(), '\n') == 1);

  EvalReport r{"nnc", {}, 0.2614, 0.0106};
  const auto one = report_table(std::vector{r});
  CHECK(one.find("0.261 ± 0.011") != std::string::npos);

  EvalReport s{"firstn", {}, 0.25, 0.0};
  const auto two = report_table(std::vector{r, s});
  CHECK(two.find("nnc") < two.find("firstn"));
  CHECK(std::count(two.begin(), two.end(), '\n') == 3);

  const auto j = report_json(std::vector{r, s});
  CHECK(j.at("reports").size() == 2);
  CHECK(j["reports"][1]["method"] == "firstn");
}

TEST_CASE("method descriptors") {
  CHECK(MethodDescriptor::parse("firstn").kind == MethodDescriptor::Kind::kFirstN);
  CHECK(MethodDescriptor::parse("random").name() == "random");
  const auto nnc = MethodDescriptor::parse("nnc");
  CHECK(nnc.kind == MethodDescriptor::Kind::kScorer);
  CHECK(nnc.scorer.batch_size == 1024);
  CHECK(nnc.name() == "nnc");
  CHECK_THROWS_AS(MethodDescriptor::parse("best"), ValidationError);
}

TEST_CASE("constant scores reproduce firstn") {
  const auto c = corpus(40, 3);
  const auto first = cross_validate(MethodDescriptor::parse("firstn"), c.questions, 4, 9);
  const auto constant = cross_validate(MethodDescriptor::parse("constant"), c.questions, 4, 9);
  CHECK(first.scores.size() == 4);
  CHECK(first.scores == constant.scores);
  CHECK(first.mean == constant.mean);
  CHECK(first.stdev == constant.stdev);
}

TEST_CASE("summaries are scored with the ROUGE module") {
  const auto c = corpus(10, 4);
  const auto scorer = make_candidate_scorer(MethodDescriptor::parse("firstn"), {}, {}, 1);
  const auto results = summarize_and_score(c.questions, scorer);
  REQUIRE(results.size() == 10);
  for (std::size_t i = 0; i < results.size(); ++i) {
    CHECK(results[i].f1 == summary_f1(c.questions[i], results[i].summary.text));
    CHECK(results[i].f1 >= 0.0);
    CHECK(results[i].f1 <= 1.0);
  }
  const auto parallel = summarize_and_score(c.questions, scorer, kDefaultCandidateCap, 3);
  for (std::size_t i = 0; i < results.size(); ++i) CHECK(parallel[i].f1 == results[i].f1);

  Question q;
  q.id = "perfect";
  q.snippets = {{"d", "Alpha beta gamma. Delta epsilon."}};
  q.ideal_answers = {"Alpha beta gamma."};
  CHECK(summary_f1(q, "Alpha beta gamma.") == doctest::Approx(1.0));
  CHECK(summary_f1(q, "") == 0.0);
}

TEST_CASE("random selection is seeded per question") {
  const auto c = corpus(6, 5);
  const auto a = make_candidate_scorer(MethodDescriptor::parse("random"), {}, {}, 1);
  const auto b = make_candidate_scorer(MethodDescriptor::parse("random"), {}, {}, 1);
  const auto pool = build_candidates(c.questions[0]);
  CHECK(a(c.questions[0], pool) == b(c.questions[0], pool));
  CHECK(a(c.questions[0], pool) != a(c.questions[1], build_candidates(c.questions[1])));
}

TEST_CASE("cross_validate with a trained scorer") {
  const auto c = corpus(30, 6);
  WordVectorFeatures features(c.table);
  auto method = MethodDescriptor::parse("nnc");
  method.scorer.batch_size = 64;
  method.scorer.epochs = 2;
  method.scorer.hidden_dim = 8;
  HarnessOptions options;
  options.features = &features;
  const auto a = cross_validate(method, c.questions, 3, 2, options);
  CHECK(a.scores.size() == 3);
  options.jobs = 2;
  const auto b = cross_validate(method, c.questions, 3, 2, options);
  CHECK(a.scores == b.scores);
  CHECK_THROWS_AS(cross_validate(method, c.questions, 3, 2, {}), ValidationError);
}
