#include <doctest.h>

#include <cctype>
#include <set>

#include "qfsum/corpus.hpp"
#include "qfsum/error.hpp"
#include "qfsum/labeling.hpp"
#include "qfsum/synthetic.hpp"

using namespace qfsum;

TEST_CASE("synthetic corpus shape") {
  SyntheticSpec spec;
  spec.questions = 12;
  spec.candidates = 9;
  spec.marked = 3;
  spec.dim = 6;
  const auto c = make_synthetic(spec);
  REQUIRE(c.questions.size() == 12);
  CHECK(c.table.dim() == 6);
  std::set<std::string> ids;
  for (const auto& q : c.questions) {
    CHECK(ids.insert(q.id).second);
    CHECK(q.type == QuestionType::kSummary);
    CHECK(q.body.back() == '?');
    const auto pool = build_candidates(q);
    REQUIRE(pool.size() == 9);
    for (const auto& s : pool) {
      CHECK(std::isupper(static_cast<unsigned char>(s.text[0])));
      CHECK(s.text.back() == '.');
      for (const auto& t : s.tokens) CHECK_FALSE(c.table.find(t).empty());
    }
    const auto& marked = c.marked.at(q.id);
    CHECK(marked.size() == 3);
    CHECK(q.ideal_answers.size() == 1);
    // The ideal answer is the marked sentences, so each one overlaps it.
    const auto targets = label_regression(q, pool);
    for (int pos : marked) CHECK(targets[static_cast<std::size_t>(pos - 1)] > 0.0);
  }
}

TEST_CASE("synthetic generation is seeded") {
  SyntheticSpec spec;
  spec.questions = 5;
  spec.dim = 4;
  const auto a = make_synthetic(spec);
  const auto b = make_synthetic(spec);
  CHECK(a.questions == b.questions);
  CHECK(a.table.to_word2vec_text() == b.table.to_word2vec_text());
  spec.seed = 2;
  CHECK_FALSE(make_synthetic(spec).questions == a.questions);
}

TEST_CASE("mixed types and validation") {
  SyntheticSpec spec;
  spec.questions = 40;
  spec.dim = 4;
  spec.mixed_types = true;
  std::set<QuestionType> types;
  for (const auto& q : make_synthetic(spec).questions) types.insert(q.type);
  CHECK(types.size() == 4);

  spec.marked = spec.candidates + 1;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = SyntheticSpec{};
  spec.questions = 0;
  CHECK_THROWS_AS(make_synthetic(spec), ValidationError);
}

TEST_CASE("corpus survives a BioASQ round trip") {
  SyntheticSpec spec;
  spec.questions = 4;
  spec.dim = 4;
  const auto c = make_synthetic(spec);
  CHECK(parse_bioasq(serialize_bioasq(c.questions)) == c.questions);
}
