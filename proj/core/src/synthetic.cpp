#include "qfsum/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "qfsum/error.hpp"
#include "qfsum/random.hpp"

namespace qfsum {

void SyntheticSpec::validate() const {
  if (questions < 1) throw ValidationError("questions must be >= 1");
  if (candidates < 1) throw ValidationError("candidates must be >= 1");
  if (marked < 1 || marked > candidates) {
    throw ValidationError("marked must be in [1, candidates]");
  }
  if (topics < 2) throw ValidationError("topics must be >= 2");
  if (words_per_topic < 1 || filler_words < 1) {
    throw ValidationError("vocabulary sizes must be >= 1");
  }
  if (sentence_len < 1 || filler_per_sentence < 0 || filler_per_sentence >= sentence_len) {
    throw ValidationError("need 0 <= filler_per_sentence < sentence_len");
  }
  if (question_len < 1) throw ValidationError("question_len must be >= 1");
  if (dim < 1) throw ValidationError("dim must be >= 1");
  if (noise < 0.0) throw ValidationError("noise must be >= 0");
  if (snippet_size < 1) throw ValidationError("snippet_size must be >= 1");
}

namespace {

std::string topic_word(int topic, std::size_t word) {
  return "t" + std::to_string(topic) + "w" + std::to_string(word);
}
std::string filler_word(std::size_t word) { return "f" + std::to_string(word); }

std::string render(std::vector<std::string> words, char end) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  out += end;
  return out;
}

}  // namespace

SyntheticCorpus make_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto dim = static_cast<std::size_t>(spec.dim);
  SyntheticCorpus out{{}, EmbeddingTable(dim), {}};

  auto random_vector = [&](double scale) {
    std::vector<double> v(dim);
    for (double& x : v) x = scale * rng.normal();
    return v;
  };
  for (int t = 0; t < spec.topics; ++t) {
    const auto centre = random_vector(1.0);
    for (int w = 0; w < spec.words_per_topic; ++w) {
      auto v = random_vector(spec.noise);
      for (std::size_t k = 0; k < dim; ++k) v[k] += centre[k];
      out.table.insert(topic_word(t, static_cast<std::size_t>(w)), v);
    }
  }
  for (int w = 0; w < spec.filler_words; ++w) {
    out.table.insert(filler_word(static_cast<std::size_t>(w)), random_vector(1.0));
  }

  const auto words_per_topic = static_cast<std::uint64_t>(spec.words_per_topic);
  const auto fillers = static_cast<std::uint64_t>(spec.filler_words);
  auto sentence = [&](int topic) {
    std::vector<std::string> words;
    const int content = spec.sentence_len - spec.filler_per_sentence;
    for (int i = 0; i < content; ++i) words.push_back(topic_word(topic, rng.below(words_per_topic)));
    for (int i = 0; i < spec.filler_per_sentence; ++i) {
      const auto at = rng.below(words.size() + 1);
      words.insert(words.begin() + static_cast<long>(at), filler_word(rng.below(fillers)));
    }
    return render(std::move(words), '.');
  };

  static constexpr QuestionType kTypes[] = {QuestionType::kSummary, QuestionType::kFactoid,
                                           QuestionType::kYesNo, QuestionType::kList};
  const auto topic_count = static_cast<std::uint64_t>(spec.topics);
  for (int qi = 0; qi < spec.questions; ++qi) {
    Question q;
    q.id = "syn" + std::to_string(qi);
    q.type = spec.mixed_types ? kTypes[rng.below(4)] : QuestionType::kSummary;
    const int topic = static_cast<int>(rng.below(topic_count));
    std::vector<std::string> qwords;
    for (int i = 0; i < spec.question_len; ++i) {
      qwords.push_back(topic_word(topic, rng.below(words_per_topic)));
    }
    q.body = render(std::move(qwords), '?');

    std::vector<int> positions(static_cast<std::size_t>(spec.candidates));
    std::iota(positions.begin(), positions.end(), 1);
    rng.shuffle(std::span(positions));
    std::vector<int> marked(positions.begin(), positions.begin() + spec.marked);
    std::sort(marked.begin(), marked.end());

    std::vector<std::string> sentences;
    std::string answer;
    for (int pos = 1; pos <= spec.candidates; ++pos) {
      std::string s;
      if (std::binary_search(marked.begin(), marked.end(), pos)) {
        s = sentence(topic);
        if (!answer.empty()) answer += ' ';
        answer += s;
      } else {
        int other = static_cast<int>(rng.below(topic_count - 1));
        if (other >= topic) ++other;
        s = sentence(other);
      }
      sentences.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < sentences.size(); i += static_cast<std::size_t>(spec.snippet_size)) {
      SourceSnippet snip;
      snip.document_id = q.id + "-d" + std::to_string(i / static_cast<std::size_t>(spec.snippet_size));
      const auto end = std::min(sentences.size(), i + static_cast<std::size_t>(spec.snippet_size));
      for (std::size_t j = i; j < end; ++j) {
        if (!snip.text.empty()) snip.text += ' ';
        snip.text += sentences[j];
      }
      q.snippets.push_back(std::move(snip));
    }
    q.ideal_answers.push_back(std::move(answer));
    out.marked[q.id] = std::move(marked);
    out.questions.push_back(std::move(q));
  }
  return out;
}

}  // namespace qfsum
