#include "qfsum/corpus.hpp"

#include <spdlog/spdlog.h>

#include <cctype>
#include <nlohmann/json.hpp>
#include <sstream>

#include "qfsum/error.hpp"
#include "qfsum/util.hpp"

namespace qfsum {

using nlohmann::json;

std::string_view to_string(QuestionType type) {
  switch (type) {
    case QuestionType::kSummary:
      return "summary";
    case QuestionType::kFactoid:
      return "factoid";
    case QuestionType::kYesNo:
      return "yesno";
    case QuestionType::kList:
      return "list";
  }
  return "summary";
}

QuestionType parse_question_type(std::string_view name) {
  if (name == "summary") return QuestionType::kSummary;
  if (name == "factoid") return QuestionType::kFactoid;
  if (name == "yesno") return QuestionType::kYesNo;
  if (name == "list") return QuestionType::kList;
  throw ValidationError("unknown question type '" + std::string(name) + "'");
}

namespace {

std::string string_field(const json& entry, const char* key, std::size_t index,
                         bool required) {
  auto it = entry.find(key);
  if (it == entry.end() || it->is_null()) {
    if (required) {
      throw ParseError("question entry " + std::to_string(index) +
                       ": missing field '" + key + "'");
    }
    return {};
  }
  if (!it->is_string()) {
    throw ParseError("question entry " + std::to_string(index) + ": field '" +
                     key + "' is not a string");
  }
  return it->get<std::string>();
}

Question question_from_json(const json& entry, std::size_t index) {
  if (!entry.is_object()) {
    throw ParseError("question entry " + std::to_string(index) +
                     " is not an object");
  }
  Question q;
  q.id = string_field(entry, "id", index, true);
  q.body = string_field(entry, "body", index, true);
  q.type = parse_question_type(string_field(entry, "type", index, true));

  if (auto it = entry.find("ideal_answer"); it != entry.end()) {
    if (it->is_string()) {
      q.ideal_answers.push_back(it->get<std::string>());
    } else if (it->is_array()) {
      for (const auto& a : *it) {
        if (!a.is_string()) {
          throw ParseError("question entry " + std::to_string(index) +
                           ": ideal_answer list holds a non-string");
        }
        q.ideal_answers.push_back(a.get<std::string>());
      }
    } else if (!it->is_null()) {
      throw ParseError("question entry " + std::to_string(index) +
                       ": ideal_answer must be a string or list");
    }
  }

  auto snippets = entry.find("snippets");
  if (snippets == entry.end() || !snippets->is_array()) {
    throw ParseError("question entry " + std::to_string(index) +
                     ": missing snippets array");
  }
  for (const auto& s : *snippets) {
    if (!s.is_object() || !s.contains("text") || !s["text"].is_string()) {
      throw ParseError("question entry " + std::to_string(index) +
                       ": snippet without text");
    }
    SourceSnippet snippet;
    snippet.text = s["text"].get<std::string>();
    if (auto d = s.find("document"); d != s.end() && d->is_string()) {
      snippet.document_id = d->get<std::string>();
    }
    if (trim(snippet.text).empty()) {
      spdlog::warn("question {}: dropping blank snippet", q.id);
      continue;
    }
    q.snippets.push_back(std::move(snippet));
  }
  return q;
}

json question_to_json(const Question& q) {
  json snippets = json::array();
  for (const auto& s : q.snippets) {
    snippets.push_back({{"document", s.document_id}, {"text", s.text}});
  }
  return {{"id", q.id},
          {"body", q.body},
          {"type", std::string(to_string(q.type))},
          {"ideal_answer", q.ideal_answers},
          {"snippets", std::move(snippets)}};
}

}  // namespace

std::vector<Question> parse_bioasq(std::string_view document) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed BioASQ document: ") + e.what());
  }
  if (!root.is_object() || !root.contains("questions") ||
      !root["questions"].is_array()) {
    throw ParseError("BioASQ document lacks a top-level 'questions' array");
  }
  std::vector<Question> out;
  const auto& entries = root["questions"];
  out.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out.push_back(question_from_json(entries[i], i));
  }
  return out;
}

std::string serialize_bioasq(const std::vector<Question>& questions) {
  json entries = json::array();
  for (const auto& q : questions) entries.push_back(question_to_json(q));
  return json{{"questions", std::move(entries)}}.dump(2) + "\n";
}

std::string write_corpus_dump(const std::vector<Question>& questions) {
  std::string out;
  for (const auto& q : questions) {
    out += question_to_json(q).dump();
    out += '\n';
  }
  return out;
}

std::vector<Question> read_corpus_dump(std::string_view contents) {
  std::vector<Question> out;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    const auto line = trim(contents.substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    json entry;
    try {
      entry = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("corpus dump record " + std::to_string(line_no) +
                       ": " + e.what());
    }
    out.push_back(question_from_json(entry, line_no));
    ++line_no;
  }
  return out;
}

std::vector<Question> load_corpus(std::string_view contents) {
  // A BioASQ document is one object holding "questions"; anything else is
  // treated as a line-per-record dump.
  const json root = json::parse(contents, nullptr, /*allow_exceptions=*/false);
  if (root.is_object() && root.contains("questions")) {
    return parse_bioasq(contents);
  }
  return read_corpus_dump(contents);
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  const auto is_space = [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '?' && c != '!') continue;
    std::size_t j = i + 1;
    if (j >= text.size() || !is_space(text[j])) continue;
    while (j < text.size() && is_space(text[j])) ++j;
    if (j >= text.size()) break;
    const auto next = static_cast<unsigned char>(text[j]);
    if (!std::isupper(next) && !std::isdigit(next)) continue;
    auto sentence = trim(text.substr(start, i + 1 - start));
    if (!sentence.empty()) out.push_back(std::move(sentence));
    start = j;
    i = j - 1;
  }
  auto tail = trim(text.substr(std::min(start, text.size())));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (c < 0x80 && std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<CandidateSentence> build_candidates(const Question& question,
                                                int cap) {
  if (cap < 1) throw ValidationError("candidate cap must be >= 1");
  std::vector<CandidateSentence> pool;
  for (const auto& snippet : question.snippets) {
    for (auto& sentence : split_sentences(snippet.text)) {
      if (static_cast<int>(pool.size()) >= cap) return pool;
      CandidateSentence c;
      c.tokens = tokenize(sentence);
      c.text = std::move(sentence);
      c.position = static_cast<int>(pool.size()) + 1;
      c.document_id = snippet.document_id;
      pool.push_back(std::move(c));
    }
  }
  return pool;
}

bool is_evaluable(const Question& question, int cap) {
  if (question.ideal_answers.empty()) return false;
  bool any_answer = false;
  for (const auto& a : question.ideal_answers) {
    if (!tokenize(a).empty()) any_answer = true;
  }
  return any_answer && !build_candidates(question, cap).empty();
}

}  // namespace qfsum
