#include "qfsum/embeddings.hpp"

#include <spdlog/spdlog.h>

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>

#include "qfsum/error.hpp"

namespace qfsum {

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ValidationError("embedding dimension must be > 0");
}

bool EmbeddingTable::insert(const std::string& token,
                            std::span<const double> vector) {
  if (vector.size() != dim_) {
    throw ShapeError("embedding for '" + token + "' has " +
                     std::to_string(vector.size()) + " values, expected " +
                     std::to_string(dim_));
  }
  auto [it, inserted] = index_.emplace(token, order_.size());
  if (!inserted) return false;
  order_.push_back(token);
  data_.insert(data_.end(), vector.begin(), vector.end());
  return true;
}

std::span<const double> EmbeddingTable::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return {};
  return {data_.data() + it->second * dim_, dim_};
}

std::string EmbeddingTable::to_word2vec_text() const {
  std::string out = std::to_string(order_.size()) + " " + std::to_string(dim_) + "\n";
  char buf[64];
  for (std::size_t i = 0; i < order_.size(); ++i) {
    out += order_[i];
    for (std::size_t k = 0; k < dim_; ++k) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), data_[i * dim_ + k]);
      out += ' ';
      out.append(buf, end);
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

EmbeddingTable load_word_vectors(std::string_view text) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  if (!next_line(line)) throw ParseError("word vectors: empty input");
  const auto header = split_fields(line);
  std::size_t vocab = 0;
  std::size_t dim = 0;
  if (header.size() != 2 || !parse_number(header[0], vocab) ||
      !parse_number(header[1], dim) || dim == 0) {
    throw ParseError("word vectors line 1: expected header 'V D'");
  }
  EmbeddingTable table(dim);
  std::vector<double> values(dim);
  std::size_t records = 0;
  while (next_line(line)) {
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != dim + 1) {
      throw ParseError("word vectors line " + std::to_string(line_no) + ": " +
                       std::to_string(fields.size() - 1) + " values, expected " +
                       std::to_string(dim));
    }
    for (std::size_t k = 0; k < dim; ++k) {
      if (!parse_number(fields[k + 1], values[k])) {
        throw ParseError("word vectors line " + std::to_string(line_no) +
                         ": bad number '" + std::string(fields[k + 1]) + "'");
      }
    }
    const std::string token(fields[0]);
    if (!table.insert(token, values)) {
      spdlog::warn("word vectors line {}: duplicate token '{}' ignored", line_no,
                   token);
    }
    ++records;
  }
  if (records != vocab) {
    throw ParseError("word vectors: header announces " + std::to_string(vocab) +
                     " entries, found " + std::to_string(records));
  }
  return table;
}

TokenMatrix embed_tokens(const EmbeddingTable& table,
                         std::span<const std::string> tokens, int max_len) {
  if (max_len < 1) throw ValidationError("max_len must be >= 1");
  const std::size_t len = static_cast<std::size_t>(max_len);
  TokenMatrix m{nn::Tensor({len, table.dim()}), std::vector<std::uint8_t>(len, 0)};
  const std::size_t used = std::min(len, tokens.size());
  for (std::size_t i = 0; i < used; ++i) {
    m.mask[i] = 1;
    const auto v = table.find(tokens[i]);
    if (!v.empty()) std::copy(v.begin(), v.end(), m.rows.row(i).begin());
  }
  return m;
}

std::vector<double> mean_reduce(const TokenMatrix& matrix) {
  std::vector<double> out(matrix.dim(), 0.0);
  std::size_t count = 0;
  for (std::size_t r = 0; r < matrix.length(); ++r) {
    if (!matrix.mask[r]) continue;
    ++count;
    const auto row = matrix.rows.row(r);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += row[k];
  }
  if (count > 0) {
    for (auto& v : out) v /= static_cast<double>(count);
  }
  return out;
}

// ---- contextual store -------------------------------------------------------

std::string slot_name(int slot) {
  return slot == kQuestionSlot ? "question" : std::to_string(slot);
}

void ContextualStore::insert(const std::string& question_id, int slot,
                             nn::Tensor rows) {
  if (rows.rank() != 2 || rows.rows() == 0) {
    throw ValidationError("contextual entry (" + question_id + ", " +
                          slot_name(slot) + ") must have at least one row");
  }
  if (slot < 0) throw ValidationError("negative contextual slot");
  if (dim_ == 0) {
    dim_ = rows.cols();
  } else if (rows.cols() != dim_) {
    throw ValidationError("contextual entry (" + question_id + ", " +
                          slot_name(slot) + ") has dim " +
                          std::to_string(rows.cols()) + ", store dim is " +
                          std::to_string(dim_));
  }
  auto [it, inserted] = entries_.emplace(ContextKey{question_id, slot}, std::move(rows));
  if (!inserted) {
    throw ValidationError("duplicate contextual entry (" + question_id + ", " +
                          slot_name(slot) + ")");
  }
}

bool ContextualStore::contains(const std::string& question_id, int slot) const {
  return entries_.count(ContextKey{question_id, slot}) > 0;
}

const nn::Tensor& ContextualStore::at(const std::string& question_id,
                                      int slot) const {
  auto it = entries_.find(ContextKey{question_id, slot});
  if (it == entries_.end()) {
    throw KeyError("no contextual embedding for question '" + question_id +
                   "' slot " + slot_name(slot));
  }
  return it->second;
}

std::vector<ContextKey> ContextualStore::keys() const {
  std::vector<ContextKey> out;
  out.reserve(entries_.size());
  for (const auto& [k, _] : entries_) out.push_back(k);
  return out;
}

namespace {

constexpr std::string_view kContextMagic = "QFSUM-CTX 1";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t at) {
  if (at + 4 > bytes.size()) throw ParseError("contextual file truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
  }
  return v;
}

}  // namespace

std::string write_contextual(const ContextualStore& store) {
  std::string index;
  std::string payload;
  index += kContextMagic;
  index += '\n';
  index += "records " + std::to_string(store.size()) + "\n";
  for (const auto& [key, rows] : store.entries()) {
    if (key.question_id.empty() ||
        key.question_id.find_first_of(" \t\r\n") != std::string::npos) {
      throw ValidationError("question id '" + key.question_id +
                            "' cannot be stored (empty or contains whitespace)");
    }
    index += std::to_string(payload.size()) + " " + slot_name(key.slot) + " " +
             key.question_id + "\n";
    put_u32(payload, static_cast<std::uint32_t>(key.question_id.size()));
    payload += key.question_id;
    put_u32(payload, static_cast<std::uint32_t>(key.slot));
    put_u32(payload, static_cast<std::uint32_t>(rows.cols()));
    put_u32(payload, static_cast<std::uint32_t>(rows.rows()));
    for (double v : rows.values()) {
      put_u32(payload, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  index += "data\n";
  return index + payload;
}

ContextualStore load_contextual(std::string_view bytes) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::string_view {
    const std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) {
      throw ParseError("contextual index truncated at line " + std::to_string(line_no + 1));
    }
    auto line = bytes.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    return line;
  };

  if (next_line() != kContextMagic) throw ParseError("not a contextual-embedding file");
  const auto count_fields = split_fields(next_line());
  std::size_t count = 0;
  if (count_fields.size() != 2 || count_fields[0] != "records" ||
      !parse_number(count_fields[1], count)) {
    throw ParseError("contextual index line 2: expected 'records N'");
  }
  struct IndexEntry {
    std::size_t offset;
    int slot;
    std::string question_id;
  };
  std::vector<IndexEntry> entries;
  entries.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto f = split_fields(next_line());
    IndexEntry e{};
    if (f.size() != 3 || !parse_number(f[0], e.offset)) {
      throw ParseError("contextual index line " + std::to_string(line_no) +
                       ": expected '<offset> <slot> <question_id>'");
    }
    if (f[1] == "question") {
      e.slot = kQuestionSlot;
    } else if (!parse_number(f[1], e.slot) || e.slot < 1) {
      throw ParseError("contextual index line " + std::to_string(line_no) +
                       ": bad slot '" + std::string(f[1]) + "'");
    }
    e.question_id = std::string(f[2]);
    entries.push_back(std::move(e));
  }
  if (next_line() != "data") throw ParseError("contextual index: missing 'data' marker");
  const std::string_view payload = bytes.substr(pos);

  ContextualStore store;
  for (const auto& e : entries) {
    std::size_t at = e.offset;
    const std::uint32_t id_len = get_u32(payload, at);
    at += 4;
    if (at + id_len > payload.size()) throw ParseError("contextual file truncated");
    const std::string_view id = payload.substr(at, id_len);
    at += id_len;
    const auto slot = static_cast<int>(get_u32(payload, at));
    const std::uint32_t dim = get_u32(payload, at + 4);
    const std::uint32_t rows = get_u32(payload, at + 8);
    at += 12;
    if (id != e.question_id || slot != e.slot) {
      throw ParseError("contextual record at offset " + std::to_string(e.offset) +
                       " disagrees with its index line");
    }
    const std::size_t n = static_cast<std::size_t>(dim) * rows;
    if (at + 4 * n > payload.size()) throw ParseError("contextual file truncated");
    std::vector<double> values(n);
    for (std::size_t k = 0; k < n; ++k) {
      values[k] = static_cast<double>(std::bit_cast<float>(get_u32(payload, at + 4 * k)));
    }
    store.insert(e.question_id, e.slot, nn::Tensor({rows, dim}, std::move(values)));
  }
  return store;
}

}  // namespace qfsum
