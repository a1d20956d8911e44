#include "qfsum/params.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "qfsum/error.hpp"

namespace qfsum::nn {

Tensor& ParamSet::add(const std::string& name, Tensor value) {
  auto [it, inserted] = tensors_.emplace(name, std::move(value));
  if (!inserted) throw ValidationError("duplicate parameter '" + name + "'");
  return it->second;
}

Tensor& ParamSet::add_glorot(const std::string& name, std::size_t fan_in,
                             std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t({fan_in, fan_out});
  for (auto& v : t.values()) v = rng.uniform(-bound, bound);
  return add(name, std::move(t));
}

Tensor& ParamSet::add_zeros(const std::string& name,
                            std::vector<std::size_t> shape) {
  return add(name, Tensor(std::move(shape)));
}

bool ParamSet::contains(std::string_view name) const {
  return tensors_.find(name) != tensors_.end();
}

Tensor& ParamSet::at(std::string_view name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) {
    throw KeyError("missing parameter '" + std::string(name) + "'");
  }
  return it->second;
}

const Tensor& ParamSet::at(std::string_view name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) {
    throw KeyError("missing parameter '" + std::string(name) + "'");
  }
  return it->second;
}

std::vector<std::string> ParamSet::names() const {
  std::vector<std::string> out;
  out.reserve(tensors_.size());
  for (const auto& [name, _] : tensors_) out.push_back(name);
  return out;
}

std::size_t ParamSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : tensors_) n += t.size();
  return n;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out(seed_);
  for (const auto& [name, t] : tensors_) out.tensors_.emplace(name, Tensor(t.shape()));
  return out;
}

void ParamSet::add_scaled(const ParamSet& other, double scale) {
  if (other.tensors_.size() != tensors_.size()) {
    throw ShapeError("add_scaled: parameter sets differ in size");
  }
  auto it = other.tensors_.begin();
  for (auto& [name, t] : tensors_) {
    if (it->first != name || it->second.shape() != t.shape()) {
      throw ShapeError("add_scaled: mismatch at '" + name + "'");
    }
    auto dst = t.data();
    auto src = it->second.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
    ++it;
  }
}

void ParamSet::scale(double factor) {
  for (auto& [_, t] : tensors_) {
    for (auto& v : t.values()) v *= factor;
  }
}

void ParamSet::set_zero() {
  for (auto& [_, t] : tensors_) t.fill(0.0);
}

double ParamSet::squared_norm() const {
  double total = 0.0;
  for (const auto& [_, t] : tensors_) {
    for (double v : t.values()) total += v * v;
  }
  return total;
}

bool ParamSet::all_finite() const {
  for (const auto& [_, t] : tensors_) {
    if (!t.all_finite()) return false;
  }
  return true;
}

// ---- checkpoint codec -------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'Q', 'F', 'S', 'U', 'M', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t uint(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw ParseError("checkpoint truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const ParamSet& params, std::string_view metadata) {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u64(out, params.seed());
  put_u32(out, static_cast<std::uint32_t>(metadata.size()));
  out.append(metadata);
  put_u32(out, static_cast<std::uint32_t>(params.tensors().size()));
  for (const auto& [name, t] : params.tensors()) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.append(name);
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) put_u64(out, d);
    for (double v : t.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    throw ParseError("not a qfsum checkpoint (bad magic)");
  }
  const auto version = r.uint(4);
  if (version != kVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck{ParamSet(r.uint(8)), {}};
  ck.metadata = std::string(r.take(r.uint(4)));
  const auto count = r.uint(4);
  for (std::uint64_t k = 0; k < count; ++k) {
    std::string name(r.take(r.uint(4)));
    const auto rank = r.uint(4);
    std::vector<std::size_t> shape;
    std::size_t n = 1;
    for (std::uint64_t d = 0; d < rank; ++d) {
      shape.push_back(static_cast<std::size_t>(r.uint(8)));
      n *= shape.back();
    }
    std::vector<double> data(n);
    for (auto& v : data) v = std::bit_cast<double>(r.uint(8));
    ck.params.add(name, Tensor(std::move(shape), std::move(data)));
  }
  if (!r.done()) throw ParseError("trailing bytes after checkpoint");
  return ck;
}

}  // namespace qfsum::nn
