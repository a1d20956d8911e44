#ifndef QFSUM_PARAMS_HPP_
#define QFSUM_PARAMS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qfsum/random.hpp"
#include "qfsum/tensor.hpp"

namespace qfsum::nn {

// Named parameter tensors. Iteration order is the lexical order of names,
// which makes every reduction over a ParamSet deterministic.
class ParamSet {
 public:
  explicit ParamSet(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Throws ValidationError on a duplicate name.
  Tensor& add(const std::string& name, Tensor value);
  // Uniform in +-sqrt(6 / (fan_in + fan_out)).
  Tensor& add_glorot(const std::string& name, std::size_t fan_in,
                     std::size_t fan_out, Rng& rng);
  Tensor& add_zeros(const std::string& name, std::vector<std::size_t> shape);

  bool contains(std::string_view name) const;
  // Throws KeyError naming the missing parameter.
  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;

  const std::map<std::string, Tensor, std::less<>>& tensors() const {
    return tensors_;
  }
  std::vector<std::string> names() const;
  std::size_t parameter_count() const;

  ParamSet zeros_like() const;
  // this += scale * other; names and shapes must match.
  void add_scaled(const ParamSet& other, double scale);
  void scale(double factor);
  void set_zero();
  double squared_norm() const;
  bool all_finite() const;

  bool operator==(const ParamSet&) const = default;

 private:
  std::map<std::string, Tensor, std::less<>> tensors_;
  std::uint64_t seed_;
};

struct Checkpoint {
  ParamSet params;
  std::string metadata;  // free-form (JSON by convention)
};

// Binary checkpoint, little-endian; layout in docs/checkpoint_format.md.
std::string encode_checkpoint(const ParamSet& params, std::string_view metadata);
Checkpoint decode_checkpoint(std::string_view bytes);

}  // namespace qfsum::nn

#endif  // QFSUM_PARAMS_HPP_
