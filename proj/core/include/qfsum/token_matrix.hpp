#ifndef QFSUM_TOKEN_MATRIX_HPP_
#define QFSUM_TOKEN_MATRIX_HPP_

#include <cstdint>
#include <vector>

#include "qfsum/tensor.hpp"

namespace qfsum {

// L x dim token embeddings with a validity mask. Padded rows are all zero
// and carry mask 0.
struct TokenMatrix {
  nn::Tensor rows;
  std::vector<std::uint8_t> mask;

  std::size_t length() const { return rows.rows(); }
  std::size_t dim() const { return rows.cols(); }
  std::size_t real_count() const {
    std::size_t n = 0;
    for (auto m : mask) n += m;
    return n;
  }
};

}  // namespace qfsum

#endif  // QFSUM_TOKEN_MATRIX_HPP_
