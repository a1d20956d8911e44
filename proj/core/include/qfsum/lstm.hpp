#ifndef QFSUM_LSTM_HPP_
#define QFSUM_LSTM_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qfsum/params.hpp"
#include "qfsum/token_matrix.hpp"

namespace qfsum::nn {

// Bidirectional LSTM reductor. Each direction owns three tensors under
// "<prefix>.fwd" / "<prefix>.bwd":
//   wx [input x 4H], wh [H x 4H], b [4H]
// with gate blocks ordered (input, forget, cell, output). The sentence
// embedding is h_forward_final + h_backward_final (dimension H).
void init_bilstm(ParamSet& params, const std::string& prefix,
                 std::size_t input_dim, std::size_t hidden_dim, Rng& rng);

std::size_t bilstm_hidden_dim(const ParamSet& params, std::string_view prefix);

// Per-step activations kept for the backward pass.
struct LstmTrace {
  std::vector<std::size_t> rows;  // processed token rows, in processing order
  std::vector<double> gates;      // steps x 4H, post-activation
  std::vector<double> cells;      // steps x H
  std::vector<double> hidden;     // steps x H
};

struct BiLstmTrace {
  LstmTrace forward;
  LstmTrace backward;
};

// Rows with mask 0 are skipped. All-padding input returns the zero vector.
std::vector<double> bilstm_reduce(const TokenMatrix& sequence,
                                  const ParamSet& params, std::string_view prefix,
                                  BiLstmTrace* trace = nullptr);

// Accumulates parameter gradients into `grads` (same names as params).
// Returns d output / d sequence rows when `input_grad` is requested.
void bilstm_backward(const TokenMatrix& sequence, const ParamSet& params,
                     std::string_view prefix, const BiLstmTrace& trace,
                     std::span<const double> upstream, ParamSet& grads,
                     Tensor* input_grad = nullptr);

}  // namespace qfsum::nn

#endif  // QFSUM_LSTM_HPP_
