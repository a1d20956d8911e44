#include "qfsum/lstm.hpp"

#include <cmath>

#include "qfsum/error.hpp"
#include "qfsum/ops.hpp"

namespace qfsum::nn {

namespace {

struct DirectionParams {
  const Tensor& wx;
  const Tensor& wh;
  const Tensor& b;
};

std::string key(std::string_view prefix, const char* dir, const char* name) {
  std::string k(prefix);
  k += '.';
  k += dir;
  k += '.';
  k += name;
  return k;
}

DirectionParams direction(const ParamSet& params, std::string_view prefix,
                          const char* dir) {
  return {params.at(key(prefix, dir, "wx")), params.at(key(prefix, dir, "wh")),
          params.at(key(prefix, dir, "b"))};
}

void run_direction(const TokenMatrix& seq, const DirectionParams& p,
                   const std::vector<std::size_t>& rows, LstmTrace& trace,
                   std::vector<double>& h_out) {
  const std::size_t hdim = p.wh.rows();
  const std::size_t steps = rows.size();
  trace.rows = rows;
  trace.gates.assign(steps * 4 * hdim, 0.0);
  trace.cells.assign(steps * hdim, 0.0);
  trace.hidden.assign(steps * hdim, 0.0);
  std::vector<double> h(hdim, 0.0), c(hdim, 0.0), z(4 * hdim), zh(4 * hdim);
  for (std::size_t t = 0; t < steps; ++t) {
    affine(seq.rows.row(rows[t]), p.wx, p.b.data(), z);
    affine(h, p.wh, {}, zh);
    double* g = trace.gates.data() + t * 4 * hdim;
    for (std::size_t k = 0; k < hdim; ++k) {
      const double i_gate = sigmoid(z[k] + zh[k]);
      const double f_gate = sigmoid(z[hdim + k] + zh[hdim + k]);
      const double g_gate = std::tanh(z[2 * hdim + k] + zh[2 * hdim + k]);
      const double o_gate = sigmoid(z[3 * hdim + k] + zh[3 * hdim + k]);
      g[k] = i_gate;
      g[hdim + k] = f_gate;
      g[2 * hdim + k] = g_gate;
      g[3 * hdim + k] = o_gate;
      c[k] = f_gate * c[k] + i_gate * g_gate;
      h[k] = o_gate * std::tanh(c[k]);
    }
    std::copy(c.begin(), c.end(), trace.cells.begin() + static_cast<long>(t * hdim));
    std::copy(h.begin(), h.end(), trace.hidden.begin() + static_cast<long>(t * hdim));
  }
  h_out = std::move(h);
}

void backprop_direction(const TokenMatrix& seq, const DirectionParams& p,
                        const LstmTrace& trace, std::span<const double> dh_final,
                        Tensor& dwx, Tensor& dwh, Tensor& db, Tensor* dinput) {
  const std::size_t hdim = p.wh.rows();
  const std::size_t steps = trace.rows.size();
  std::vector<double> dh(dh_final.begin(), dh_final.end());
  std::vector<double> dc(hdim, 0.0), dz(4 * hdim), dh_prev(hdim), zeros(hdim, 0.0);
  std::vector<double> dx(p.wx.rows());
  for (std::size_t s = steps; s-- > 0;) {
    const double* g = trace.gates.data() + s * 4 * hdim;
    const double* c = trace.cells.data() + s * hdim;
    const double* c_prev = s > 0 ? trace.cells.data() + (s - 1) * hdim : zeros.data();
    for (std::size_t k = 0; k < hdim; ++k) {
      const double i_gate = g[k];
      const double f_gate = g[hdim + k];
      const double g_gate = g[2 * hdim + k];
      const double o_gate = g[3 * hdim + k];
      const double tc = std::tanh(c[k]);
      const double d_o = dh[k] * tc;
      dc[k] += dh[k] * o_gate * (1.0 - tc * tc);
      dz[k] = dc[k] * g_gate * i_gate * (1.0 - i_gate);
      dz[hdim + k] = dc[k] * c_prev[k] * f_gate * (1.0 - f_gate);
      dz[2 * hdim + k] = dc[k] * i_gate * (1.0 - g_gate * g_gate);
      dz[3 * hdim + k] = d_o * o_gate * (1.0 - o_gate);
      dc[k] *= f_gate;
    }
    const std::span<const double> h_prev =
        s > 0 ? std::span<const double>(trace.hidden.data() + (s - 1) * hdim, hdim)
              : std::span<const double>(zeros);
    affine_backward(h_prev, p.wh, dz, dh_prev, dwh, db.data());
    const std::size_t row = trace.rows[s];
    if (dinput != nullptr) {
      affine_backward(seq.rows.row(row), p.wx, dz, dx, dwx, {});
      auto target = dinput->row(row);
      for (std::size_t j = 0; j < dx.size(); ++j) target[j] += dx[j];
    } else {
      affine_backward(seq.rows.row(row), p.wx, dz, {}, dwx, {});
    }
    dh.swap(dh_prev);
  }
}

}  // namespace

void init_bilstm(ParamSet& params, const std::string& prefix,
                 std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
  for (const char* dir : {"fwd", "bwd"}) {
    Tensor& b = params.add_zeros(key(prefix, dir, "b"), {4 * hidden_dim});
    for (std::size_t k = 0; k < hidden_dim; ++k) b[hidden_dim + k] = 1.0;
    params.add_glorot(key(prefix, dir, "wh"), hidden_dim, 4 * hidden_dim, rng);
    params.add_glorot(key(prefix, dir, "wx"), input_dim, 4 * hidden_dim, rng);
  }
}

std::size_t bilstm_hidden_dim(const ParamSet& params, std::string_view prefix) {
  return params.at(key(prefix, "fwd", "wh")).rows();
}

std::vector<double> bilstm_reduce(const TokenMatrix& sequence,
                                  const ParamSet& params, std::string_view prefix,
                                  BiLstmTrace* trace) {
  const auto fwd = direction(params, prefix, "fwd");
  const auto bwd = direction(params, prefix, "bwd");
  if (sequence.dim() != fwd.wx.rows() || sequence.mask.size() != sequence.length()) {
    throw ShapeError("bilstm_reduce: sequence " + sequence.rows.shape_string() +
                     " vs input weights " + fwd.wx.shape_string());
  }
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < sequence.length(); ++r) {
    if (sequence.mask[r]) rows.push_back(r);
  }
  BiLstmTrace local;
  BiLstmTrace& tr = trace != nullptr ? *trace : local;
  std::vector<double> h_fwd, h_bwd;
  run_direction(sequence, fwd, rows, tr.forward, h_fwd);
  std::vector<std::size_t> reversed(rows.rbegin(), rows.rend());
  run_direction(sequence, bwd, reversed, tr.backward, h_bwd);
  for (std::size_t k = 0; k < h_fwd.size(); ++k) h_fwd[k] += h_bwd[k];
  return h_fwd;
}

void bilstm_backward(const TokenMatrix& sequence, const ParamSet& params,
                     std::string_view prefix, const BiLstmTrace& trace,
                     std::span<const double> upstream, ParamSet& grads,
                     Tensor* input_grad) {
  if (input_grad != nullptr) *input_grad = Tensor(sequence.rows.shape());
  for (const char* dir : {"fwd", "bwd"}) {
    const auto p = direction(params, prefix, dir);
    const LstmTrace& t = dir[0] == 'f' ? trace.forward : trace.backward;
    backprop_direction(sequence, p, t, upstream, grads.at(key(prefix, dir, "wx")),
                       grads.at(key(prefix, dir, "wh")),
                       grads.at(key(prefix, dir, "b")), input_grad);
  }
}

}  // namespace qfsum::nn
