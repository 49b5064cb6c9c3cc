#pragma once

#include <string>
#include <vector>

#include "hetgrnn/autodiff.hpp"
#include "hetgrnn/core.hpp"

namespace hetgrnn {

enum class Readout { Last, Concat, Mean };

Readout readout_from_string(const std::string& s);
std::string to_string(Readout r);

/// One shared (W, b) across every graph in the sequence, plus the
/// meta-path channel mixing weights.
struct GcnParams {
    ad::Parameter* W = nullptr;          // F_in x F_out
    ad::Parameter* b = nullptr;          // 1 x F_out
    ad::Parameter* channel_w = nullptr;  // 1 x C^A
};

struct GruParams {
    ad::Parameter *W_r = nullptr, *V_r = nullptr, *b_r = nullptr;
    ad::Parameter *W_h = nullptr, *V_h = nullptr, *b_h = nullptr;
    ad::Parameter *W_z = nullptr, *V_z = nullptr, *b_z = nullptr;
};

GcnParams make_gcn_params(ad::ParameterStore& store, const std::string& prefix,
                          std::size_t f_in, std::size_t f_out, std::size_t channels);
GruParams make_gru_params(ad::ParameterStore& store, const std::string& prefix,
                          std::size_t input_dim, std::size_t hidden_dim);

/// D^{-1/2} (A + I) D^{-1/2}, matrix form for callers outside a tape.
Matrix normalize_adjacency(const Matrix& a);

/// ReLU(A_hat x W) + b, bias applied after the activation.
ad::Var gcn_step(ad::Tape& tape, ad::Var x, ad::Var a_hat, ad::Var W, ad::Var b);

/// Per channel: normalize its meta-path once, convolve every graph with the
/// shared (W, b), then combine channels by the learned weighted sum.
std::vector<ad::Var> gcn_sequence(ad::Tape& tape, const std::vector<ad::Var>& sequence,
                                  const std::vector<ad::Var>& meta_paths,
                                  const GcnParams& params);

struct GruCell {
    ad::Var W_r, V_r, b_r, W_h, V_h, b_h, W_z, V_z, b_z;

    static GruCell lift(ad::Tape& tape, const GruParams& p);
    /// Standard GRU step; h_in is 1 x input_dim, h_prev 1 x hidden_dim.
    ad::Var step(ad::Tape& tape, ad::Var h_in, ad::Var h_prev) const;
};

ad::Var gru_readout(ad::Tape& tape, const std::vector<ad::Var>& outputs, Readout mode);

}  // namespace hetgrnn
