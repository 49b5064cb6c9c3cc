#include "hetgrnn/grnn.hpp"

#include <cmath>

namespace hetgrnn {

using ad::Tape;
using ad::Var;

Readout readout_from_string(const std::string& s) {
    if (s == "last") return Readout::Last;
    if (s == "concat") return Readout::Concat;
    if (s == "mean") return Readout::Mean;
    throw ValidationError("unknown readout mode: " + s);
}

std::string to_string(Readout r) {
    switch (r) {
        case Readout::Last: return "last";
        case Readout::Concat: return "concat";
        case Readout::Mean: return "mean";
    }
    return "last";
}

GcnParams make_gcn_params(ad::ParameterStore& store, const std::string& prefix,
                          std::size_t f_in, std::size_t f_out, std::size_t channels) {
    GcnParams p;
    p.W = &store.add(prefix + ".W", f_in, f_out);
    p.b = &store.add(prefix + ".b", 1, f_out);
    p.channel_w = &store.add(prefix + ".w", 1, channels);
    return p;
}

GruParams make_gru_params(ad::ParameterStore& store, const std::string& prefix,
                          std::size_t input_dim, std::size_t hidden_dim) {
    GruParams p;
    p.W_r = &store.add(prefix + ".W_r", input_dim, hidden_dim);
    p.V_r = &store.add(prefix + ".V_r", hidden_dim, hidden_dim);
    p.b_r = &store.add(prefix + ".b_r", 1, hidden_dim);
    p.W_h = &store.add(prefix + ".W_h", input_dim, hidden_dim);
    p.V_h = &store.add(prefix + ".V_h", hidden_dim, hidden_dim);
    p.b_h = &store.add(prefix + ".b_h", 1, hidden_dim);
    p.W_z = &store.add(prefix + ".W_z", input_dim, hidden_dim);
    p.V_z = &store.add(prefix + ".V_z", hidden_dim, hidden_dim);
    p.b_z = &store.add(prefix + ".b_z", 1, hidden_dim);
    return p;
}

Matrix normalize_adjacency(const Matrix& a) {
    if (a.rows != a.cols) throw ValidationError("normalize_adjacency: square matrix required");
    const std::size_t n = a.rows;
    std::vector<double> inv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = 1.0;
        for (std::size_t j = 0; j < n; ++j) d += a(i, j);
        inv_sqrt[i] = 1.0 / std::sqrt(d);
    }
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out(i, j) = (a(i, j) + (i == j ? 1.0 : 0.0)) * inv_sqrt[i] * inv_sqrt[j];
    return out;
}

Var gcn_step(Tape& tape, Var x, Var a_hat, Var W, Var b) {
    return tape.add(tape.relu(tape.matmul(tape.matmul(a_hat, x), W)), b);
}

std::vector<Var> gcn_sequence(Tape& tape, const std::vector<Var>& sequence,
                              const std::vector<Var>& meta_paths, const GcnParams& params) {
    if (sequence.empty()) throw ValidationError("gcn_sequence: empty sequence");
    Var W = tape.param(*params.W);
    Var b = tape.param(*params.b);
    Var w = tape.param(*params.channel_w);
    if (w.cols() != meta_paths.size())
        throw ValidationError("gcn_sequence: channel weights do not match meta-path count");

    std::vector<Var> a_hats;
    a_hats.reserve(meta_paths.size());
    for (Var m : meta_paths) a_hats.push_back(tape.sym_normalize(m));

    std::vector<Var> out;
    out.reserve(sequence.size());
    std::vector<Var> per_channel(meta_paths.size());
    for (Var x : sequence) {
        for (std::size_t c = 0; c < a_hats.size(); ++c)
            per_channel[c] = gcn_step(tape, x, a_hats[c], W, b);
        out.push_back(tape.weighted_sum(per_channel, w));
    }
    return out;
}

GruCell GruCell::lift(Tape& tape, const GruParams& p) {
    return GruCell{tape.param(*p.W_r), tape.param(*p.V_r), tape.param(*p.b_r),
                   tape.param(*p.W_h), tape.param(*p.V_h), tape.param(*p.b_h),
                   tape.param(*p.W_z), tape.param(*p.V_z), tape.param(*p.b_z)};
}

Var GruCell::step(Tape& tape, Var h_in, Var h_prev) const {
    // Gate biases sit inside the nonlinearity (standard GRU).
    Var r = tape.sigmoid(
        tape.add(tape.add(tape.matmul(h_in, W_r), tape.matmul(h_prev, V_r)), b_r));
    Var h_tilde = tape.tanh_(tape.add(
        tape.add(tape.matmul(h_in, W_h), tape.matmul(tape.mul(r, h_prev), V_h)), b_h));
    Var z = tape.sigmoid(
        tape.add(tape.add(tape.matmul(h_in, W_z), tape.matmul(h_prev, V_z)), b_z));
    // (1 - z) * h_tilde + z * h_prev
    Var zh = tape.mul(z, h_prev);
    Var zt = tape.mul(z, h_tilde);
    return tape.add(tape.add(h_tilde, tape.scalar_mul(zt, -1.0)), zh);
}

Var gru_readout(Tape& tape, const std::vector<Var>& outputs, Readout mode) {
    if (outputs.empty()) throw ValidationError("gru_readout: empty output list");
    switch (mode) {
        case Readout::Last: return outputs.back();
        case Readout::Concat: return tape.concat_cols(outputs);
        case Readout::Mean:
            return tape.scalar_mul(tape.sum_list(outputs),
                                   1.0 / static_cast<double>(outputs.size()));
    }
    throw ValidationError("gru_readout: unknown mode");
}

}  // namespace hetgrnn
