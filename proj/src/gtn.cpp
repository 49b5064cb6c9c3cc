#include "hetgrnn/gtn.hpp"

namespace hetgrnn {

using ad::Tape;
using ad::Var;

GtnParams make_gtn_params(ad::ParameterStore& store, const std::string& prefix,
                          const GtnConfig& config, std::size_t num_candidates) {
    if (config.num_layers < 1) throw ValidationError("GTN needs at least one layer");
    GtnParams p;
    p.config = config;
    const std::size_t C = static_cast<std::size_t>(config.num_channels);
    p.layer1_q1 = &store.add(prefix + ".layer1.logits_q1", C, num_candidates);
    p.layer1_q2 = &store.add(prefix + ".layer1.logits_q2", C, num_candidates);
    for (int l = 2; l <= config.num_layers; ++l)
        p.deeper.push_back(
            &store.add(prefix + ".layer" + std::to_string(l) + ".logits", C, num_candidates));
    return p;
}

Var soft_adjacency(Tape& tape, const std::vector<Var>& candidates, Var logits_row) {
    if (candidates.empty()) throw ValidationError("soft_adjacency: no candidates");
    Var w = tape.softmax_rows(logits_row);
    return tape.weighted_sum(candidates, w);
}

Var gt_layer_first(Tape& tape, const std::vector<Var>& candidates, Var logits_q1_row,
                   Var logits_q2_row) {
    Var q1 = soft_adjacency(tape, candidates, logits_q1_row);
    Var q2 = soft_adjacency(tape, candidates, logits_q2_row);
    return tape.row_normalize(tape.matmul(q1, q2));
}

std::vector<Var> gtn_forward(Tape& tape, const std::vector<Var>& candidates,
                             const GtnParams& params) {
    const int C = params.config.num_channels;
    Var q1_all = tape.param(*params.layer1_q1);
    Var q2_all = tape.param(*params.layer1_q2);
    std::vector<Var> deeper_all;
    for (ad::Parameter* p : params.deeper) deeper_all.push_back(tape.param(*p));

    std::vector<Var> out;
    for (int c = 0; c < C; ++c) {
        const std::size_t cc = static_cast<std::size_t>(c);
        Var h = gt_layer_first(tape, candidates,
                               tape.slice(q1_all, cc, cc + 1, 0, q1_all.cols()),
                               tape.slice(q2_all, cc, cc + 1, 0, q2_all.cols()));
        for (Var logits : deeper_all) {
            Var q = soft_adjacency(tape, candidates,
                                   tape.slice(logits, cc, cc + 1, 0, logits.cols()));
            h = tape.row_normalize(tape.matmul(q, h));
        }
        out.push_back(h);
    }
    return out;
}

std::vector<Var> lift_candidates(Tape& tape, const EdgeTypedAdjacencySet& set) {
    std::vector<Var> out;
    out.reserve(set.matrices.size());
    for (const Matrix& m : set.matrices) out.push_back(tape.constant(m));
    return out;
}

}  // namespace hetgrnn
