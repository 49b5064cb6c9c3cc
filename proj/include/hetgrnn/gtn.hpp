#pragma once

#include <string>
#include <vector>

#include "hetgrnn/autodiff.hpp"
#include "hetgrnn/core.hpp"
#include "hetgrnn/graphs.hpp"

namespace hetgrnn {

/// GTN hyperparameters. Candidates are the edge-typed adjacencies plus the
/// identity, so num_candidates = R' + 1.
struct GtnConfig {
    int num_layers = 2;    // L
    int num_channels = 2;  // C^A
};

/// Handles into the ParameterStore. The first GT-layer selects two graph
/// structures, later layers one each; every logit tensor is C^A x N_a.
struct GtnParams {
    ad::Parameter* layer1_q1 = nullptr;
    ad::Parameter* layer1_q2 = nullptr;
    std::vector<ad::Parameter*> deeper;  // layers 2..L
    GtnConfig config;
};

/// Register GTN logits under "<prefix>.layer<l>.logits*", zero-initialized
/// (uniform attention over edge types).
GtnParams make_gtn_params(ad::ParameterStore& store, const std::string& prefix,
                          const GtnConfig& config, std::size_t num_candidates);

/// Convex combination of candidate matrices with softmax(logits) weights.
ad::Var soft_adjacency(ad::Tape& tape, const std::vector<ad::Var>& candidates,
                       ad::Var logits_row);

/// First GT-layer: D^{-1} Q1 Q2 with D the row-degree matrix of Q1 Q2;
/// zero-degree rows stay zero.
ad::Var gt_layer_first(ad::Tape& tape, const std::vector<ad::Var>& candidates,
                       ad::Var logits_q1_row, ad::Var logits_q2_row);

/// Full GTN: per channel, compose layer selections into a meta-path
/// adjacency, renormalizing rows after each product.
std::vector<ad::Var> gtn_forward(ad::Tape& tape, const std::vector<ad::Var>& candidates,
                                 const GtnParams& params);

/// Convenience: lift an EdgeTypedAdjacencySet onto a tape as constants.
std::vector<ad::Var> lift_candidates(ad::Tape& tape, const EdgeTypedAdjacencySet& set);

}  // namespace hetgrnn
