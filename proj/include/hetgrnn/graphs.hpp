#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hetgrnn/core.hpp"
#include "hetgrnn/features.hpp"
#include "hetgrnn/ingest.hpp"

namespace hetgrnn {

inline constexpr int kDefaultMiBins = 8;

/// One training sample: node-type map, MI adjacency shared by both streams,
/// raw-amplitude sequence (N x T) and DE sequence (N x B).
struct HeterogeneousGraphSample {
    std::vector<std::string> node_modalities;
    Matrix adjacency;    // N x N, symmetric, zero diagonal, entries in [0,1]
    Matrix st_sequence;  // N x T
    Matrix ss_sequence;  // N x B
    int label_valence = 0;
    int label_arousal = 0;
    std::string trial_id;
    std::size_t segment_index = 0;

    std::size_t nodes() const { return adjacency.rows; }
};

/// The heterogeneous adjacency split per unordered modality pair, with the
/// identity appended as the last matrix. edge_type_labels covers the
/// non-identity matrices, in enumeration order.
struct EdgeTypedAdjacencySet {
    std::vector<Matrix> matrices;
    std::vector<std::pair<std::string, std::string>> edge_type_labels;
};

/// Histogram MI in nats: equal-width bins over each vector's own
/// [min, max] span, joint table, sum p(m,n) ln(p(m,n)/(p(m)p(n))).
/// Constant vectors occupy a single bin. Clamped at 0.
double mutual_information(std::span<const double> x, std::span<const double> y, int bins);

/// Pairwise-MI adjacency over the segment's temporal signals: zero
/// diagonal, max-normalized so the largest entry is 1 (unless all zero).
Matrix build_adjacency(const Segment& segment, int bins = kDefaultMiBins);

EdgeTypedAdjacencySet partition_edge_types(const Matrix& adjacency,
                                           const std::vector<std::string>& node_modalities);

HeterogeneousGraphSample build_sample(const Segment& segment, const SpectralFeatures& features,
                                      const Matrix& adjacency);

/// Sorted distinct modality tags; fixes the edge-type enumeration order.
std::vector<std::string> distinct_modalities(const std::vector<std::string>& node_modalities);

}  // namespace hetgrnn
