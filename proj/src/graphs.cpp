#include "hetgrnn/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hetgrnn {

namespace {

std::vector<int> bin_indices(std::span<const double> x, int bins) {
    auto [mn_it, mx_it] = std::minmax_element(x.begin(), x.end());
    const double mn = *mn_it, mx = *mx_it;
    std::vector<int> idx(x.size());
    if (mx == mn) return idx;  // constant vector: single bin
    const double inv = static_cast<double>(bins) / (mx - mn);
    for (std::size_t i = 0; i < x.size(); ++i) {
        int b = static_cast<int>((x[i] - mn) * inv);
        idx[i] = std::min(b, bins - 1);
    }
    return idx;
}

}  // namespace

double mutual_information(std::span<const double> x, std::span<const double> y, int bins) {
    if (bins < 2) throw ValidationError("mutual_information: bins must be >= 2");
    if (x.size() != y.size()) throw ValidationError("mutual_information: length mismatch");
    if (x.size() < static_cast<std::size_t>(bins))
        throw ValidationError("mutual_information: need at least `bins` samples");

    const auto bx = bin_indices(x, bins);
    const auto by = bin_indices(y, bins);

    std::vector<double> joint(static_cast<std::size_t>(bins) * bins, 0.0);
    std::vector<double> px(bins, 0.0), py(bins, 0.0);
    const double w = 1.0 / static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        joint[static_cast<std::size_t>(bx[i]) * bins + by[i]] += w;
        px[bx[i]] += w;
        py[by[i]] += w;
    }

    double mi = 0.0;
    for (int m = 0; m < bins; ++m)
        for (int n = 0; n < bins; ++n) {
            const double pmn = joint[static_cast<std::size_t>(m) * bins + n];
            if (pmn > 0.0) mi += pmn * std::log(pmn / (px[m] * py[n]));
        }
    return std::max(mi, 0.0);
}

Matrix build_adjacency(const Segment& segment, int bins) {
    const std::size_t N = segment.signals.rows;
    const std::size_t T = segment.signals.cols;
    if (N < 2) throw ValidationError("build_adjacency: need at least 2 channels");

    Matrix a(N, N);
    double max_entry = 0.0;
    for (std::size_t u = 0; u < N; ++u)
        for (std::size_t v = u + 1; v < N; ++v) {
            const double mi = mutual_information(std::span(segment.signals.row(u), T),
                                                 std::span(segment.signals.row(v), T), bins);
            a(u, v) = a(v, u) = mi;
            max_entry = std::max(max_entry, mi);
        }
    if (max_entry > 0.0)
        for (double& v : a.data) v /= max_entry;
    return a;
}

std::vector<std::string> distinct_modalities(const std::vector<std::string>& node_modalities) {
    std::set<std::string> s(node_modalities.begin(), node_modalities.end());
    return {s.begin(), s.end()};
}

EdgeTypedAdjacencySet partition_edge_types(const Matrix& adjacency,
                                           const std::vector<std::string>& node_modalities) {
    const std::size_t N = adjacency.rows;
    if (node_modalities.size() != N)
        throw ValidationError("partition_edge_types: modality list length mismatch");

    const auto mods = distinct_modalities(node_modalities);
    std::vector<std::size_t> type_of(N);
    for (std::size_t i = 0; i < N; ++i)
        type_of[i] = static_cast<std::size_t>(
            std::lower_bound(mods.begin(), mods.end(), node_modalities[i]) - mods.begin());

    EdgeTypedAdjacencySet out;
    std::vector<std::vector<std::size_t>> slot(mods.size(),
                                               std::vector<std::size_t>(mods.size()));
    for (std::size_t p = 0; p < mods.size(); ++p)
        for (std::size_t q = p; q < mods.size(); ++q) {
            slot[p][q] = slot[q][p] = out.matrices.size();
            out.matrices.emplace_back(N, N);
            out.edge_type_labels.emplace_back(mods[p], mods[q]);
        }

    for (std::size_t u = 0; u < N; ++u)
        for (std::size_t v = 0; v < N; ++v)
            out.matrices[slot[type_of[u]][type_of[v]]](u, v) = adjacency(u, v);

    out.matrices.push_back(Matrix::identity(N));
    return out;
}

HeterogeneousGraphSample build_sample(const Segment& segment, const SpectralFeatures& features,
                                      const Matrix& adjacency) {
    const std::size_t N = segment.signals.rows;
    if (adjacency.rows != N || adjacency.cols != N || features.de.rows != N)
        throw ValidationError("build_sample: dimension mismatch across inputs");

    HeterogeneousGraphSample s;
    s.node_modalities = segment.channel_modalities;
    s.adjacency = adjacency;
    s.st_sequence = segment.signals;
    s.ss_sequence = features.de;
    s.label_valence = segment.label_valence;
    s.label_arousal = segment.label_arousal;
    s.trial_id = segment.trial_id;
    s.segment_index = segment.index;
    return s;
}

}  // namespace hetgrnn
