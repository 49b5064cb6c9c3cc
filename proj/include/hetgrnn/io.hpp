#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetgrnn/autodiff.hpp"
#include "hetgrnn/graphs.hpp"

namespace hetgrnn {

/// Binary graph-sample container: fixed header (N, T, B, modality table),
/// then per sample little-endian float64 row-major adjacency, st_sequence,
/// ss_sequence. A JSON sidecar (<file>.index.json) carries labels and trial
/// provenance. Round-trips are bit-exact.
void save_samples(const std::vector<HeterogeneousGraphSample>& samples,
                  const std::filesystem::path& path);
std::vector<HeterogeneousGraphSample> load_samples(const std::filesystem::path& path);

/// ParameterStore checkpoint: manifest.json (ordered names + shapes, plus
/// caller metadata) and params.bin of concatenated little-endian float64.
void save_checkpoint(const ad::ParameterStore& store, const nlohmann::json& metadata,
                     const std::filesystem::path& dir);

/// Load into an existing store; every name and shape must match exactly.
nlohmann::json load_checkpoint(ad::ParameterStore& store, const std::filesystem::path& dir);

/// Read just the metadata (e.g. to rebuild the model before loading).
nlohmann::json read_checkpoint_metadata(const std::filesystem::path& dir);

}  // namespace hetgrnn
