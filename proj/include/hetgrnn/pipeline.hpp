#pragma once

#include <vector>

#include "hetgrnn/features.hpp"
#include "hetgrnn/graphs.hpp"
#include "hetgrnn/ingest.hpp"

namespace hetgrnn {

/// Trial -> segment -> graph-sample construction settings.
struct PipelineConfig {
    double window_seconds = 1.0;
    double label_threshold = 5.0;
    int mi_bins = kDefaultMiBins;
    bool baseline_reduction = true;
    std::vector<std::string> baseline_skip_modalities;  // per-modality disable
    std::vector<std::string> drop_modalities;           // ablation channel filter
    BandTable bands = BandTable::defaults();
};

/// Run the full construction for every trial. Deterministic regardless of
/// `threads`: each segment writes its own output slot.
std::vector<HeterogeneousGraphSample> build_samples(const std::vector<TrialRecording>& trials,
                                                    const PipelineConfig& config,
                                                    int threads = 1);

/// Worker cap: explicit argument, else HETGRNN_THREADS, else hardware.
int resolve_threads(int requested = 0);

/// Expand drop markers against the dataset's modality set: "!X" means
/// "drop everything except X". Plain entries pass through.
std::vector<std::string> resolve_drop_list(const std::vector<std::string>& drop,
                                           const std::vector<std::string>& available);

}  // namespace hetgrnn
