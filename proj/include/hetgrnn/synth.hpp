#pragma once

#include <filesystem>

#include <json.hpp>

#include "hetgrnn/core.hpp"

namespace hetgrnn {

/// Synthetic multi-modal dataset with class-dependent gamma-band energy and
/// cross-channel coupling structure. Channels are tagged EEG and EMG (the
/// peripheral modality), so 1 s windows have populated band grids.
///
/// Class 0 scales the 38 Hz component's amplitude by gamma_gain on the
/// designated (first half of EEG) channels, so the class DE difference in
/// the top band is ~ln(gamma_gain). The classes use
/// different channel-pairing patterns for the shared coupling latents
/// (partner i^1 vs i^2) unless identical_coupling is set.
struct SynthConfig {
    int n_trials = 100;
    int eeg_channels = 6;
    int pps_channels = 2;
    double sampling_rate_hz = 128.0;
    int trial_seconds = 60;
    int baseline_seconds = 3;
    double gamma_gain = 4.0;   // class-0 gamma amplitude multiplier, > 1
    double coupling = 0.8;     // shared-latent mixing coefficient
    bool identical_coupling = false;  // null config: same pattern both classes
    std::uint64_t seed = 1;

    void validate() const;
    nlohmann::json to_json() const;
};

/// Write dataset.json + per-trial CSVs in the ingest format. Deterministic:
/// the same config produces bitwise-identical files.
void generate_synth_dataset(const SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace hetgrnn
