#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hetgrnn/core.hpp"

namespace hetgrnn {

/// One recorded trial: N channels x timesteps, channel-per-row.
struct TrialRecording {
    std::string id;
    Matrix signals;  // N x timesteps
    std::vector<std::string> channel_names;
    std::vector<std::string> channel_modalities;
    double sampling_rate_hz = 0.0;
    int baseline_seconds = 0;
    double rating_valence = 0.0;
    double rating_arousal = 0.0;

    std::size_t channels() const { return signals.rows; }
    std::size_t timesteps() const { return signals.cols; }
};

/// One fixed-length window of a trial with binarized labels.
struct Segment {
    std::string trial_id;
    std::size_t index = 0;
    Matrix signals;  // N x T
    std::vector<std::string> channel_modalities;
    int label_valence = 0;
    int label_arousal = 0;
};

/// Parse dataset.json + per-trial CSVs. Channel order is taken verbatim
/// from the manifest; every invariant is validated up front.
std::vector<TrialRecording> load_dataset(const std::filesystem::path& manifest_path);

/// Subtract the mean pre-trial window (elementwise over the window, per
/// channel) from every post-baseline window. Returns a trial holding only
/// the corrected post-baseline span, truncated to whole windows.
/// `skip_modalities` lists modalities left uncorrected.
TrialRecording baseline_reduce(const TrialRecording& trial, double window_seconds,
                               const std::vector<std::string>& skip_modalities = {});

/// Non-overlapping contiguous windows; the trailing partial window is
/// discarded. Labels come from threshold binarization of the trial ratings.
std::vector<Segment> window(const TrialRecording& trial, double window_seconds,
                            double threshold = 5.0);

/// 1 (high) iff rating > threshold, else 0.
int binarize_label(double rating, double threshold = 5.0);

/// Drop channels whose modality is listed. Errors if nothing remains.
Segment filter_modalities(const Segment& seg, const std::vector<std::string>& drop);

}  // namespace hetgrnn
