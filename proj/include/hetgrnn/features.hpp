#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>

#include "hetgrnn/core.hpp"
#include "hetgrnn/ingest.hpp"

namespace hetgrnn {

inline constexpr int kNumBands = 4;
inline constexpr double kPowerFloor = 1e-12;

using BandGrid = std::array<std::pair<double, double>, kNumBands>;  // [lo, hi) Hz

/// Per-modality frequency band grids, half-open on bin centers.
struct BandTable {
    std::map<std::string, BandGrid> bands;

    /// Built-in defaults: EEG/EOG/EMG/ECG 4-8/8-14/14-31/31-45,
    /// GSR/Respiration/PPS 0-0.6/0.6-1.2/1.2-1.8/1.8-2.4,
    /// BVP 0-0.1/../0.4, Temperature 0-0.05/../0.2.
    static BandTable defaults();

    /// Override / extend the defaults from a JSON file keyed by modality:
    /// { "EEG": [[4,8],[8,14],[14,31],[31,45]], ... }
    static BandTable from_json(const std::filesystem::path& path);

    const BandGrid& grid_for(const std::string& modality) const;
};

/// DE features and the count of power-floored entries.
struct SpectralFeatures {
    Matrix de;  // N x kNumBands, nats
    std::size_t floored_entries = 0;
};

/// Hann-tapered one-sided power spectrum; p[k] sums to the signal variance
/// over the full band (taper power loss divided out).
std::vector<double> power_spectrum(std::span<const double> x);

/// Total power over DFT bins whose center frequency lies in [lo, hi).
double band_power(std::span<const double> x, double lo_hz, double hi_hz, double fs);

/// Gaussian closed form 0.5*ln(2*pi*e*power), nats. Non-positive power is
/// floored to kPowerFloor; callers count floored entries via the
/// SpectralFeatures diagnostics.
double differential_entropy(double power);

SpectralFeatures extract_de_features(const Segment& segment, const BandTable& table, double fs);

}  // namespace hetgrnn
