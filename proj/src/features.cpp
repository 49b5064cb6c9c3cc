#include "hetgrnn/features.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include <json.hpp>

namespace hetgrnn {

namespace {

using cplx = std::complex<double>;

bool is_pow2(std::size_t n) { return n && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey.
void fft_pow2(std::vector<cplx>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = a[i + k];
                cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// O(n^2) fallback for non power-of-two windows.
std::vector<cplx> dft_naive(const std::vector<cplx>& x) {
    const std::size_t n = x.size();
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc(0.0, 0.0);
        const double w = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        for (std::size_t t = 0; t < n; ++t)
            acc += x[t] * cplx(std::cos(w * static_cast<double>(t)),
                               std::sin(w * static_cast<double>(t)));
        out[k] = acc;
    }
    return out;
}

}  // namespace

std::vector<double> power_spectrum(std::span<const double> x) {
    const std::size_t T = x.size();
    if (T < 2) throw ValidationError("power_spectrum: need at least 2 samples");

    // Hann taper w[n] = 0.5(1 - cos(2 pi n / (T-1))).
    std::vector<cplx> buf(T);
    double w2_sum = 0.0;
    for (std::size_t n = 0; n < T; ++n) {
        const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                               static_cast<double>(T - 1)));
        buf[n] = cplx(x[n] * w, 0.0);
        w2_sum += w * w;
    }
    const double mean_w2 = w2_sum / static_cast<double>(T);

    if (is_pow2(T))
        fft_pow2(buf);
    else
        buf = dft_naive(buf);

    // One-sided spectrum; interior bins doubled. Normalization divides out
    // the taper power loss so the full-band sum estimates the variance.
    const std::size_t half = T / 2;
    std::vector<double> p(half + 1);
    const double norm = static_cast<double>(T) * static_cast<double>(T) * mean_w2;
    for (std::size_t k = 0; k <= half; ++k) {
        double mag2 = std::norm(buf[k]);
        double scale = (k == 0 || (T % 2 == 0 && k == half)) ? 1.0 : 2.0;
        p[k] = scale * mag2 / norm;
    }
    return p;
}

namespace {

double band_sum(const std::vector<double>& p, double lo_hz, double hi_hz, double fs,
                std::size_t T) {
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double f = static_cast<double>(k) * fs / static_cast<double>(T);
        if (f >= lo_hz && f < hi_hz) {
            sum += p[k];
            ++hits;
        }
    }
    if (hits == 0)
        throw ValidationError("empty frequency band [" + std::to_string(lo_hz) + ", " +
                              std::to_string(hi_hz) + ") Hz at fs=" + std::to_string(fs) +
                              ": no bin centers fall inside");
    return sum;
}

}  // namespace

double band_power(std::span<const double> x, double lo_hz, double hi_hz, double fs) {
    if (fs <= 0.0) throw ValidationError("band_power: fs must be positive");
    if (!(lo_hz >= 0.0 && lo_hz < hi_hz && hi_hz <= fs / 2.0 + 1e-9))
        throw ValidationError("band_power: band must satisfy 0 <= lo < hi <= fs/2");
    return band_sum(power_spectrum(x), lo_hz, hi_hz, fs, x.size());
}

double differential_entropy(double power) {
    if (power < kPowerFloor) power = kPowerFloor;
    return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * power);
}

BandTable BandTable::defaults() {
    BandTable t;
    const BandGrid eeg{{{4.0, 8.0}, {8.0, 14.0}, {14.0, 31.0}, {31.0, 45.0}}};
    const BandGrid slow{{{0.0, 0.6}, {0.6, 1.2}, {1.2, 1.8}, {1.8, 2.4}}};
    const BandGrid bvp{{{0.0, 0.1}, {0.1, 0.2}, {0.2, 0.3}, {0.3, 0.4}}};
    const BandGrid temp{{{0.0, 0.05}, {0.05, 0.1}, {0.1, 0.15}, {0.15, 0.2}}};
    t.bands["EEG"] = eeg;
    t.bands["EOG"] = eeg;
    t.bands["EMG"] = eeg;
    t.bands["ECG"] = eeg;
    t.bands["GSR"] = slow;
    t.bands["Respiration"] = slow;
    t.bands["PPS"] = slow;
    t.bands["BVP"] = bvp;
    t.bands["Temperature"] = temp;
    return t;
}

BandTable BandTable::from_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("missing band table file: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("malformed band table " + path.string() + ": " + e.what());
    }
    BandTable t = defaults();
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!it.value().is_array() || it.value().size() != kNumBands)
            throw ValidationError("band table " + path.string() + ": modality " + it.key() +
                                  " must list exactly 4 bands");
        BandGrid g;
        for (int b = 0; b < kNumBands; ++b) {
            g[b] = {it.value()[b].at(0).get<double>(), it.value()[b].at(1).get<double>()};
            if (!(g[b].first >= 0.0 && g[b].first < g[b].second))
                throw ValidationError("band table " + path.string() + ": bad band for " + it.key());
        }
        t.bands[it.key()] = g;
    }
    return t;
}

const BandGrid& BandTable::grid_for(const std::string& modality) const {
    auto it = bands.find(modality);
    if (it == bands.end())
        throw ValidationError("no band table entry for modality '" + modality + "'");
    return it->second;
}

SpectralFeatures extract_de_features(const Segment& segment, const BandTable& table, double fs) {
    const std::size_t N = segment.signals.rows;
    const std::size_t T = segment.signals.cols;
    SpectralFeatures out;
    out.de = Matrix(N, kNumBands);
    for (std::size_t c = 0; c < N; ++c) {
        const BandGrid& grid = table.grid_for(segment.channel_modalities[c]);
        const auto p = power_spectrum(std::span<const double>(segment.signals.row(c), T));
        for (int b = 0; b < kNumBands; ++b) {
            double pw = band_sum(p, grid[b].first, grid[b].second, fs, T);
            if (pw < kPowerFloor) ++out.floored_entries;
            out.de(c, b) = differential_entropy(pw);
        }
    }
    return out;
}

}  // namespace hetgrnn
