#include "hetgrnn/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <vector>

namespace hetgrnn {

using nlohmann::json;

namespace {

constexpr double kArPhi = 0.9;
constexpr double kArInnovSd = 0.3;
constexpr double kThetaFreqHz = 6.0;
constexpr double kThetaAmp = 0.5;
constexpr double kGammaFreqHz = 38.0;
constexpr double kGammaAmp = 1.0;
constexpr double kEmgFreqHz = 20.0;
constexpr double kEmgAmp = 0.5;

std::vector<double> ar1(Rng& rng, std::size_t n) {
    std::vector<double> x(n);
    double prev = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        prev = kArPhi * prev + kArInnovSd * rng.normal();
        x[t] = prev;
    }
    return x;
}

// Pairing patterns: class 0 couples i with i^1, class 1 with i^2.
int partner_of(int channel, int n_channels, int cls, bool identical) {
    const int p = channel ^ ((cls == 0 || identical) ? 1 : 2);
    return p < n_channels ? p : channel;
}

}  // namespace

void SynthConfig::validate() const {
    if (n_trials < 2) throw ValidationError("synth: need at least 2 trials");
    if (eeg_channels < 2 || pps_channels < 0)
        throw ValidationError("synth: need at least 2 EEG channels");
    if (sampling_rate_hz <= 0 || trial_seconds < 1 || baseline_seconds < 1)
        throw ValidationError("synth: bad timing configuration");
    if (gamma_gain < 1.0) throw ValidationError("synth: gamma_gain must be >= 1");
    if (coupling < 0.0 || coupling > 1.0)
        throw ValidationError("synth: coupling must lie in [0,1]");
}

json SynthConfig::to_json() const {
    return json{{"n_trials", n_trials},
                {"eeg_channels", eeg_channels},
                {"pps_channels", pps_channels},
                {"sampling_rate_hz", sampling_rate_hz},
                {"trial_seconds", trial_seconds},
                {"baseline_seconds", baseline_seconds},
                {"gamma_gain", gamma_gain},
                {"coupling", coupling},
                {"identical_coupling", identical_coupling},
                {"seed", seed}};
}

void generate_synth_dataset(const SynthConfig& config, const std::filesystem::path& out_dir) {
    config.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);

    const int N = config.eeg_channels + config.pps_channels;
    const std::size_t fs = static_cast<std::size_t>(config.sampling_rate_hz);
    const std::size_t base_steps = static_cast<std::size_t>(config.baseline_seconds) * fs;
    const std::size_t trial_steps = static_cast<std::size_t>(config.trial_seconds) * fs;
    const std::size_t total = base_steps + trial_steps;

    // Exact 50/50 class assignment, order shuffled.
    std::vector<int> labels(config.n_trials);
    for (int i = 0; i < config.n_trials; ++i) labels[i] = i % 2;
    Rng label_rng(derive_seed(config.seed, 0));
    label_rng.shuffle(labels);

    json manifest;
    manifest["sampling_rate_hz"] = config.sampling_rate_hz;
    manifest["baseline_seconds"] = config.baseline_seconds;
    manifest["synth"] = config.to_json();
    manifest["channels"] = json::array();
    std::vector<std::string> names;
    for (int c = 0; c < config.eeg_channels; ++c) {
        names.push_back("EEG" + std::to_string(c + 1));
        manifest["channels"].push_back(json{{"name", names.back()}, {"modality", "EEG"}});
    }
    for (int c = 0; c < config.pps_channels; ++c) {
        names.push_back("EMG" + std::to_string(c + 1));
        manifest["channels"].push_back(json{{"name", names.back()}, {"modality", "EMG"}});
    }
    manifest["trials"] = json::array();

    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<std::vector<double>> channels(N);

    for (int trial = 0; trial < config.n_trials; ++trial) {
        Rng rng(derive_seed(config.seed, 1 + static_cast<std::uint64_t>(trial)));
        const int cls = labels[trial];

        // Shared latents for the stimulus span.
        const double theta_phase = rng.uniform(0.0, two_pi);
        const double gamma_phase = rng.uniform(0.0, two_pi);
        std::vector<std::vector<double>> coupling_latents(N);
        for (int c = 0; c < N; ++c) coupling_latents[c] = ar1(rng, trial_steps);

        for (int c = 0; c < N; ++c) channels[c] = ar1(rng, total);

        for (int c = 0; c < N; ++c) {
            const bool eeg = c < config.eeg_channels;
            const bool designated = eeg && c < config.eeg_channels / 2;
            // amplitude scales by gamma_gain so the class DE offset in the
            // top band is ln(gamma_gain) (DE = 0.5 ln(2*pi*e*power))
            const double gamma_amp =
                designated && cls == 0 ? kGammaAmp * config.gamma_gain : kGammaAmp;
            const int partner = partner_of(c, N, cls, config.identical_coupling);
            // one latent stream per unordered pair, keyed by the lower index
            const std::vector<double>& shared = coupling_latents[std::min(c, partner)];

            for (std::size_t t = base_steps; t < total; ++t) {
                const double ts = static_cast<double>(t - base_steps) / config.sampling_rate_hz;
                double v = channels[c][t];
                if (eeg) {
                    v += kThetaAmp * std::sin(two_pi * kThetaFreqHz * ts + theta_phase);
                    v += gamma_amp * std::sin(two_pi * kGammaFreqHz * ts + gamma_phase);
                } else {
                    v += kEmgAmp * std::sin(two_pi * kEmgFreqHz * ts + theta_phase);
                }
                if (partner != c) v += config.coupling * shared[t - base_steps];
                channels[c][t] = v;
            }
        }

        char fname[32];
        std::snprintf(fname, sizeof(fname), "trial_%03d.csv", trial);
        std::ofstream csv(out_dir / fname);
        if (!csv) throw ValidationError("synth: cannot write " + (out_dir / fname).string());
        for (int c = 0; c < N; ++c) csv << (c ? "," : "") << names[c];
        csv << "\n";
        char buf[32];
        for (std::size_t t = 0; t < total; ++t) {
            for (int c = 0; c < N; ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g", channels[c][t]);
                if (c) csv.put(',');
                csv << buf;
            }
            csv.put('\n');
        }

        const double rating = cls == 1 ? 8.0 : 2.0;
        manifest["trials"].push_back(json{{"id", std::string(fname, 9)},
                                          {"file", fname},
                                          {"rating_valence", rating},
                                          {"rating_arousal", rating}});
    }

    std::ofstream mf(out_dir / "dataset.json");
    if (!mf) throw ValidationError("synth: cannot write dataset.json");
    mf << manifest.dump(2) << "\n";
}

}  // namespace hetgrnn
