#include "hetgrnn/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hetgrnn {

namespace {

using nlohmann::json;

Matrix read_signal_csv(const std::filesystem::path& path,
                       const std::vector<std::string>& expected_channels) {
    std::ifstream in(path);
    if (!in) throw ValidationError("missing signal file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty signal file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() != expected_channels.size())
        throw ValidationError("channel-count mismatch between manifest and CSV: " + path.string() +
                              " has " + std::to_string(header.size()) + " columns, manifest lists " +
                              std::to_string(expected_channels.size()));

    std::vector<double> samples;  // row-per-timestep as written
    std::size_t nrows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t ncols = 0;
        while (std::getline(ss, cell, ',')) {
            double v;
            try {
                v = std::stod(cell);
            } catch (const std::exception&) {
                throw ValidationError("non-numeric sample value in " + path.string());
            }
            if (!std::isfinite(v))
                throw ValidationError("non-finite sample value in " + path.string());
            samples.push_back(v);
            ++ncols;
        }
        if (ncols != header.size())
            throw ValidationError("ragged CSV row in " + path.string());
        ++nrows;
    }

    // Transpose to channels x timesteps.
    Matrix m(header.size(), nrows);
    for (std::size_t t = 0; t < nrows; ++t)
        for (std::size_t c = 0; c < header.size(); ++c)
            m(c, t) = samples[t * header.size() + c];
    return m;
}

void validate_trial(const TrialRecording& tr) {
    if (tr.signals.rows != tr.channel_names.size() ||
        tr.signals.rows != tr.channel_modalities.size())
        throw ValidationError("trial " + tr.id + ": channel metadata length mismatch");
    if (tr.sampling_rate_hz <= 0.0)
        throw ValidationError("trial " + tr.id + ": sampling_rate_hz must be positive");
    if (tr.rating_valence < 1.0 || tr.rating_valence > 9.0 ||
        tr.rating_arousal < 1.0 || tr.rating_arousal > 9.0)
        throw ValidationError("trial " + tr.id + ": ratings must lie in [1,9]");
    double min_steps = (tr.baseline_seconds + 1) * tr.sampling_rate_hz;
    if (static_cast<double>(tr.timesteps()) < min_steps)
        throw ValidationError("trial " + tr.id + ": too few timesteps for baseline span");
}

}  // namespace

std::vector<TrialRecording> load_dataset(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw ValidationError("missing manifest: " + manifest_path.string());

    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ValidationError("malformed manifest " + manifest_path.string() + ": " + e.what());
    }

    std::vector<TrialRecording> out;
    try {
        const double fs = doc.at("sampling_rate_hz").get<double>();
        const int baseline = doc.at("baseline_seconds").get<int>();
        std::vector<std::string> names, modalities;
        for (const auto& ch : doc.at("channels")) {
            names.push_back(ch.at("name").get<std::string>());
            modalities.push_back(ch.at("modality").get<std::string>());
        }
        const auto dir = manifest_path.parent_path();
        for (const auto& t : doc.at("trials")) {
            TrialRecording tr;
            tr.id = t.at("id").get<std::string>();
            tr.sampling_rate_hz = fs;
            tr.baseline_seconds = baseline;
            tr.rating_valence = t.at("rating_valence").get<double>();
            tr.rating_arousal = t.at("rating_arousal").get<double>();
            tr.channel_names = names;
            tr.channel_modalities = modalities;
            tr.signals = read_signal_csv(dir / t.at("file").get<std::string>(), names);
            validate_trial(tr);
            out.push_back(std::move(tr));
        }
    } catch (const json::exception& e) {
        throw ValidationError("malformed manifest " + manifest_path.string() + ": " + e.what());
    }
    return out;
}

TrialRecording baseline_reduce(const TrialRecording& trial, double window_seconds,
                               const std::vector<std::string>& skip_modalities) {
    if (trial.baseline_seconds < 1)
        throw ValidationError("baseline_reduce: trial " + trial.id +
                              " has no pre-trial baseline (baseline_seconds = 0)");
    const std::size_t T =
        static_cast<std::size_t>(std::llround(window_seconds * trial.sampling_rate_hz));
    if (T < 2) throw ValidationError("baseline_reduce: window too short");

    const std::size_t n_base =
        static_cast<std::size_t>(trial.baseline_seconds * trial.sampling_rate_hz) / T;
    if (n_base == 0)
        throw ValidationError("baseline_reduce: baseline span shorter than one window");

    const std::size_t N = trial.channels();
    const std::size_t base_steps = n_base * T;
    const std::size_t post_steps = trial.timesteps() - base_steps;
    const std::size_t n_post = post_steps / T;
    if (n_post == 0) throw ValidationError("baseline_reduce: no full post-baseline window");

    // Mean baseline window, elementwise over the window, per channel.
    Matrix base(N, T);
    for (std::size_t c = 0; c < N; ++c)
        for (std::size_t w = 0; w < n_base; ++w)
            for (std::size_t j = 0; j < T; ++j) base(c, j) += trial.signals(c, w * T + j);
    for (double& v : base.data) v /= static_cast<double>(n_base);

    TrialRecording out = trial;
    out.signals = Matrix(N, n_post * T);
    for (std::size_t c = 0; c < N; ++c) {
        const bool skip = std::find(skip_modalities.begin(), skip_modalities.end(),
                                    trial.channel_modalities[c]) != skip_modalities.end();
        for (std::size_t w = 0; w < n_post; ++w)
            for (std::size_t j = 0; j < T; ++j) {
                double v = trial.signals(c, base_steps + w * T + j);
                out.signals(c, w * T + j) = skip ? v : v - base(c, j);
            }
    }
    out.baseline_seconds = 0;
    return out;
}

int binarize_label(double rating, double threshold) {
    if (rating < 1.0 || rating > 9.0)
        throw ValidationError("binarize_label: rating outside [1,9]");
    return rating > threshold ? 1 : 0;
}

std::vector<Segment> window(const TrialRecording& trial, double window_seconds,
                            double threshold) {
    const std::size_t T =
        static_cast<std::size_t>(std::llround(window_seconds * trial.sampling_rate_hz));
    if (T < 2) throw ValidationError("window: window too short (T < 2)");
    if (T > trial.timesteps())
        throw ValidationError("window: window longer than trial (" + std::to_string(T) + " > " +
                              std::to_string(trial.timesteps()) + ")");

    const int lv = binarize_label(trial.rating_valence, threshold);
    const int la = binarize_label(trial.rating_arousal, threshold);
    const std::size_t count = trial.timesteps() / T;
    const std::size_t N = trial.channels();

    std::vector<Segment> out;
    out.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        Segment s;
        s.trial_id = trial.id;
        s.index = w;
        s.channel_modalities = trial.channel_modalities;
        s.label_valence = lv;
        s.label_arousal = la;
        s.signals = Matrix(N, T);
        for (std::size_t c = 0; c < N; ++c)
            for (std::size_t j = 0; j < T; ++j) s.signals(c, j) = trial.signals(c, w * T + j);
        out.push_back(std::move(s));
    }
    return out;
}

Segment filter_modalities(const Segment& seg, const std::vector<std::string>& drop) {
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < seg.signals.rows; ++c)
        if (std::find(drop.begin(), drop.end(), seg.channel_modalities[c]) == drop.end())
            keep.push_back(c);
    if (keep.empty()) throw ValidationError("filter_modalities: no channels left");
    if (keep.size() == seg.signals.rows) return seg;

    Segment out = seg;
    out.signals = Matrix(keep.size(), seg.signals.cols);
    out.channel_modalities.clear();
    for (std::size_t i = 0; i < keep.size(); ++i) {
        out.channel_modalities.push_back(seg.channel_modalities[keep[i]]);
        for (std::size_t j = 0; j < seg.signals.cols; ++j)
            out.signals(i, j) = seg.signals(keep[i], j);
    }
    return out;
}

}  // namespace hetgrnn
