#include "hetgrnn/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

namespace hetgrnn {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("HETGRNN_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::vector<std::string> resolve_drop_list(const std::vector<std::string>& drop,
                                           const std::vector<std::string>& available) {
    std::vector<std::string> out;
    for (const std::string& d : drop) {
        if (d.empty()) throw ValidationError("drop_modalities: empty entry");
        if (d[0] != '!') {
            out.push_back(d);
            continue;
        }
        const std::string keep = d.substr(1);
        bool found = false;
        for (const std::string& m : available) {
            if (m == keep)
                found = true;
            else
                out.push_back(m);
        }
        if (!found)
            throw ValidationError("drop_modalities: '" + d + "' but modality '" + keep +
                                  "' is not present in the dataset");
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<HeterogeneousGraphSample> build_samples(const std::vector<TrialRecording>& trials,
                                                    const PipelineConfig& config, int threads) {
    std::vector<Segment> segments;
    double fs = 0.0;
    for (const TrialRecording& trial : trials) {
        fs = trial.sampling_rate_hz;
        TrialRecording reduced =
            config.baseline_reduction
                ? baseline_reduce(trial, config.window_seconds, config.baseline_skip_modalities)
                : trial;
        for (Segment& s : window(reduced, config.window_seconds, config.label_threshold)) {
            if (!config.drop_modalities.empty())
                s = filter_modalities(s, config.drop_modalities);
            segments.push_back(std::move(s));
        }
    }

    std::vector<HeterogeneousGraphSample> out(segments.size());
    const int n_workers = std::max(1, resolve_threads(threads));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < segments.size(); i = next.fetch_add(1)) {
            const Segment& seg = segments[i];
            SpectralFeatures feats = extract_de_features(seg, config.bands, fs);
            Matrix adj = build_adjacency(seg, config.mi_bins);
            out[i] = build_sample(seg, feats, adj);
        }
    };
    if (n_workers == 1 || segments.size() < 2) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return out;
}

}  // namespace hetgrnn
