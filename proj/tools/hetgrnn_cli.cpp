// Command-line surface over the hetgrnn library.
//
// Exit codes: 0 success, 1 usage error, 2 validation error, 3 numeric failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetgrnn/io.hpp"
#include "hetgrnn/model.hpp"
#include "hetgrnn/pipeline.hpp"
#include "hetgrnn/synth.hpp"
#include "hetgrnn/train.hpp"

using nlohmann::json;
using namespace hetgrnn;

namespace {

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("config file " + path + ": " + e.what());
    }
    if (!j.is_object()) throw ValidationError("config file must hold a JSON object");
    return j;
}

// Config sections are partial: only present keys override the defaults.
template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void apply_json(SynthConfig& c, const json& j) {
    maybe(j, "n_trials", c.n_trials);
    maybe(j, "eeg_channels", c.eeg_channels);
    maybe(j, "pps_channels", c.pps_channels);
    maybe(j, "sampling_rate_hz", c.sampling_rate_hz);
    maybe(j, "trial_seconds", c.trial_seconds);
    maybe(j, "baseline_seconds", c.baseline_seconds);
    maybe(j, "gamma_gain", c.gamma_gain);
    maybe(j, "coupling", c.coupling);
    maybe(j, "identical_coupling", c.identical_coupling);
    maybe(j, "seed", c.seed);
}

void apply_json(PipelineConfig& c, const json& j) {
    maybe(j, "window_seconds", c.window_seconds);
    maybe(j, "label_threshold", c.label_threshold);
    maybe(j, "mi_bins", c.mi_bins);
    maybe(j, "baseline_reduction", c.baseline_reduction);
    maybe(j, "baseline_skip_modalities", c.baseline_skip_modalities);
    maybe(j, "drop_modalities", c.drop_modalities);
    if (j.contains("bands_file"))
        c.bands = BandTable::from_json(j.at("bands_file").get<std::string>());
}

json pipeline_to_json(const PipelineConfig& c) {
    return json{{"window_seconds", c.window_seconds},
                {"label_threshold", c.label_threshold},
                {"mi_bins", c.mi_bins},
                {"baseline_reduction", c.baseline_reduction},
                {"baseline_skip_modalities", c.baseline_skip_modalities},
                {"drop_modalities", c.drop_modalities}};
}

void apply_json(ModelConfig& c, const json& j) {
    maybe(j, "gtn_layers", c.gtn_layers);
    maybe(j, "gtn_channels", c.gtn_channels);
    maybe(j, "gcn_out", c.gcn_out);
    maybe(j, "gru_hidden", c.gru_hidden);
    maybe(j, "head_proj", c.head_proj);
    maybe(j, "head_hidden", c.head_hidden);
    maybe(j, "use_gtn", c.use_gtn);
    maybe(j, "use_gcn", c.use_gcn);
    maybe(j, "use_gru", c.use_gru);
    maybe(j, "use_st", c.use_st);
    maybe(j, "use_ss", c.use_ss);
    maybe(j, "drop_modalities", c.drop_modalities);
    maybe(j, "task", c.task);
    if (j.contains("readout_st"))
        c.readout_st = readout_from_string(j.at("readout_st").get<std::string>());
    if (j.contains("readout_ss"))
        c.readout_ss = readout_from_string(j.at("readout_ss").get<std::string>());
}

void apply_json(TrainingConfig& c, const json& j) {
    maybe(j, "task", c.task);
    maybe(j, "folds", c.folds);
    maybe(j, "epochs", c.epochs);
    maybe(j, "batch_size", c.batch_size);
    maybe(j, "learning_rate", c.learning_rate);
    maybe(j, "beta1", c.beta1);
    maybe(j, "beta2", c.beta2);
    maybe(j, "adam_eps", c.adam_eps);
    maybe(j, "seed", c.seed);
    maybe(j, "shuffle", c.shuffle);
    maybe(j, "split_by", c.split_by);
    maybe(j, "threads", c.threads);
}

void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const std::string& config_path, std::uint64_t seed, const json& resolved) {
    std::filesystem::create_directories(out_dir);
    json m;
    m["command"] = command;
    m["config_path"] = config_path;
    m["seed"] = seed;
    m["version"] = kVersion;
    m["created_utc"] = utc_now();
    m["config"] = resolved;
    std::ofstream out(out_dir / "manifest.json");
    if (!out) throw ValidationError("cannot write " + (out_dir / "manifest.json").string());
    out << m.dump(2) << "\n";
}

/// Load graph samples either from a dataset directory (dataset.json +
/// CSVs, run through the construction pipeline) or from a saved binary
/// container file.
std::vector<HeterogeneousGraphSample> load_any_samples(const std::string& dataset,
                                                       PipelineConfig pipe, int threads) {
    const std::filesystem::path p(dataset);
    if (std::filesystem::is_regular_file(p) && p.extension() != ".json")
        return load_samples(p);
    const auto manifest = std::filesystem::is_directory(p) ? p / "dataset.json" : p;
    auto trials = load_dataset(manifest);
    if (trials.empty()) throw ValidationError("dataset has no trials");
    if (!pipe.drop_modalities.empty())
        pipe.drop_modalities =
            resolve_drop_list(pipe.drop_modalities,
                              distinct_modalities(trials[0].channel_modalities));
    return build_samples(trials, pipe, threads);
}

struct CommonOpts {
    std::string config_path;
    std::string dataset;
    std::string out;
    int threads = 0;
};

int cmd_synth(const CommonOpts& opts, SynthConfig cfg) {
    if (opts.out.empty()) throw CLI::ValidationError("--out is required");
    generate_synth_dataset(cfg, opts.out);
    write_manifest(opts.out, "synth", opts.config_path, cfg.seed, cfg.to_json());
    std::cout << "wrote " << cfg.n_trials << " trials to " << opts.out << "\n";
    return 0;
}

int cmd_features(const CommonOpts& opts, const PipelineConfig& pipe) {
    if (opts.dataset.empty() || opts.out.empty())
        throw CLI::ValidationError("--dataset and --out are required");
    auto trials = load_dataset(std::filesystem::is_directory(opts.dataset)
                                   ? std::filesystem::path(opts.dataset) / "dataset.json"
                                   : std::filesystem::path(opts.dataset));
    std::filesystem::create_directories(opts.out);
    std::ofstream csv(std::filesystem::path(opts.out) / "features.csv");
    if (!csv) throw ValidationError("cannot write features.csv under " + opts.out);
    csv << "trial_id,segment,channel,modality";
    for (int b = 1; b <= kNumBands; ++b) csv << ",de_band" << b;
    csv << ",label_valence,label_arousal\n";

    char buf[32];
    std::size_t n_segments = 0;
    for (const TrialRecording& trial : trials) {
        TrialRecording reduced = pipe.baseline_reduction
                                     ? baseline_reduce(trial, pipe.window_seconds,
                                                       pipe.baseline_skip_modalities)
                                     : trial;
        for (const Segment& seg : window(reduced, pipe.window_seconds, pipe.label_threshold)) {
            SpectralFeatures f = extract_de_features(seg, pipe.bands, trial.sampling_rate_hz);
            for (std::size_t c = 0; c < seg.signals.rows; ++c) {
                csv << seg.trial_id << "," << seg.index << "," << c << ","
                    << seg.channel_modalities[c];
                for (int b = 0; b < kNumBands; ++b) {
                    std::snprintf(buf, sizeof(buf), "%.17g", f.de(c, b));
                    csv << "," << buf;
                }
                csv << "," << seg.label_valence << "," << seg.label_arousal << "\n";
            }
            ++n_segments;
        }
    }
    write_manifest(opts.out, "features", opts.config_path, 0, pipeline_to_json(pipe));
    std::cout << "wrote DE features for " << n_segments << " segments to " << opts.out
              << "/features.csv\n";
    return 0;
}

int cmd_graphs(const CommonOpts& opts, const PipelineConfig& pipe) {
    if (opts.dataset.empty() || opts.out.empty())
        throw CLI::ValidationError("--dataset and --out are required");
    auto samples = load_any_samples(opts.dataset, pipe, opts.threads);
    std::filesystem::create_directories(opts.out);
    save_samples(samples, std::filesystem::path(opts.out) / "samples.bin");
    write_manifest(opts.out, "graphs", opts.config_path, 0, pipeline_to_json(pipe));
    std::cout << "wrote " << samples.size() << " graph samples to " << opts.out
              << "/samples.bin\n";
    return 0;
}

int cmd_train(const CommonOpts& opts, const PipelineConfig& pipe, ModelConfig mc,
              TrainingConfig tc) {
    if (opts.dataset.empty() || opts.out.empty())
        throw CLI::ValidationError("--dataset and --out are required");
    tc.threads = opts.threads ? opts.threads : tc.threads;
    mc.task = tc.task;

    PipelineConfig p = pipe;
    p.drop_modalities.insert(p.drop_modalities.end(), mc.drop_modalities.begin(),
                             mc.drop_modalities.end());
    auto samples = load_any_samples(opts.dataset, p, tc.threads);
    CvSummary s = run_cross_validation(samples, mc, tc, opts.out);

    json resolved;
    resolved["pipeline"] = pipeline_to_json(pipe);
    resolved["model"] = mc.to_json();
    resolved["training"] = tc.to_json();
    write_manifest(opts.out, "train", opts.config_path, tc.seed, resolved);
    std::printf("mean accuracy %.4f +/- %.4f over %d folds\n", s.mean_accuracy, s.std_accuracy,
                static_cast<int>(s.folds.size()));
    return 0;
}

int cmd_evaluate(const CommonOpts& opts, const PipelineConfig& pipe,
                 const std::string& checkpoint) {
    if (opts.dataset.empty() || checkpoint.empty())
        throw CLI::ValidationError("--dataset and --checkpoint are required");
    json meta = read_checkpoint_metadata(checkpoint);
    ModelConfig mc = ModelConfig::from_json(meta.at("model_config"));
    DataDims dims = DataDims::from_json(meta.at("data_dims"));
    Model model(mc, dims, 0);
    load_checkpoint(model.store(), checkpoint);

    PipelineConfig p = pipe;
    p.drop_modalities.insert(p.drop_modalities.end(), mc.drop_modalities.begin(),
                             mc.drop_modalities.end());
    auto samples = load_any_samples(opts.dataset, p, opts.threads);
    std::vector<std::size_t> all(samples.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    auto [acc, confusion] = evaluate(model, samples, all);

    json out;
    out["accuracy"] = acc;
    out["n_samples"] = samples.size();
    out["task"] = mc.task;
    out["confusion"] = json{{confusion[0][0], confusion[0][1]},
                            {confusion[1][0], confusion[1][1]}};
    std::cout << out.dump(2) << "\n";
    if (!opts.out.empty()) {
        std::filesystem::create_directories(opts.out);
        std::ofstream f(std::filesystem::path(opts.out) / "evaluation.json");
        f << out.dump(2) << "\n";
        write_manifest(opts.out, "evaluate", opts.config_path, 0,
                       json{{"checkpoint", checkpoint}, {"dataset", opts.dataset}});
    }
    return 0;
}

int cmd_ablate(const CommonOpts& opts, const PipelineConfig& pipe, const ModelConfig& base_mc,
               TrainingConfig tc) {
    if (opts.dataset.empty() || opts.out.empty())
        throw CLI::ValidationError("--dataset and --out are required");
    tc.threads = opts.threads ? opts.threads : tc.threads;

    std::filesystem::create_directories(opts.out);
    std::ofstream table(std::filesystem::path(opts.out) / "ablation.csv");
    if (!table) throw ValidationError("cannot write ablation.csv under " + opts.out);
    table << "variant,mean_accuracy,std_accuracy\n";

    // Variants that share a drop list also share the constructed samples.
    std::map<std::vector<std::string>, std::vector<HeterogeneousGraphSample>> cache;
    json rows = json::array();
    for (const std::string& variant : kVariantNames) {
        ModelConfig mc = variant_config(base_mc, variant);
        mc.task = tc.task;
        PipelineConfig p = pipe;
        p.drop_modalities.insert(p.drop_modalities.end(), mc.drop_modalities.begin(),
                                 mc.drop_modalities.end());
        auto key = p.drop_modalities;
        std::sort(key.begin(), key.end());
        if (!cache.count(key)) cache[key] = load_any_samples(opts.dataset, p, tc.threads);

        CvSummary s = run_cross_validation(cache[key], mc, tc,
                                           std::filesystem::path(opts.out) / variant);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g", variant.c_str(), s.mean_accuracy,
                      s.std_accuracy);
        table << buf << "\n";
        rows.push_back(json{{"variant", variant},
                            {"mean_accuracy", s.mean_accuracy},
                            {"std_accuracy", s.std_accuracy}});
        std::printf("%-6s mean accuracy %.4f +/- %.4f\n", variant.c_str(), s.mean_accuracy,
                    s.std_accuracy);
    }

    json resolved;
    resolved["pipeline"] = pipeline_to_json(pipe);
    resolved["model"] = base_mc.to_json();
    resolved["training"] = tc.to_json();
    resolved["results"] = rows;
    write_manifest(opts.out, "ablate", opts.config_path, tc.seed, resolved);
    return 0;
}

int cmd_gradcheck(std::uint64_t seed) {
    bool ok = true;
    for (const VariantGradCheck& v : gradcheck_variants(seed)) {
        std::printf("%-6s max rel err %.3e at %s[%zu] over %zu coords: %s\n", v.variant.c_str(),
                    v.report.max_rel_err, v.report.worst_param.c_str(), v.report.worst_index,
                    v.report.coords_checked, v.report.passed ? "ok" : "FAIL");
        ok = ok && v.report.passed;
    }
    if (!ok) throw NumericError("gradient check failed");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heterogeneous graph-sequence emotion classifier"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    CommonOpts opts;
    SynthConfig synth_cfg;
    PipelineConfig pipe_cfg;
    ModelConfig model_cfg;
    TrainingConfig train_cfg;
    std::string checkpoint, readout, variant;
    std::uint64_t seed = 0;
    bool seed_set = false, readout_set = false;

    auto add_common = [&](CLI::App* c, bool dataset, bool out) {
        c->add_option("--config", opts.config_path, "JSON config file (flags override it)");
        if (dataset) c->add_option("--dataset", opts.dataset, "dataset dir or samples.bin");
        if (out) c->add_option("--out", opts.out, "output directory");
        c->add_option("--threads", opts.threads, "worker cap (0: HETGRNN_THREADS or hardware)");
        c->add_option("--seed", seed, "RNG seed")->each([&](const std::string&) {
            seed_set = true;
        });
    };

    CLI::App* c_synth = app.add_subcommand("synth", "generate a synthetic dataset");
    add_common(c_synth, false, true);
    c_synth->add_option("--trials", synth_cfg.n_trials, "number of trials");
    c_synth->add_option("--gamma-gain", synth_cfg.gamma_gain, "class-0 gamma amplitude gain");
    c_synth->add_option("--coupling", synth_cfg.coupling, "cross-channel coupling strength");
    c_synth->add_flag("--identical-coupling", synth_cfg.identical_coupling,
                      "use one coupling pattern for both classes (null dataset)");

    CLI::App* c_feat = app.add_subcommand("features", "extract DE features to CSV");
    add_common(c_feat, true, true);

    CLI::App* c_graphs = app.add_subcommand("graphs", "materialize graph samples");
    add_common(c_graphs, true, true);

    auto add_train_flags = [&](CLI::App* c) {
        c->add_option("--task", train_cfg.task, "valence or arousal");
        c->add_option("--folds", train_cfg.folds, "cross-validation folds");
        c->add_option("--epochs", train_cfg.epochs, "training epochs per fold");
        c->add_option("--batch-size", train_cfg.batch_size, "minibatch size");
        c->add_option("--lr", train_cfg.learning_rate, "learning rate");
        c->add_option("--split-by", train_cfg.split_by, "segment or trial");
        c->add_option("--readout", readout, "last, concat or mean (both streams)")
            ->each([&](const std::string&) { readout_set = true; });
    };

    CLI::App* c_train = app.add_subcommand("train", "k-fold cross-validated training");
    add_common(c_train, true, true);
    add_train_flags(c_train);

    CLI::App* c_eval = app.add_subcommand("evaluate", "score a checkpoint on a dataset");
    add_common(c_eval, true, true);
    c_eval->add_option("--checkpoint", checkpoint, "checkpoint directory")->required();

    CLI::App* c_ablate = app.add_subcommand("ablate", "run the full model and all variants");
    add_common(c_ablate, true, true);
    add_train_flags(c_ablate);
    c_ablate->add_option("--variant", variant, "run a single named variant instead");

    CLI::App* c_grad = app.add_subcommand("gradcheck", "finite-difference gradient suite");
    c_grad->add_option("--seed", seed, "RNG seed")->each([&](const std::string&) {
        seed_set = true;
    });

    try {
        app.parse(argc, argv);

        const json cfg = load_config_file(opts.config_path);
        if (!cfg.empty()) {
            if (cfg.contains("synth")) apply_json(synth_cfg, cfg.at("synth"));
            if (cfg.contains("pipeline")) apply_json(pipe_cfg, cfg.at("pipeline"));
            if (cfg.contains("model")) apply_json(model_cfg, cfg.at("model"));
            if (cfg.contains("training")) apply_json(train_cfg, cfg.at("training"));
            // Flags win: a second parse re-assigns only the options that were
            // actually given on the command line.
            app.clear();
            app.parse(argc, argv);
        }
        if (seed_set) {
            synth_cfg.seed = seed;
            train_cfg.seed = seed;
        }
        if (readout_set) {
            model_cfg.readout_st = readout_from_string(readout);
            model_cfg.readout_ss = readout_from_string(readout);
        }

        if (c_synth->parsed()) return cmd_synth(opts, synth_cfg);
        if (c_feat->parsed()) return cmd_features(opts, pipe_cfg);
        if (c_graphs->parsed()) return cmd_graphs(opts, pipe_cfg);
        if (c_train->parsed()) return cmd_train(opts, pipe_cfg, model_cfg, train_cfg);
        if (c_eval->parsed()) return cmd_evaluate(opts, pipe_cfg, checkpoint);
        if (c_ablate->parsed()) {
            if (!variant.empty()) {
                ModelConfig mc = variant_config(model_cfg, variant);
                return cmd_train(opts, pipe_cfg, mc, train_cfg);
            }
            return cmd_ablate(opts, pipe_cfg, model_cfg, train_cfg);
        }
        if (c_grad->parsed()) return cmd_gradcheck(seed_set ? seed : 0);
        throw CLI::ValidationError("no subcommand");
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
