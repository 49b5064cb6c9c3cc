#include "hetgrnn/train.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <iomanip>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include "hetgrnn/io.hpp"
#include "hetgrnn/pipeline.hpp"

namespace hetgrnn {

using nlohmann::json;

void TrainingConfig::validate() const {
    if (task != "valence" && task != "arousal")
        throw ValidationError("training config: task must be valence or arousal");
    if (folds < 2) throw ValidationError("training config: folds must be >= 2");
    if (epochs < 1 || batch_size < 1 || learning_rate < 0.0)
        throw ValidationError("training config: bad optimization settings");
    if (split_by != "segment" && split_by != "trial")
        throw ValidationError("training config: split_by must be segment or trial");
}

json TrainingConfig::to_json() const {
    return json{{"task", task},
                {"folds", folds},
                {"epochs", epochs},
                {"batch_size", batch_size},
                {"learning_rate", learning_rate},
                {"beta1", beta1},
                {"beta2", beta2},
                {"adam_eps", adam_eps},
                {"seed", seed},
                {"shuffle", shuffle},
                {"split_by", split_by}};
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2 || static_cast<std::size_t>(k) > n)
        throw ValidationError("kfold_split: need 2 <= k <= n");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, 17));
    rng.shuffle(perm);

    std::vector<std::vector<std::size_t>> folds(k);
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        const std::size_t sz = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        folds[f].assign(perm.begin() + pos, perm.begin() + pos + sz);
        pos += sz;
    }
    return folds;
}

std::vector<std::vector<std::size_t>> make_folds(
    const std::vector<HeterogeneousGraphSample>& samples, const TrainingConfig& config) {
    if (config.split_by == "segment")
        return kfold_split(samples.size(), config.folds, config.seed);

    // trial-level split: fold assignment by trial, then expand to segments
    std::vector<std::string> trials;
    for (const auto& s : samples)
        if (std::find(trials.begin(), trials.end(), s.trial_id) == trials.end())
            trials.push_back(s.trial_id);
    auto trial_folds = kfold_split(trials.size(), config.folds, config.seed);
    std::vector<std::vector<std::size_t>> folds(trial_folds.size());
    for (std::size_t f = 0; f < trial_folds.size(); ++f)
        for (std::size_t ti : trial_folds[f])
            for (std::size_t i = 0; i < samples.size(); ++i)
                if (samples[i].trial_id == trials[ti]) folds[f].push_back(i);
    return folds;
}

AdamOptimizer::AdamOptimizer(ad::ParameterStore& store, double lr, double beta1, double beta2,
                             double eps)
    : store_(store), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const ad::Parameter* p : store.params()) {
        m_.emplace_back(p->size(), 0.0);
        v_.emplace_back(p->size(), 0.0);
    }
}

void AdamOptimizer::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t pi = 0; pi < store_.params().size(); ++pi) {
        ad::Parameter* p = store_.params()[pi];
        double* m = m_[pi].data();
        double* v = v_[pi].data();
        for (std::size_t i = 0; i < p->size(); ++i) {
            const double g = p->grad[i];
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
            p->value[i] -= lr_ * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps_);
        }
    }
}

std::pair<double, std::array<std::array<std::size_t, 2>, 2>> evaluate(
    const Model& model, const std::vector<HeterogeneousGraphSample>& samples,
    const std::vector<std::size_t>& idx) {
    if (idx.empty()) throw ValidationError("evaluate: empty test set");
    std::array<std::array<std::size_t, 2>, 2> confusion{};
    std::size_t correct = 0;
    for (std::size_t i : idx) {
        const int pred = model.predict(samples[i]);
        const int actual = model.label_of(samples[i]);
        ++confusion[actual][pred];
        if (pred == actual) ++correct;
    }
    return {static_cast<double>(correct) / static_cast<double>(idx.size()), confusion};
}

FoldResult train_fold(Model& model, const std::vector<HeterogeneousGraphSample>& samples,
                      const std::vector<std::size_t>& train_idx,
                      const std::vector<std::size_t>& test_idx, const TrainingConfig& config,
                      int fold_index) {
    if (train_idx.empty()) throw ValidationError("train_fold: empty training set");
    const auto t0 = std::chrono::steady_clock::now();

    AdamOptimizer opt(model.store(), config.learning_rate, config.beta1, config.beta2,
                      config.adam_eps);
    Rng shuffle_rng(derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(fold_index)));

    FoldResult res;
    res.fold = fold_index;
    std::vector<std::size_t> order = train_idx;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle) shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t b0 = 0; b0 < order.size();
             b0 += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t b1 =
                std::min(order.size(), b0 + static_cast<std::size_t>(config.batch_size));
            model.store().zero_grad();
            double batch_loss = 0.0;
            for (std::size_t i = b0; i < b1; ++i) {
                ad::Tape tape;
                ad::Var l = model.loss(tape, samples[order[i]]);
                batch_loss += l.value()[0];
                tape.backward(l);
            }
            const double inv = 1.0 / static_cast<double>(b1 - b0);
            if (!std::isfinite(batch_loss)) {
                double pnorm = 0.0;
                for (const ad::Parameter* p : model.store().params())
                    for (double x : p->value) pnorm += x * x;
                throw NumericError("non-finite loss at fold " + std::to_string(fold_index) +
                                   " epoch " + std::to_string(epoch) + " batch " +
                                   std::to_string(b0 / config.batch_size) +
                                   " (parameter norm " + std::to_string(std::sqrt(pnorm)) + ")");
            }
            for (ad::Parameter* p : model.store().params())
                for (double& g : p->grad) g *= inv;
            opt.step();
            epoch_loss += batch_loss;
        }
        res.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    }

    if (!test_idx.empty()) {
        auto [acc, confusion] = evaluate(model, samples, test_idx);
        res.accuracy = acc;
        res.confusion = confusion;
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

CvSummary run_cross_validation(const std::vector<HeterogeneousGraphSample>& samples,
                               const ModelConfig& model_config, const TrainingConfig& config,
                               const std::filesystem::path& out_dir) {
    config.validate();
    if (samples.empty()) throw ValidationError("run_cross_validation: no samples");

    ModelConfig mc = model_config;
    mc.task = config.task;
    const DataDims dims = DataDims::of_sample(samples[0]);

    const auto folds = make_folds(samples, config);
    const int k = static_cast<int>(folds.size());

    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

    CvSummary summary;
    summary.folds.resize(k);
    std::vector<std::exception_ptr> errors(k);

    auto run_one = [&](int f) {
        try {
            std::vector<std::size_t> train_idx;
            for (int g = 0; g < k; ++g)
                if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
            std::sort(train_idx.begin(), train_idx.end());

            Model model(mc, dims, derive_seed(config.seed, static_cast<std::uint64_t>(f)));
            summary.folds[f] = train_fold(model, samples, train_idx, folds[f], config, f);

            if (!out_dir.empty()) {
                const auto fold_dir = out_dir / ("fold" + std::to_string(f));
                std::filesystem::create_directories(fold_dir);
                std::ofstream csv(fold_dir / "metrics.csv");
                csv << "epoch,train_loss\n";
                for (std::size_t e = 0; e < summary.folds[f].train_loss.size(); ++e)
                    csv << e << "," << std::setprecision(17) << summary.folds[f].train_loss[e]
                        << "\n";
                json meta;
                meta["model_config"] = mc.to_json();
                meta["data_dims"] = dims.to_json();
                meta["training_config"] = config.to_json();
                meta["fold"] = f;
                save_checkpoint(model.store(), meta, fold_dir / "checkpoint");
            }
        } catch (...) {
            errors[f] = std::current_exception();
        }
    };

    const int workers = std::min(k, std::max(1, resolve_threads(config.threads)));
    if (workers == 1) {
        for (int f = 0; f < k; ++f) run_one(f);
    } else {
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int f = next.fetch_add(1); f < k; f = next.fetch_add(1)) run_one(f);
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    double mean = 0.0;
    for (const auto& fr : summary.folds) mean += fr.accuracy;
    mean /= static_cast<double>(k);
    double var = 0.0;
    for (const auto& fr : summary.folds) var += (fr.accuracy - mean) * (fr.accuracy - mean);
    summary.mean_accuracy = mean;
    summary.std_accuracy = std::sqrt(var / static_cast<double>(k));

    if (!out_dir.empty()) {
        json js;
        js["version"] = kVersion;
        js["seed"] = config.seed;
        js["model_config"] = mc.to_json();
        js["training_config"] = config.to_json();
        js["mean_accuracy"] = summary.mean_accuracy;
        js["std_accuracy"] = summary.std_accuracy;
        js["fold_accuracies"] = json::array();
        for (const auto& fr : summary.folds) {
            js["fold_accuracies"].push_back(fr.accuracy);
        }
        js["confusions"] = json::array();
        for (const auto& fr : summary.folds)
            js["confusions"].push_back(json{{fr.confusion[0][0], fr.confusion[0][1]},
                                            {fr.confusion[1][0], fr.confusion[1][1]}});
        std::ofstream out(out_dir / "summary.json");
        out << js.dump(2) << "\n";
    }
    return summary;
}

}  // namespace hetgrnn
