#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetgrnn/model.hpp"

namespace hetgrnn {

struct TrainingConfig {
    std::string task = "valence";
    int folds = 10;
    int epochs = 50;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    bool shuffle = true;
    std::string split_by = "segment";  // or "trial"
    int threads = 0;                   // 0: HETGRNN_THREADS or hardware

    void validate() const;
    nlohmann::json to_json() const;
};

struct FoldResult {
    int fold = 0;
    std::vector<double> train_loss;            // per epoch, mean cross-entropy
    double accuracy = 0.0;
    std::array<std::array<std::size_t, 2>, 2> confusion{};  // [actual][predicted]
    double seconds = 0.0;
};

struct CvSummary {
    std::vector<FoldResult> folds;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
};

/// Seeded permutation split into k disjoint, exhaustive folds whose sizes
/// differ by at most one.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, int k, std::uint64_t seed);

/// First/second-moment adaptive gradient descent over a ParameterStore.
class AdamOptimizer {
public:
    AdamOptimizer(ad::ParameterStore& store, double lr, double beta1, double beta2, double eps);
    void step();

private:
    ad::ParameterStore& store_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

FoldResult train_fold(Model& model, const std::vector<HeterogeneousGraphSample>& samples,
                      const std::vector<std::size_t>& train_idx,
                      const std::vector<std::size_t>& test_idx, const TrainingConfig& config,
                      int fold_index);

std::pair<double, std::array<std::array<std::size_t, 2>, 2>> evaluate(
    const Model& model, const std::vector<HeterogeneousGraphSample>& samples,
    const std::vector<std::size_t>& idx);

/// Full k-fold cross-validation. When `out_dir` is nonempty, writes
/// runs layout: fold<k>/metrics.csv, fold<k>/checkpoint/, summary.json.
CvSummary run_cross_validation(const std::vector<HeterogeneousGraphSample>& samples,
                               const ModelConfig& model_config, const TrainingConfig& config,
                               const std::filesystem::path& out_dir = {});

/// Fold index sets, honoring split_by segment/trial.
std::vector<std::vector<std::size_t>> make_folds(
    const std::vector<HeterogeneousGraphSample>& samples, const TrainingConfig& config);

}  // namespace hetgrnn
