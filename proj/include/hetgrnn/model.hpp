#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetgrnn/autodiff.hpp"
#include "hetgrnn/graphs.hpp"
#include "hetgrnn/grnn.hpp"
#include "hetgrnn/gtn.hpp"

namespace hetgrnn {

struct ModelConfig {
    int gtn_layers = 2;
    int gtn_channels = 2;
    int gcn_out = 32;
    int gru_hidden = 64;
    Readout readout_st = Readout::Last;
    Readout readout_ss = Readout::Concat;
    int head_proj = 64;
    int head_hidden = 64;
    bool use_gtn = true;
    bool use_gcn = true;
    bool use_gru = true;
    bool use_st = true;
    bool use_ss = true;
    std::vector<std::string> drop_modalities;
    std::string task = "valence";

    void validate() const;
    nlohmann::json to_json() const;
    static ModelConfig from_json(const nlohmann::json& j);
};

/// Ablation variant names from the comparison study.
extern const std::vector<std::string> kVariantNames;  // full, noGTN, ..., noSS

/// Derive a variant config from a base config.
ModelConfig variant_config(const ModelConfig& base, const std::string& variant);

/// Post-filter sample dimensions the parameter shapes depend on.
struct DataDims {
    std::size_t nodes = 0;      // N
    std::size_t t_steps = 0;    // T
    std::size_t b_steps = 0;    // B
    std::vector<std::string> modalities;  // distinct, sorted

    nlohmann::json to_json() const;
    static DataDims from_json(const nlohmann::json& j);
    static DataDims of_sample(const HeterogeneousGraphSample& s);
};

struct StreamParams {
    std::optional<GtnParams> gtn;
    std::optional<GcnParams> gcn;
    std::optional<GruParams> gru;
};

class Model {
public:
    Model(const ModelConfig& config, const DataDims& dims, std::uint64_t seed);

    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;
    Model(Model&&) = default;
    Model& operator=(Model&&) = default;

    /// Class logits (1 x 2) for one sample; sample dims must match.
    ad::Var forward(ad::Tape& tape, const HeterogeneousGraphSample& sample) const;

    /// Cross-entropy loss on the configured task's label.
    ad::Var loss(ad::Tape& tape, const HeterogeneousGraphSample& sample) const;

    /// Argmax of the logits; ties break toward class 0.
    int predict(const HeterogeneousGraphSample& sample) const;

    int label_of(const HeterogeneousGraphSample& sample) const;

    ad::ParameterStore& store() { return store_; }
    const ad::ParameterStore& store() const { return store_; }
    const ModelConfig& config() const { return config_; }
    const DataDims& dims() const { return dims_; }

    /// Closed-form parameter count from the configured shapes.
    static std::size_t expected_parameter_count(const ModelConfig& config, const DataDims& dims);

private:
    ad::Var stream_forward(ad::Tape& tape, const HeterogeneousGraphSample& sample,
                           bool temporal) const;

    ModelConfig config_;
    DataDims dims_;
    ad::ParameterStore store_;
    StreamParams st_, ss_;
    ad::Parameter *W1_ = nullptr, *b1_ = nullptr;  // temporal projection
    ad::Parameter *W2_ = nullptr, *b2_ = nullptr;  // spectral projection
    ad::Parameter *W3_ = nullptr, *b3_ = nullptr;
    ad::Parameter *W4_ = nullptr, *b4_ = nullptr;
};

/// Finite-difference sweep over the full model and every ablation variant
/// on a tiny fixed configuration (8 nodes / 2 modalities, T=16, B=4,
/// 8-dim GCN and GRU, 2 channels, 2 GT-layers).
struct VariantGradCheck {
    std::string variant;
    ad::GradCheckReport report;
};

std::vector<VariantGradCheck> gradcheck_variants(std::uint64_t seed, double h = 1e-5,
                                                 double tol = 1e-5);

/// Drop nodes whose modality is listed; slices adjacency and both streams.
HeterogeneousGraphSample filter_sample(const HeterogeneousGraphSample& sample,
                                       const std::vector<std::string>& drop);

}  // namespace hetgrnn
