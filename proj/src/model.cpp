#include "hetgrnn/model.hpp"

#include <algorithm>

#include "hetgrnn/pipeline.hpp"

namespace hetgrnn {

using ad::Tape;
using ad::Var;
using nlohmann::json;

const std::vector<std::string> kVariantNames = {"full",  "noGTN", "noGCN", "noGRU",
                                                "noEEG", "noPPS", "noST",  "noSS"};

void ModelConfig::validate() const {
    if (!use_st && !use_ss) throw ValidationError("model config: both streams disabled");
    if (gtn_layers < 1 || gtn_channels < 1 || gcn_out < 1 || gru_hidden < 1 ||
        head_proj < 1 || head_hidden < 1)
        throw ValidationError("model config: dimensions must be positive");
    if (task != "valence" && task != "arousal")
        throw ValidationError("model config: task must be valence or arousal");
}

json ModelConfig::to_json() const {
    return json{{"gtn_layers", gtn_layers},
                {"gtn_channels", gtn_channels},
                {"gcn_out", gcn_out},
                {"gru_hidden", gru_hidden},
                {"readout_st", to_string(readout_st)},
                {"readout_ss", to_string(readout_ss)},
                {"head_proj", head_proj},
                {"head_hidden", head_hidden},
                {"use_gtn", use_gtn},
                {"use_gcn", use_gcn},
                {"use_gru", use_gru},
                {"use_st", use_st},
                {"use_ss", use_ss},
                {"drop_modalities", drop_modalities},
                {"task", task}};
}

ModelConfig ModelConfig::from_json(const json& j) {
    ModelConfig c;
    c.gtn_layers = j.at("gtn_layers").get<int>();
    c.gtn_channels = j.at("gtn_channels").get<int>();
    c.gcn_out = j.at("gcn_out").get<int>();
    c.gru_hidden = j.at("gru_hidden").get<int>();
    c.readout_st = readout_from_string(j.at("readout_st").get<std::string>());
    c.readout_ss = readout_from_string(j.at("readout_ss").get<std::string>());
    c.head_proj = j.at("head_proj").get<int>();
    c.head_hidden = j.at("head_hidden").get<int>();
    c.use_gtn = j.at("use_gtn").get<bool>();
    c.use_gcn = j.at("use_gcn").get<bool>();
    c.use_gru = j.at("use_gru").get<bool>();
    c.use_st = j.at("use_st").get<bool>();
    c.use_ss = j.at("use_ss").get<bool>();
    c.drop_modalities = j.at("drop_modalities").get<std::vector<std::string>>();
    c.task = j.at("task").get<std::string>();
    c.validate();
    return c;
}

ModelConfig variant_config(const ModelConfig& base, const std::string& variant) {
    ModelConfig c = base;
    if (variant == "full") return c;
    if (variant == "noGTN") {
        c.use_gtn = false;
    } else if (variant == "noGCN") {
        c.use_gcn = false;
    } else if (variant == "noGRU") {
        c.use_gru = false;
    } else if (variant == "noEEG") {
        c.drop_modalities.push_back("EEG");
        c.use_gtn = false;  // single modality left
    } else if (variant == "noPPS") {
        c.drop_modalities.push_back("!EEG");  // marker: drop everything but EEG
        c.use_gtn = false;
    } else if (variant == "noST") {
        c.use_st = false;
    } else if (variant == "noSS") {
        c.use_ss = false;
    } else {
        throw ValidationError("unknown ablation variant: " + variant);
    }
    return c;
}

json DataDims::to_json() const {
    return json{{"nodes", nodes}, {"t_steps", t_steps}, {"b_steps", b_steps},
                {"modalities", modalities}};
}

DataDims DataDims::from_json(const json& j) {
    DataDims d;
    d.nodes = j.at("nodes").get<std::size_t>();
    d.t_steps = j.at("t_steps").get<std::size_t>();
    d.b_steps = j.at("b_steps").get<std::size_t>();
    d.modalities = j.at("modalities").get<std::vector<std::string>>();
    return d;
}

DataDims DataDims::of_sample(const HeterogeneousGraphSample& s) {
    DataDims d;
    d.nodes = s.nodes();
    d.t_steps = s.st_sequence.cols;
    d.b_steps = s.ss_sequence.cols;
    d.modalities = distinct_modalities(s.node_modalities);
    return d;
}

namespace {

std::size_t num_candidates(const DataDims& dims) {
    const std::size_t m = dims.modalities.size();
    return m * (m + 1) / 2 + 1;  // edge types + identity
}

std::size_t step_input_dim(const ModelConfig& c, const DataDims& dims) {
    return c.use_gcn ? dims.nodes * static_cast<std::size_t>(c.gcn_out) : dims.nodes;
}

std::size_t stream_feature_dim(const ModelConfig& c, const DataDims& dims, bool temporal) {
    const std::size_t steps = temporal ? dims.t_steps : dims.b_steps;
    const std::size_t d = step_input_dim(c, dims);
    if (!c.use_gru) return d;  // mean over positions
    const std::size_t h = static_cast<std::size_t>(c.gru_hidden);
    const Readout mode = temporal ? c.readout_st : c.readout_ss;
    return mode == Readout::Concat ? steps * h : h;
}

void init_zero(ad::Parameter&) {}

}  // namespace

Model::Model(const ModelConfig& config, const DataDims& dims, std::uint64_t seed)
    : config_(config), dims_(dims) {
    config_.validate();
    if (dims_.nodes < 2) throw ValidationError("model: need at least 2 nodes");

    Rng rng(seed);
    const std::size_t n_cand = num_candidates(dims_);
    const std::size_t channels = config_.use_gtn ? config_.gtn_channels : 1;
    const std::size_t f_out = config_.gcn_out;
    const std::size_t hidden = config_.gru_hidden;

    auto glorot = [&](ad::Parameter& p) { ad::glorot_init(p, rng); };

    auto build_stream = [&](StreamParams& sp, const std::string& name) {
        if (config_.use_gtn) {
            GtnConfig gc{config_.gtn_layers, config_.gtn_channels};
            sp.gtn = make_gtn_params(store_, "gtn." + name, gc, n_cand);
            // logits stay zero: uniform attention over edge types
        }
        if (config_.use_gcn) {
            sp.gcn = make_gcn_params(store_, "gcn." + name, 1, f_out, channels);
            glorot(*sp.gcn->W);
            init_zero(*sp.gcn->b);
            std::fill(sp.gcn->channel_w->value.begin(), sp.gcn->channel_w->value.end(),
                      1.0 / static_cast<double>(channels));
        }
        if (config_.use_gru) {
            sp.gru = make_gru_params(store_, "gru." + name, step_input_dim(config_, dims_),
                                     hidden);
            glorot(*sp.gru->W_r);
            glorot(*sp.gru->V_r);
            glorot(*sp.gru->W_h);
            glorot(*sp.gru->V_h);
            glorot(*sp.gru->W_z);
            glorot(*sp.gru->V_z);
        }
    };

    if (config_.use_st) build_stream(st_, "st");
    if (config_.use_ss) build_stream(ss_, "ss");

    const std::size_t proj = config_.head_proj;
    std::size_t head_in = 0;
    if (config_.use_st) {
        W1_ = &store_.add("head.W1", stream_feature_dim(config_, dims_, true), proj);
        b1_ = &store_.add("head.b1", 1, proj);
        glorot(*W1_);
        head_in += proj;
    }
    if (config_.use_ss) {
        W2_ = &store_.add("head.W2", stream_feature_dim(config_, dims_, false), proj);
        b2_ = &store_.add("head.b2", 1, proj);
        glorot(*W2_);
        head_in += proj;
    }
    W3_ = &store_.add("head.W3", head_in, config_.head_hidden);
    b3_ = &store_.add("head.b3", 1, config_.head_hidden);
    glorot(*W3_);
    W4_ = &store_.add("head.W4", config_.head_hidden, 2);
    b4_ = &store_.add("head.b4", 1, 2);
    glorot(*W4_);
}

Var Model::stream_forward(Tape& tape, const HeterogeneousGraphSample& sample,
                          bool temporal) const {
    const StreamParams& sp = temporal ? st_ : ss_;
    if ((temporal && !config_.use_st) || (!temporal && !config_.use_ss))
        throw ValidationError("stream_forward: disabled stream invoked");

    const Matrix& seq_m = temporal ? sample.st_sequence : sample.ss_sequence;
    const std::size_t N = sample.nodes();
    const std::size_t steps = seq_m.cols;

    std::vector<Var> seq;
    seq.reserve(steps);
    std::vector<double> col(N);
    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t i = 0; i < N; ++i) col[i] = seq_m(i, t);
        seq.push_back(tape.constant(N, 1, col.data()));
    }

    std::vector<Var> ins;
    if (config_.use_gcn) {
        std::vector<Var> metas;
        if (config_.use_gtn) {
            auto parts = partition_edge_types(sample.adjacency, sample.node_modalities);
            metas = gtn_forward(tape, lift_candidates(tape, parts), *sp.gtn);
        } else {
            metas = {tape.constant(sample.adjacency)};
        }
        std::vector<Var> hs = gcn_sequence(tape, seq, metas, *sp.gcn);
        ins.reserve(steps);
        for (Var h : hs) ins.push_back(tape.reshape(h, 1, N * config_.gcn_out));
    } else {
        ins.reserve(steps);
        for (Var x : seq) ins.push_back(tape.reshape(x, 1, N));
    }

    if (config_.use_gru) {
        GruCell cell = GruCell::lift(tape, *sp.gru);
        Var h = tape.zeros(1, config_.gru_hidden);
        std::vector<Var> outs;
        outs.reserve(steps);
        for (Var in : ins) {
            h = cell.step(tape, in, h);
            outs.push_back(h);
        }
        return gru_readout(tape, outs, temporal ? config_.readout_st : config_.readout_ss);
    }
    // noGRU: order-insensitive mean over sequence positions
    return tape.scalar_mul(tape.sum_list(ins), 1.0 / static_cast<double>(ins.size()));
}

Var Model::forward(Tape& tape, const HeterogeneousGraphSample& sample) const {
    if (sample.nodes() != dims_.nodes)
        throw ValidationError("forward: sample node count does not match model dims");

    std::vector<Var> projected;
    if (config_.use_st) {
        Var h = stream_forward(tape, sample, true);
        projected.push_back(tape.add(tape.matmul(h, tape.param(*W1_)), tape.param(*b1_)));
    }
    if (config_.use_ss) {
        Var h = stream_forward(tape, sample, false);
        projected.push_back(tape.add(tape.matmul(h, tape.param(*W2_)), tape.param(*b2_)));
    }
    Var h3 = projected.size() == 1 ? projected[0] : tape.concat_cols(projected);
    Var hidden = tape.relu(tape.add(tape.matmul(h3, tape.param(*W3_)), tape.param(*b3_)));
    return tape.add(tape.matmul(hidden, tape.param(*W4_)), tape.param(*b4_));
}

int Model::label_of(const HeterogeneousGraphSample& sample) const {
    return config_.task == "valence" ? sample.label_valence : sample.label_arousal;
}

Var Model::loss(Tape& tape, const HeterogeneousGraphSample& sample) const {
    return tape.cross_entropy(forward(tape, sample), label_of(sample));
}

int Model::predict(const HeterogeneousGraphSample& sample) const {
    Tape tape;
    Var logits = forward(tape, sample);
    const auto& v = logits.value();
    return v[1] > v[0] ? 1 : 0;  // tie breaks toward class 0
}

std::size_t Model::expected_parameter_count(const ModelConfig& config, const DataDims& dims) {
    const std::size_t n_cand = num_candidates(dims);
    const std::size_t channels = config.use_gtn ? config.gtn_channels : 1;
    const std::size_t f_out = config.gcn_out;
    const std::size_t hidden = config.gru_hidden;
    const std::size_t in_dim = step_input_dim(config, dims);

    std::size_t per_stream = 0;
    if (config.use_gtn)
        per_stream += static_cast<std::size_t>(config.gtn_layers + 1) *
                      static_cast<std::size_t>(config.gtn_channels) * n_cand;
    if (config.use_gcn) per_stream += 1 * f_out + f_out + channels;
    if (config.use_gru) per_stream += 3 * (in_dim * hidden + hidden * hidden + hidden);

    std::size_t total = 0;
    std::size_t head_in = 0;
    const std::size_t proj = config.head_proj;
    if (config.use_st) {
        total += per_stream + stream_feature_dim(config, dims, true) * proj + proj;
        head_in += proj;
    }
    if (config.use_ss) {
        total += per_stream + stream_feature_dim(config, dims, false) * proj + proj;
        head_in += proj;
    }
    total += head_in * config.head_hidden + config.head_hidden;
    total += static_cast<std::size_t>(config.head_hidden) * 2 + 2;
    return total;
}

HeterogeneousGraphSample filter_sample(const HeterogeneousGraphSample& sample,
                                       const std::vector<std::string>& drop) {
    if (drop.empty()) return sample;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < sample.nodes(); ++i)
        if (std::find(drop.begin(), drop.end(), sample.node_modalities[i]) == drop.end())
            keep.push_back(i);
    if (keep.size() < 2)
        throw ValidationError("filter_sample: fewer than 2 nodes remain");

    HeterogeneousGraphSample out;
    out.label_valence = sample.label_valence;
    out.label_arousal = sample.label_arousal;
    out.trial_id = sample.trial_id;
    out.segment_index = sample.segment_index;
    const std::size_t n = keep.size();
    out.adjacency = Matrix(n, n);
    out.st_sequence = Matrix(n, sample.st_sequence.cols);
    out.ss_sequence = Matrix(n, sample.ss_sequence.cols);
    for (std::size_t i = 0; i < n; ++i) {
        out.node_modalities.push_back(sample.node_modalities[keep[i]]);
        for (std::size_t j = 0; j < n; ++j)
            out.adjacency(i, j) = sample.adjacency(keep[i], keep[j]);
        for (std::size_t t = 0; t < sample.st_sequence.cols; ++t)
            out.st_sequence(i, t) = sample.st_sequence(keep[i], t);
        for (std::size_t b = 0; b < sample.ss_sequence.cols; ++b)
            out.ss_sequence(i, b) = sample.ss_sequence(keep[i], b);
    }
    return out;
}

std::vector<VariantGradCheck> gradcheck_variants(std::uint64_t seed, double h, double tol) {
    constexpr std::size_t N = 8, T = 16, B = 4;
    Rng rng(derive_seed(seed, 99));

    HeterogeneousGraphSample sample;
    for (std::size_t i = 0; i < N; ++i)
        sample.node_modalities.push_back(i < N / 2 ? "EEG" : "EMG");
    sample.adjacency = Matrix(N, N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i + 1; j < N; ++j)
            sample.adjacency(i, j) = sample.adjacency(j, i) = rng.uniform();
    sample.st_sequence = Matrix(N, T);
    for (double& v : sample.st_sequence.data) v = rng.normal();
    sample.ss_sequence = Matrix(N, B);
    for (double& v : sample.ss_sequence.data) v = rng.normal();
    sample.label_valence = sample.label_arousal = 1;

    ModelConfig base;
    base.gtn_layers = 2;
    base.gtn_channels = 2;
    base.gcn_out = 8;
    base.gru_hidden = 8;
    base.head_proj = 8;
    base.head_hidden = 8;

    std::vector<VariantGradCheck> out;
    for (const std::string& variant : kVariantNames) {
        ModelConfig mc = variant_config(base, variant);
        const auto drop =
            resolve_drop_list(mc.drop_modalities, distinct_modalities(sample.node_modalities));
        const HeterogeneousGraphSample s = filter_sample(sample, drop);
        Model model(mc, DataDims::of_sample(s), derive_seed(seed, 7));
        auto forward = [&](bool accumulate_grad) {
            ad::Tape tape;
            ad::Var l = model.loss(tape, s);
            if (accumulate_grad) tape.backward(l);
            return l.value()[0];
        };
        out.push_back({variant, ad::grad_check(forward, model.store(), h, tol, 200,
                                               derive_seed(seed, 11))});
    }
    return out;
}

}  // namespace hetgrnn
