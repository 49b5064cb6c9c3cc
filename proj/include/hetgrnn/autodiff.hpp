#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "hetgrnn/core.hpp"

namespace hetgrnn::ad {

/// Named learnable tensor with a gradient slot; the unit of checkpointing.
struct Parameter {
    std::string name;
    std::size_t rows = 0, cols = 0;
    std::vector<double> value;
    std::vector<double> grad;

    std::size_t size() const { return rows * cols; }
};

/// Ordered, name-addressable set of parameters. Registration order is the
/// serialization order, so it must be deterministic.
class ParameterStore {
public:
    Parameter& add(const std::string& name, std::size_t rows, std::size_t cols);
    Parameter* find(const std::string& name);
    const Parameter* find(const std::string& name) const;
    Parameter& at(const std::string& name);

    void zero_grad();
    std::size_t total_size() const;

    std::vector<Parameter*>& params() { return order_; }
    const std::vector<Parameter*>& params() const { return order_; }

private:
    std::deque<Parameter> storage_;
    std::vector<Parameter*> order_;
    std::unordered_map<std::string, Parameter*> by_name_;
};

class Tape;

/// Handle to a tape node. Values are matrices; vectors are 1xN.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    std::size_t rows() const;
    std::size_t cols() const;
    const std::vector<double>& value() const;
    Matrix to_matrix() const;
};

/// Reverse-mode tape over a fixed op set. Single-threaded; one backward
/// pass per recording.
class Tape {
public:
    Var constant(const Matrix& m);
    Var constant(std::size_t rows, std::size_t cols, const double* data);
    Var zeros(std::size_t rows, std::size_t cols);
    Var param(Parameter& p);

    Var matmul(Var a, Var b);
    /// Elementwise add; b may be a 1xC row vector broadcast over a's rows.
    Var add(Var a, Var b);
    Var mul(Var a, Var b);
    Var scalar_mul(Var a, double c);
    Var concat_cols(const std::vector<Var>& xs);
    Var slice(Var a, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1);
    Var transpose(Var a);
    Var reshape(Var a, std::size_t rows, std::size_t cols);
    Var sum_list(const std::vector<Var>& xs);

    Var sigmoid(Var a);
    Var tanh_(Var a);
    Var relu(Var a);
    Var softmax_rows(Var a);

    /// sum_i w[0][i] * xs[i]; xs entries share one shape, w is 1 x xs.size().
    Var weighted_sum(const std::vector<Var>& xs, Var w);
    /// Row-stochastic normalization D^{-1} M; all-zero rows stay zero.
    Var row_normalize(Var a);
    /// D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I.
    Var sym_normalize(Var a);
    /// -ln softmax(logits)[label] with log-sum-exp stabilization; logits 1xC.
    Var cross_entropy(Var logits, int label);

    void backward(Var loss);

    std::size_t size() const { return nodes_.size(); }
    const std::vector<double>& value_of(Var v) const { return nodes_[v.id].val; }
    const std::vector<double>& grad_of(Var v) const { return nodes_[v.id].grad; }
    std::size_t rows_of(Var v) const { return nodes_[v.id].rows; }
    std::size_t cols_of(Var v) const { return nodes_[v.id].cols; }

private:
    struct Node {
        std::size_t rows = 0, cols = 0;
        std::vector<double> val;
        std::vector<double> grad;
        bool requires_grad = false;
        Parameter* param = nullptr;
        std::function<void(Tape&)> backprop;  // empty for leaves/constants
    };

    std::deque<Node> nodes_;
    bool backward_done_ = false;

    Var emit(std::size_t rows, std::size_t cols, bool requires_grad);
    Node& node(Var v) { return nodes_[v.id]; }
    const Node& node(Var v) const { return nodes_[v.id]; }
    void check_finite(Var v, const char* op);
    friend struct Var;
};

/// Finite-difference gradient check. `forward` must recompute the scalar
/// loss from the store's current values; when `accumulate_grad` is true it
/// must also run backward into the store's grad slots.
struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    std::size_t coords_checked = 0;
    bool passed = false;
};

GradCheckReport grad_check(const std::function<double(bool accumulate_grad)>& forward,
                           ParameterStore& store, double h = 1e-5, double tol = 1e-5,
                           std::size_t max_coords = 200, std::uint64_t seed = 0);

/// Glorot-uniform init over [-lim, lim], lim = sqrt(6/(fan_in+fan_out)).
void glorot_init(Parameter& p, Rng& rng);

}  // namespace hetgrnn::ad
