#include "hetgrnn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace hetgrnn::ad {

// ---------------------------------------------------------------- store

Parameter& ParameterStore::add(const std::string& name, std::size_t rows, std::size_t cols) {
    if (by_name_.count(name)) throw ValidationError("duplicate parameter name: " + name);
    storage_.push_back(Parameter{name, rows, cols, std::vector<double>(rows * cols, 0.0),
                                 std::vector<double>(rows * cols, 0.0)});
    Parameter* p = &storage_.back();
    order_.push_back(p);
    by_name_[name] = p;
    return *p;
}

Parameter* ParameterStore::find(const std::string& name) {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : it->second;
}

const Parameter* ParameterStore::find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : it->second;
}

Parameter& ParameterStore::at(const std::string& name) {
    Parameter* p = find(name);
    if (!p) throw ValidationError("unknown parameter: " + name);
    return *p;
}

void ParameterStore::zero_grad() {
    for (Parameter* p : order_) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

std::size_t ParameterStore::total_size() const {
    std::size_t n = 0;
    for (const Parameter* p : order_) n += p->size();
    return n;
}

// ----------------------------------------------------------------- var

std::size_t Var::rows() const { return tape->rows_of(*this); }
std::size_t Var::cols() const { return tape->cols_of(*this); }
const std::vector<double>& Var::value() const { return tape->value_of(*this); }

Matrix Var::to_matrix() const {
    Matrix m(rows(), cols());
    m.data = value();
    return m;
}

// ----------------------------------------------------------------- tape

Var Tape::emit(std::size_t rows, std::size_t cols, bool requires_grad) {
    nodes_.push_back(Node{});
    Node& n = nodes_.back();
    n.rows = rows;
    n.cols = cols;
    n.val.assign(rows * cols, 0.0);
    n.requires_grad = requires_grad;
    return Var{this, nodes_.size() - 1};
}

void Tape::check_finite(Var v, const char* op) {
    for (double x : node(v).val)
        if (!std::isfinite(x))
            throw NumericError(std::string("non-finite value produced by op '") + op + "'");
}

Var Tape::constant(const Matrix& m) { return constant(m.rows, m.cols, m.data.data()); }

Var Tape::constant(std::size_t rows, std::size_t cols, const double* data) {
    Var v = emit(rows, cols, false);
    std::memcpy(node(v).val.data(), data, rows * cols * sizeof(double));
    check_finite(v, "constant");
    return v;
}

Var Tape::zeros(std::size_t rows, std::size_t cols) { return emit(rows, cols, false); }

Var Tape::param(Parameter& p) {
    Var v = emit(p.rows, p.cols, true);
    node(v).val = p.value;
    node(v).param = &p;
    Node* n = &node(v);
    n->backprop = [n](Tape&) {
        for (std::size_t i = 0; i < n->grad.size(); ++i) n->param->grad[i] += n->grad[i];
    };
    check_finite(v, "param");
    return v;
}

namespace {
void ensure_grad(std::vector<double>& g, std::size_t n) {
    if (g.empty()) g.assign(n, 0.0);
}
}  // namespace

Var Tape::matmul(Var a, Var b) {
    Node& na = node(a);
    Node& nb = node(b);
    if (na.cols != nb.rows) throw ValidationError("matmul: inner dimension mismatch");
    const std::size_t M = na.rows, K = na.cols, N = nb.cols;
    Var out = emit(M, N, na.requires_grad || nb.requires_grad);
    Node& no = node(out);

    const double* A = na.val.data();
    const double* B = nb.val.data();
    double* C = no.val.data();
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t k = 0; k < K; ++k) {
            const double aik = A[i * K + k];
            if (aik == 0.0) continue;
            const double* Bk = B + k * N;
            double* Ci = C + i * N;
            for (std::size_t j = 0; j < N; ++j) Ci[j] += aik * Bk[j];
        }
    check_finite(out, "matmul");

    if (no.requires_grad) {
        Node *pa = &na, *pb = &nb, *po = &no;
        no.backprop = [pa, pb, po, M, K, N](Tape&) {
            const double* G = po->grad.data();
            if (pa->requires_grad) {
                ensure_grad(pa->grad, M * K);
                const double* B = pb->val.data();
                double* GA = pa->grad.data();
                for (std::size_t i = 0; i < M; ++i)
                    for (std::size_t k = 0; k < K; ++k) {
                        const double* Gi = G + i * N;
                        const double* Bk = B + k * N;
                        double s = 0.0;
                        for (std::size_t j = 0; j < N; ++j) s += Gi[j] * Bk[j];
                        GA[i * K + k] += s;
                    }
            }
            if (pb->requires_grad) {
                ensure_grad(pb->grad, K * N);
                const double* A = pa->val.data();
                double* GB = pb->grad.data();
                for (std::size_t i = 0; i < M; ++i)
                    for (std::size_t k = 0; k < K; ++k) {
                        const double aik = A[i * K + k];
                        if (aik == 0.0) continue;
                        const double* Gi = G + i * N;
                        double* GBk = GB + k * N;
                        for (std::size_t j = 0; j < N; ++j) GBk[j] += aik * Gi[j];
                    }
            }
        };
    }
    return out;
}

Var Tape::add(Var a, Var b) {
    Node& na = node(a);
    Node& nb = node(b);
    const bool broadcast = nb.rows == 1 && na.rows > 1 && nb.cols == na.cols;
    if (!broadcast && (na.rows != nb.rows || na.cols != nb.cols))
        throw ValidationError("add: shape mismatch");
    Var out = emit(na.rows, na.cols, na.requires_grad || nb.requires_grad);
    Node& no = node(out);
    for (std::size_t i = 0; i < na.rows; ++i)
        for (std::size_t j = 0; j < na.cols; ++j)
            no.val[i * na.cols + j] =
                na.val[i * na.cols + j] + nb.val[(broadcast ? 0 : i) * na.cols + j];
    check_finite(out, "add");

    if (no.requires_grad) {
        Node *pa = &na, *pb = &nb, *po = &no;
        no.backprop = [pa, pb, po, broadcast](Tape&) {
            const std::size_t n = po->grad.size();
            if (pa->requires_grad) {
                ensure_grad(pa->grad, n);
                for (std::size_t i = 0; i < n; ++i) pa->grad[i] += po->grad[i];
            }
            if (pb->requires_grad) {
                ensure_grad(pb->grad, pb->val.size());
                if (broadcast) {
                    for (std::size_t i = 0; i < po->rows; ++i)
                        for (std::size_t j = 0; j < po->cols; ++j)
                            pb->grad[j] += po->grad[i * po->cols + j];
                } else {
                    for (std::size_t i = 0; i < n; ++i) pb->grad[i] += po->grad[i];
                }
            }
        };
    }
    return out;
}

Var Tape::mul(Var a, Var b) {
    Node& na = node(a);
    Node& nb = node(b);
    if (na.rows != nb.rows || na.cols != nb.cols)
        throw ValidationError("mul: shape mismatch");
    Var out = emit(na.rows, na.cols, na.requires_grad || nb.requires_grad);
    Node& no = node(out);
    for (std::size_t i = 0; i < no.val.size(); ++i) no.val[i] = na.val[i] * nb.val[i];
    check_finite(out, "mul");

    if (no.requires_grad) {
        Node *pa = &na, *pb = &nb, *po = &no;
        no.backprop = [pa, pb, po](Tape&) {
            const std::size_t n = po->grad.size();
            if (pa->requires_grad) {
                ensure_grad(pa->grad, n);
                for (std::size_t i = 0; i < n; ++i) pa->grad[i] += po->grad[i] * pb->val[i];
            }
            if (pb->requires_grad) {
                ensure_grad(pb->grad, n);
                for (std::size_t i = 0; i < n; ++i) pb->grad[i] += po->grad[i] * pa->val[i];
            }
        };
    }
    return out;
}

Var Tape::scalar_mul(Var a, double c) {
    Node& na = node(a);
    Var out = emit(na.rows, na.cols, na.requires_grad);
    Node& no = node(out);
    for (std::size_t i = 0; i < no.val.size(); ++i) no.val[i] = c * na.val[i];
    check_finite(out, "scalar_mul");
    if (no.requires_grad) {
        Node *pa = &na, *po = &no;
        no.backprop = [pa, po, c](Tape&) {
            ensure_grad(pa->grad, po->grad.size());
            for (std::size_t i = 0; i < po->grad.size(); ++i) pa->grad[i] += c * po->grad[i];
        };
    }
    return out;
}

Var Tape::concat_cols(const std::vector<Var>& xs) {
    if (xs.empty()) throw ValidationError("concat_cols: empty list");
    const std::size_t rows = node(xs[0]).rows;
    std::size_t cols = 0;
    bool rg = false;
    for (Var x : xs) {
        if (node(x).rows != rows) throw ValidationError("concat_cols: row mismatch");
        cols += node(x).cols;
        rg |= node(x).requires_grad;
    }
    Var out = emit(rows, cols, rg);
    Node& no = node(out);
    std::size_t off = 0;
    for (Var x : xs) {
        const Node& nx = node(x);
        for (std::size_t i = 0; i < rows; ++i)
            std::memcpy(no.val.data() + i * cols + off, nx.val.data() + i * nx.cols,
                        nx.cols * sizeof(double));
        off += nx.cols;
    }
    if (rg) {
        std::vector<Node*> parts;
        for (Var x : xs) parts.push_back(&node(x));
        Node* po = &no;
        no.backprop = [parts, po, rows, cols](Tape&) {
            std::size_t off = 0;
            for (Node* p : parts) {
                if (p->requires_grad) {
                    ensure_grad(p->grad, p->val.size());
                    for (std::size_t i = 0; i < rows; ++i)
                        for (std::size_t j = 0; j < p->cols; ++j)
                            p->grad[i * p->cols + j] += po->grad[i * cols + off + j];
                }
                off += p->cols;
            }
        };
    }
    return out;
}

Var Tape::slice(Var a, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
    Node& na = node(a);
    if (!(r0 < r1 && r1 <= na.rows && c0 < c1 && c1 <= na.cols))
        throw ValidationError("slice: range out of bounds");
    Var out = emit(r1 - r0, c1 - c0, na.requires_grad);
    Node& no = node(out);
    for (std::size_t i = r0; i < r1; ++i)
        for (std::size_t j = c0; j < c1; ++j)
            no.val[(i - r0) * no.cols + (j - c0)] = na.val[i * na.cols + j];
    if (na.requires_grad) {
        Node *pa = &na, *po = &no;
        no.backprop = [pa, po, r0, c0](Tape&) {
            ensure_grad(pa->grad, pa->val.size());
            for (std::size_t i = 0; i < po->rows; ++i)
                for (std::size_t j = 0; j < po->cols; ++j)
                    pa->grad[(i + r0) * pa->cols + (j + c0)] += po->grad[i * po->cols + j];
        };
    }
    return out;
}

Var Tape::transpose(Var a) {
    Node& na = node(a);
    Var out = emit(na.cols, na.rows, na.requires_grad);
    Node& no = node(out);
    for (std::size_t i = 0; i < na.rows; ++i)
        for (std::size_t j = 0; j < na.cols; ++j)
            no.val[j * na.rows + i] = na.val[i * na.cols + j];
    if (na.requires_grad) {
        Node *pa = &na, *po = &no;
        no.backprop = [pa, po](Tape&) {
            ensure_grad(pa->grad, pa->val.size());
            for (std::size_t i = 0; i < pa->rows; ++i)
                for (std::size_t j = 0; j < pa->cols; ++j)
                    pa->grad[i * pa->cols + j] += po->grad[j * pa->rows + i];
        };
    }
    return out;
}

Var Tape::reshape(Var a, std::size_t rows, std::size_t cols) {
    Node& na = node(a);
    if (rows * cols != na.val.size()) throw ValidationError("reshape: size mismatch");
    Var out = emit(rows, cols, na.requires_grad);
    Node& no = node(out);
    no.val = na.val;
    if (na.requires_grad) {
        Node *pa = &na, *po = &no;
        no.backprop = [pa, po](Tape&) {
            ensure_grad(pa->grad, pa->val.size());
            for (std::size_t i = 0; i < po->grad.size(); ++i) pa->grad[i] += po->grad[i];
        };
    }
    return out;
}

Var Tape::sum_list(const std::vector<Var>& xs) {
    if (xs.empty()) throw ValidationError("sum_list: empty list");
    const std::size_t rows = node(xs[0]).rows, cols = node(xs[0]).cols;
    bool rg = false;
    for (Var x : xs) {
        if (node(x).rows != rows || node(x).cols != cols)
            throw ValidationError("sum_list: shape mismatch");
        rg |= node(x).requires_grad;
    }
    Var out = emit(rows, cols, rg);
    Node& no = node(out);
    for (Var x : xs)
        for (std::size_t i = 0; i < no.val.size(); ++i) no.val[i] += node(x).val[i];
    check_finite(out, "sum_list");
    if (rg) {
        std::vector<Node*> parts;
        for (Var x : xs) parts.push_back(&node(x));
        Node* po = &no;
        no.backprop = [parts, po](Tape&) {
            for (Node* p : parts) {
                if (!p->requires_grad) continue;
                ensure_grad(p->grad, p->val.size());
                for (std::size_t i = 0; i < po->grad.size(); ++i) p->grad[i] += po->grad[i];
            }
        };
    }
    return out;
}

Var Tape::sigmoid(Var a) {
    Node& na = node(a);
    Var out = emit(na.rows, na.cols, na.requires_grad);
    Node& no = node(out);
    for (std::size_t i = 0; i < no.val.size(); ++i)
        no.val[i] = 1.0 / (1.0 + std::exp(-na.val[i]));
    check_finite(out, "sigmoid");
    if (na.requires_grad) {
        Node *pa = &na, *po = &no;
        no.backprop = [pa, po](Tape&) {
            ensure_grad(pa->grad, pa->val.size());
            for (std::size_t i = 0; i < po->grad.size(); ++i) {
                const double y = po->val[i];
                pa->grad[i] += po->grad[i] * y * (1.0 - y);
            }
        };
    }
    return out;
}

Var Tape::tanh_(Var a) {
    Node& na = node(a);
    Var out = emit(na.rows, na.cols, na.requires_grad);
    Node& no = node(out);
    for (std::size_t i = 0; i < no.val.size(); ++i) no.val[i] = std::tanh(na.val[i]);
    check_finite(out, "tanh");
    if (na.requires_grad) {
        Node *pa = &na, *po = &no;
        no.backprop = [pa, po](Tape&) {
            ensure_grad(pa->grad, pa->val.size());
            for (std::size_t i = 0; i < po->grad.size(); ++i) {
                const double y = po->val[i];
                pa->grad[i] += po->grad[i] * (1.0 - y * y);
            }
        };
    }
    return out;
}

Var Tape::relu(Var a) {
    Node& na = node(a);
    Var out = emit(na.rows, na.cols, na.requires_grad);
    Node& no = node(out);
    for (std::size_t i = 0; i < no.val.size(); ++i)
        no.val[i] = na.val[i] > 0.0 ? na.val[i] : 0.0;
    if (na.requires_grad) {
        Node *pa = &na, *po = &no;
        // subgradient at 0 is taken as 0
        no.backprop = [pa, po](Tape&) {
            ensure_grad(pa->grad, pa->val.size());
            for (std::size_t i = 0; i < po->grad.size(); ++i)
                if (pa->val[i] > 0.0) pa->grad[i] += po->grad[i];
        };
    }
    return out;
}

Var Tape::softmax_rows(Var a) {
    Node& na = node(a);
    Var out = emit(na.rows, na.cols, na.requires_grad);
    Node& no = node(out);
    for (std::size_t i = 0; i < na.rows; ++i) {
        const double* x = na.val.data() + i * na.cols;
        double* y = no.val.data() + i * na.cols;
        double mx = x[0];
        for (std::size_t j = 1; j < na.cols; ++j) mx = std::max(mx, x[j]);
        double z = 0.0;
        for (std::size_t j = 0; j < na.cols; ++j) {
            y[j] = std::exp(x[j] - mx);
            z += y[j];
        }
        for (std::size_t j = 0; j < na.cols; ++j) y[j] /= z;
    }
    check_finite(out, "softmax");
    if (na.requires_grad) {
        Node *pa = &na, *po = &no;
        no.backprop = [pa, po](Tape&) {
            ensure_grad(pa->grad, pa->val.size());
            for (std::size_t i = 0; i < po->rows; ++i) {
                const double* y = po->val.data() + i * po->cols;
                const double* g = po->grad.data() + i * po->cols;
                double dot = 0.0;
                for (std::size_t j = 0; j < po->cols; ++j) dot += g[j] * y[j];
                double* ga = pa->grad.data() + i * po->cols;
                for (std::size_t j = 0; j < po->cols; ++j) ga[j] += y[j] * (g[j] - dot);
            }
        };
    }
    return out;
}

Var Tape::weighted_sum(const std::vector<Var>& xs, Var w) {
    if (xs.empty()) throw ValidationError("weighted_sum: empty candidate list");
    Node& nw = node(w);
    if (nw.rows != 1 || nw.cols != xs.size())
        throw ValidationError("weighted_sum: weight vector must be 1 x candidates");
    const std::size_t rows = node(xs[0]).rows, cols = node(xs[0]).cols;
    bool rg = nw.requires_grad;
    for (Var x : xs) {
        if (node(x).rows != rows || node(x).cols != cols)
            throw ValidationError("weighted_sum: candidate shape mismatch");
        rg |= node(x).requires_grad;
    }
    Var out = emit(rows, cols, rg);
    Node& no = node(out);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double wk = nw.val[k];
        const Node& nx = node(xs[k]);
        for (std::size_t i = 0; i < no.val.size(); ++i) no.val[i] += wk * nx.val[i];
    }
    check_finite(out, "weighted_sum");
    if (rg) {
        std::vector<Node*> parts;
        for (Var x : xs) parts.push_back(&node(x));
        Node *pw = &nw, *po = &no;
        no.backprop = [parts, pw, po](Tape&) {
            for (std::size_t k = 0; k < parts.size(); ++k) {
                Node* p = parts[k];
                if (p->requires_grad) {
                    ensure_grad(p->grad, p->val.size());
                    const double wk = pw->val[k];
                    for (std::size_t i = 0; i < po->grad.size(); ++i)
                        p->grad[i] += wk * po->grad[i];
                }
                if (pw->requires_grad) {
                    ensure_grad(pw->grad, pw->val.size());
                    double s = 0.0;
                    for (std::size_t i = 0; i < po->grad.size(); ++i)
                        s += po->grad[i] * p->val[i];
                    pw->grad[k] += s;
                }
            }
        };
    }
    return out;
}

Var Tape::row_normalize(Var a) {
    Node& na = node(a);
    Var out = emit(na.rows, na.cols, na.requires_grad);
    Node& no = node(out);
    std::vector<double> deg(na.rows, 0.0);
    for (std::size_t i = 0; i < na.rows; ++i) {
        double d = 0.0;
        for (std::size_t j = 0; j < na.cols; ++j) d += na.val[i * na.cols + j];
        deg[i] = d;
        if (d != 0.0)
            for (std::size_t j = 0; j < na.cols; ++j)
                no.val[i * na.cols + j] = na.val[i * na.cols + j] / d;
        // zero-degree rows stay all-zero
    }
    check_finite(out, "row_normalize");
    if (na.requires_grad) {
        Node *pa = &na, *po = &no;
        no.backprop = [pa, po, deg = std::move(deg)](Tape&) {
            ensure_grad(pa->grad, pa->val.size());
            for (std::size_t i = 0; i < po->rows; ++i) {
                if (deg[i] == 0.0) continue;
                const double* g = po->grad.data() + i * po->cols;
                const double* y = po->val.data() + i * po->cols;
                double dot = 0.0;
                for (std::size_t j = 0; j < po->cols; ++j) dot += g[j] * y[j];
                double* ga = pa->grad.data() + i * po->cols;
                const double inv = 1.0 / deg[i];
                for (std::size_t j = 0; j < po->cols; ++j) ga[j] += (g[j] - dot) * inv;
            }
        };
    }
    return out;
}

Var Tape::sym_normalize(Var a) {
    Node& na = node(a);
    if (na.rows != na.cols) throw ValidationError("sym_normalize: square matrix required");
    const std::size_t N = na.rows;
    Var out = emit(N, N, na.requires_grad);
    Node& no = node(out);

    // A_tilde = A + I; degrees are strictly positive because of the +I.
    std::vector<double> deg(N, 0.0), inv_sqrt(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        double d = 1.0;  // identity contribution
        for (std::size_t j = 0; j < N; ++j) d += na.val[i * N + j];
        deg[i] = d;
        inv_sqrt[i] = 1.0 / std::sqrt(d);
    }
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) {
            const double at = na.val[i * N + j] + (i == j ? 1.0 : 0.0);
            no.val[i * N + j] = at * inv_sqrt[i] * inv_sqrt[j];
        }
    check_finite(out, "sym_normalize");

    if (na.requires_grad) {
        Node *pa = &na, *po = &no;
        no.backprop = [pa, po, deg = std::move(deg), inv_sqrt = std::move(inv_sqrt), N](Tape&) {
            ensure_grad(pa->grad, pa->val.size());
            const double* G = po->grad.data();
            const double* Y = po->val.data();
            // row_dot[i] = sum_j G_ij Y_ij ; col_dot[j] = sum_i G_ij Y_ij
            std::vector<double> row_dot(N, 0.0), col_dot(N, 0.0);
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t j = 0; j < N; ++j) {
                    const double gy = G[i * N + j] * Y[i * N + j];
                    row_dot[i] += gy;
                    col_dot[j] += gy;
                }
            // d out_ij / d A_kl = delta_ik delta_jl / sqrt(d_i d_j)
            //   - out_ij/(2 d_i) * delta_ik  - out_ij/(2 d_j) * delta_jk
            // summed over l for the degree terms (degree depends on row k only).
            for (std::size_t k = 0; k < N; ++k)
                for (std::size_t l = 0; l < N; ++l)
                    pa->grad[k * N + l] += G[k * N + l] * inv_sqrt[k] * inv_sqrt[l] -
                                           0.5 * row_dot[k] / deg[k] - 0.5 * col_dot[k] / deg[k];
        };
    }
    return out;
}

Var Tape::cross_entropy(Var logits, int label) {
    Node& na = node(logits);
    if (na.rows != 1 || na.cols < 2)
        throw ValidationError("cross_entropy: logits must be 1 x C with C >= 2");
    if (label < 0 || static_cast<std::size_t>(label) >= na.cols)
        throw ValidationError("cross_entropy: label out of range");
    Var out = emit(1, 1, na.requires_grad);
    Node& no = node(out);

    double mx = na.val[0];
    for (std::size_t j = 1; j < na.cols; ++j) mx = std::max(mx, na.val[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < na.cols; ++j) z += std::exp(na.val[j] - mx);
    const double lse = mx + std::log(z);
    no.val[0] = lse - na.val[label];
    check_finite(out, "cross_entropy");

    if (na.requires_grad) {
        Node *pa = &na, *po = &no;
        no.backprop = [pa, po, label, lse](Tape&) {
            ensure_grad(pa->grad, pa->val.size());
            const double g = po->grad[0];
            for (std::size_t j = 0; j < pa->cols; ++j) {
                double p = std::exp(pa->val[j] - lse);
                pa->grad[j] += g * (p - (static_cast<int>(j) == label ? 1.0 : 0.0));
            }
        };
    }
    return out;
}

void Tape::backward(Var loss) {
    if (backward_done_)
        throw ValidationError("backward called twice on one tape without reset");
    Node& nl = node(loss);
    if (nl.rows != 1 || nl.cols != 1) throw ValidationError("backward: loss must be scalar");
    backward_done_ = true;
    if (!nl.requires_grad) return;  // nothing reachable requires grad
    nl.grad.assign(1, 1.0);
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        Node& n = nodes_[i];
        if (n.requires_grad && !n.grad.empty() && n.backprop) n.backprop(*this);
    }
}

// ----------------------------------------------------------- grad check

GradCheckReport grad_check(const std::function<double(bool)>& forward, ParameterStore& store,
                           double h, double tol, std::size_t max_coords, std::uint64_t seed) {
    store.zero_grad();
    const double l1 = forward(true);
    const double l2 = forward(false);
    if (l1 != l2)
        throw NumericError("grad_check: non-deterministic forward (two evaluations disagree)");

    // Snapshot analytic grads.
    std::vector<std::vector<double>> g_ad;
    for (Parameter* p : store.params()) g_ad.push_back(p->grad);

    // Coordinate list: everything, or a seeded subsample.
    std::vector<std::pair<std::size_t, std::size_t>> coords;  // (param idx, coord)
    for (std::size_t pi = 0; pi < store.params().size(); ++pi)
        for (std::size_t ci = 0; ci < store.params()[pi]->size(); ++ci)
            coords.emplace_back(pi, ci);
    if (coords.size() > max_coords) {
        Rng rng(derive_seed(seed, 71));
        rng.shuffle(coords);
        coords.resize(max_coords);
    }

    GradCheckReport rep;
    rep.coords_checked = coords.size();
    for (auto [pi, ci] : coords) {
        Parameter* p = store.params()[pi];
        const double orig = p->value[ci];
        p->value[ci] = orig + h;
        const double lp = forward(false);
        p->value[ci] = orig - h;
        const double lm = forward(false);
        p->value[ci] = orig;
        const double g_fd = (lp - lm) / (2.0 * h);
        const double g = g_ad[pi][ci];
        // Denominator floor 1e-5: central-difference roundoff on an O(1)
        // loss is ~1e-11 absolute, so near-zero gradients would otherwise
        // drown in finite-difference noise rather than adjoint errors. For
        // tiny gradients this acts as an absolute error bound of tol*1e-5.
        const double rel = std::abs(g - g_fd) / std::max(1e-5, std::abs(g) + std::abs(g_fd));
        if (rel > rep.max_rel_err) {
            rep.max_rel_err = rel;
            rep.worst_param = p->name;
            rep.worst_index = ci;
        }
    }
    rep.passed = rep.max_rel_err < tol;
    return rep;
}

void glorot_init(Parameter& p, Rng& rng) {
    const double lim = std::sqrt(6.0 / static_cast<double>(p.rows + p.cols));
    for (double& v : p.value) v = rng.uniform(-lim, lim);
}

}  // namespace hetgrnn::ad
