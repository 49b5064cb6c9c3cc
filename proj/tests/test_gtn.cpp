#include <doctest.h>

#include <cmath>

#include "hetgrnn/gtn.hpp"

using namespace hetgrnn;
using ad::Tape;
using ad::Var;

namespace {

Matrix mat(std::size_t n, std::initializer_list<double> v) {
    Matrix m(n, n);
    std::copy(v.begin(), v.end(), m.data.begin());
    return m;
}

}  // namespace

TEST_SUITE("gtn") {

TEST_CASE("soft adjacency of a single candidate is that candidate") {
    Tape t;
    Var logits = t.constant(Matrix(1, 1, 3.7));
    Var q = soft_adjacency(t, {t.constant(Matrix::identity(3))}, logits);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(q.value()[i * 3 + j] == (i == j ? 1.0 : 0.0));
}

TEST_CASE("equal logits average the candidates") {
    Tape t;
    Var a1 = t.constant(mat(2, {1, 0, 0, 1}));
    Var a2 = t.constant(mat(2, {0, 1, 1, 0}));
    Var q = soft_adjacency(t, {a1, a2}, t.constant(Matrix(1, 2, 0.0)));
    for (double v : q.value()) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("extreme logits select one candidate") {
    Tape t;
    Var a1 = t.constant(mat(2, {0.2, 0.8, 0.8, 0.2}));
    Var a2 = t.constant(mat(2, {0.9, 0.1, 0.1, 0.9}));
    Matrix l(1, 2);
    l(0, 0) = 10.0;
    l(0, 1) = -10.0;
    Var q = soft_adjacency(t, {a1, a2}, t.constant(l));
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(std::abs(q.value()[i] - a1.value()[i]) < 1e-8);
}

TEST_CASE("convex combination entrywise bounds") {
    Tape t;
    Rng rng(12);
    std::vector<Var> cands;
    for (int c = 0; c < 3; ++c) {
        Matrix m(3, 3);
        for (double& v : m.data) v = rng.uniform();
        cands.push_back(t.constant(m));
    }
    Matrix l(1, 3);
    for (double& v : l.data) v = rng.uniform(-2.0, 2.0);
    Var q = soft_adjacency(t, cands, t.constant(l));
    for (std::size_t i = 0; i < 9; ++i) {
        double lo = 1e300, hi = -1e300;
        for (const Var& c : cands) {
            lo = std::min(lo, c.value()[i]);
            hi = std::max(hi, c.value()[i]);
        }
        CHECK(q.value()[i] >= lo - 1e-12);
        CHECK(q.value()[i] <= hi + 1e-12);
    }
}

TEST_CASE("first GT-layer row-normalizes the composed product") {
    {
        Tape t;
        Var l = t.constant(Matrix(1, 1, 0.0));
        Var h = gt_layer_first(t, {t.constant(Matrix::identity(4))}, l, l);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                CHECK(h.value()[i * 4 + j] == (i == j ? 1.0 : 0.0));
    }
    {
        // Q1 = Q2 = 0.5*ones -> product [[0.5,0.5],[0.5,0.5]], degrees 1.
        Tape t;
        Var half = t.constant(mat(2, {0.5, 0.5, 0.5, 0.5}));
        Var h = gt_layer_first(t, {half}, t.constant(Matrix(1, 1, 0.0)),
                               t.constant(Matrix(1, 1, 0.0)));
        for (double v : h.value()) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
    }
    {
        // isolated node: zero row stays zero, no NaN
        Tape t;
        Var a = t.constant(mat(2, {0, 0, 1, 0}));
        Var h = gt_layer_first(t, {a}, t.constant(Matrix(1, 1, 0.0)),
                               t.constant(Matrix(1, 1, 0.0)));
        CHECK(h.value()[0] == 0.0);
        CHECK(h.value()[1] == 0.0);
        for (double v : h.value()) CHECK(std::isfinite(v));
    }
}

TEST_CASE("gtn_forward with identity-only candidates is the identity map") {
    ad::ParameterStore store;
    GtnParams p = make_gtn_params(store, "gtn.test", GtnConfig{3, 2}, 1);
    // scribble on the logits; with one candidate softmax is always 1
    Rng rng(8);
    for (ad::Parameter* pp : store.params())
        for (double& v : pp->value) v = rng.uniform(-5.0, 5.0);
    Tape t;
    auto outs = gtn_forward(t, {t.constant(Matrix::identity(5))}, p);
    REQUIRE(outs.size() == 2);
    for (const Var& o : outs)
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j)
                CHECK(o.value()[i * 5 + j] == (i == j ? 1.0 : 0.0));
}

TEST_CASE("pinned selections compose to a row-normalized meta-path") {
    // L=2, C^A=1, candidates {A, I}; layer 1 selects (A, I), layer 2 selects I.
    ad::ParameterStore store;
    GtnParams p = make_gtn_params(store, "gtn.test", GtnConfig{2, 1}, 2);
    auto pin = [&](ad::Parameter* logits, int candidate) {
        logits->value = {candidate == 0 ? 60.0 : -60.0, candidate == 0 ? -60.0 : 60.0};
    };
    pin(p.layer1_q1, 0);  // A
    pin(p.layer1_q2, 1);  // I
    pin(p.deeper[0], 1);  // I

    Matrix a = mat(3, {0, 2, 0, 2, 0, 1, 0, 1, 0});
    Tape t;
    auto outs = gtn_forward(t, {t.constant(a), t.constant(Matrix::identity(3))}, p);
    REQUIRE(outs.size() == 1);
    // expected: D^{-1} A with row degrees (2, 3, 1)
    const double expect[9] = {0, 1, 0, 2.0 / 3, 0, 1.0 / 3, 0, 1, 0};
    for (int i = 0; i < 9; ++i) CHECK(outs[0].value()[i] == doctest::Approx(expect[i]));
}

TEST_CASE("meta-path row sums stay within [0, 1]") {
    ad::ParameterStore store;
    GtnParams p = make_gtn_params(store, "gtn.test", GtnConfig{2, 2}, 3);
    Rng rng(19);
    for (ad::Parameter* pp : store.params())
        for (double& v : pp->value) v = rng.uniform(-1.5, 1.5);

    Tape t;
    std::vector<Var> cands;
    for (int c = 0; c < 2; ++c) {
        Matrix m(4, 4);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j)
                if (rng.uniform() < 0.6) m(i, j) = m(j, i) = rng.uniform();
        cands.push_back(t.constant(m));
    }
    cands.push_back(t.constant(Matrix::identity(4)));
    for (const Var& o : gtn_forward(t, cands, p)) {
        for (double v : o.value()) CHECK(v >= 0.0);
        for (std::size_t i = 0; i < 4; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < 4; ++j) s += o.value()[i * 4 + j];
            CHECK(s <= 1.0 + 1e-9);
            CHECK(s >= 0.0);
        }
    }
}

TEST_CASE("parameters register under the documented names") {
    ad::ParameterStore store;
    make_gtn_params(store, "gtn.st", GtnConfig{3, 2}, 4);
    CHECK(store.find("gtn.st.layer1.logits_q1") != nullptr);
    CHECK(store.find("gtn.st.layer1.logits_q2") != nullptr);
    CHECK(store.find("gtn.st.layer2.logits") != nullptr);
    CHECK(store.find("gtn.st.layer3.logits") != nullptr);
    CHECK(store.find("gtn.st.layer4.logits") == nullptr);
    // zero-initialized: uniform attention
    for (ad::Parameter* p : store.params()) {
        CHECK(p->rows == 2);
        CHECK(p->cols == 4);
        for (double v : p->value) CHECK(v == 0.0);
    }
}

}
