#include <doctest.h>

#include <cmath>

#include "hetgrnn/grnn.hpp"

using namespace hetgrnn;
using ad::Tape;
using ad::Var;

namespace {

Matrix mat(std::size_t r, std::size_t c, std::initializer_list<double> v) {
    Matrix m(r, c);
    std::copy(v.begin(), v.end(), m.data.begin());
    return m;
}

// Largest |eigenvalue| of a symmetric matrix via power iteration.
double spectral_radius(const Matrix& a) {
    std::vector<double> v(a.rows, 1.0), w(a.rows);
    double lambda = 0.0;
    for (int it = 0; it < 2000; ++it) {
        for (std::size_t i = 0; i < a.rows; ++i) {
            w[i] = 0.0;
            for (std::size_t j = 0; j < a.cols; ++j) w[i] += a(i, j) * v[j];
        }
        double norm = 0.0;
        for (double x : w) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        for (std::size_t i = 0; i < a.rows; ++i) v[i] = w[i] / norm;
        lambda = norm;
    }
    return lambda;
}

}  // namespace

TEST_SUITE("grnn") {

TEST_CASE("normalized adjacency closed forms") {
    {
        Matrix out = normalize_adjacency(Matrix(3, 3));
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) CHECK(out(i, j) == (i == j ? 1.0 : 0.0));
    }
    {
        Matrix out = normalize_adjacency(Matrix::identity(3));
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                CHECK(out(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
    }
    {
        Matrix out = normalize_adjacency(mat(2, 2, {0, 1, 1, 0}));
        for (double v : out.data) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
    }
}

TEST_CASE("normalized adjacency is symmetric with spectrum in [-1, 1]") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(100 + seed);
        Matrix a(6, 6);
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = i + 1; j < 6; ++j)
                if (rng.uniform() < 0.7) a(i, j) = a(j, i) = rng.uniform();
        Matrix n = normalize_adjacency(a);
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 6; ++j) CHECK(n(i, j) == doctest::Approx(n(j, i)));
        CHECK(spectral_radius(n) <= 1.0 + 1e-9);
    }
}

TEST_CASE("gcn_step applies bias after the activation") {
    ad::ParameterStore store;
    {
        // identity path: A_hat = I, W = I, b = 0, x >= 0
        Tape t;
        Var x = t.constant(mat(2, 2, {1, 0, 2, 3}));
        Var out = gcn_step(t, x, t.constant(Matrix::identity(2)),
                           t.constant(Matrix::identity(2)), t.constant(Matrix(1, 2)));
        CHECK(out.value() == x.value());
    }
    {
        // hand oracle: x = [1,0]^T, A_hat all 0.5, W = [1]
        Tape t;
        Var out = gcn_step(t, t.constant(mat(2, 1, {1, 0})),
                           t.constant(mat(2, 2, {0.5, 0.5, 0.5, 0.5})),
                           t.constant(Matrix(1, 1, 1.0)), t.constant(Matrix(1, 1)));
        CHECK(out.value()[0] == doctest::Approx(0.5));
        CHECK(out.value()[1] == doctest::Approx(0.5));
    }
    {
        // pre-bias output is 0, b = -1 -> output -1 (bias outside ReLU)
        Tape t;
        Var out = gcn_step(t, t.constant(Matrix(2, 1, 0.0)), t.constant(Matrix::identity(2)),
                           t.constant(Matrix(1, 1, 1.0)), t.constant(Matrix(1, 1, -1.0)));
        CHECK(out.value()[0] == -1.0);
        CHECK(out.value()[1] == -1.0);
    }
}

TEST_CASE("gcn_sequence channel mixing degenerates correctly") {
    ad::ParameterStore store;
    GcnParams one = make_gcn_params(store, "gcn.a", 1, 2, 1);
    one.W->value = {0.7, -0.3};
    one.b->value = {0.1, 0.2};
    one.channel_w->value = {1.0};

    GcnParams two = make_gcn_params(store, "gcn.b", 1, 2, 2);
    two.W->value = one.W->value;
    two.b->value = one.b->value;
    two.channel_w->value = {0.5, 0.5};

    Rng rng(3);
    Matrix a(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) a(i, j) = a(j, i) = rng.uniform();

    Tape t;
    std::vector<Var> seq;
    for (int s = 0; s < 4; ++s) {
        Matrix x(3, 1);
        for (double& v : x.data) v = rng.normal();
        seq.push_back(t.constant(x));
    }
    Var meta = t.constant(a);
    auto h_one = gcn_sequence(t, seq, {meta}, one);
    auto h_two = gcn_sequence(t, seq, {meta, meta}, two);
    REQUIRE(h_one.size() == 4);
    REQUIRE(h_two.size() == 4);
    for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t i = 0; i < h_one[s].value().size(); ++i)
            CHECK(h_one[s].value()[i] == doctest::Approx(h_two[s].value()[i]).epsilon(1e-14));

    // C=1, w=[1] equals a plain per-graph step
    Tape t2;
    Var x0 = t2.constant(seq[0].to_matrix());
    Var direct = gcn_step(t2, x0, t2.constant(normalize_adjacency(a)),
                          t2.constant(mat(1, 2, {0.7, -0.3})),
                          t2.constant(mat(1, 2, {0.1, 0.2})));
    for (std::size_t i = 0; i < direct.value().size(); ++i)
        CHECK(h_one[0].value()[i] == doctest::Approx(direct.value()[i]).epsilon(1e-14));
}

TEST_CASE("shared parameters: perturbing W moves every position") {
    ad::ParameterStore store;
    GcnParams p = make_gcn_params(store, "gcn.s", 1, 1, 1);
    p.W->value = {1.0};
    p.channel_w->value = {1.0};
    Matrix a = mat(2, 2, {0, 1, 1, 0});

    auto run = [&] {
        Tape t;
        std::vector<Var> seq = {t.constant(mat(2, 1, {1, 2})), t.constant(mat(2, 1, {3, 4}))};
        auto hs = gcn_sequence(t, seq, {t.constant(a)}, p);
        std::vector<double> flat;
        for (const Var& h : hs)
            flat.insert(flat.end(), h.value().begin(), h.value().end());
        return flat;
    };
    auto base = run();
    p.W->value = {2.0};
    auto moved = run();
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(base[i] != moved[i]);
}

TEST_CASE("gru_step fixed points and gates") {
    ad::ParameterStore store;
    GruParams p = make_gru_params(store, "gru.t", 2, 3);
    {
        // all zeros -> h_out = 0
        Tape t;
        GruCell cell = GruCell::lift(t, p);
        Var h = cell.step(t, t.constant(Matrix(1, 2, 0.5)), t.zeros(1, 3));
        for (double v : h.value()) CHECK(v == 0.0);
    }
    {
        // saturated update gate -> pure memory
        for (double& v : p.b_z->value) v = 20.0;
        Rng rng(2);
        for (double& v : p.W_r->value) v = rng.normal();
        for (double& v : p.W_h->value) v = rng.normal();
        for (double& v : p.W_z->value) v = rng.normal();
        Tape t;
        GruCell cell = GruCell::lift(t, p);
        Matrix prev(1, 3);
        prev.data = {0.3, -0.2, 0.9};
        Var h = cell.step(t, t.constant(Matrix(1, 2, 1.0)), t.constant(prev));
        for (int j = 0; j < 3; ++j)
            CHECK(h.value()[j] == doctest::Approx(prev.data[j]).epsilon(1e-8));
    }
}

TEST_CASE("scalar gru step matches direct evaluation") {
    ad::ParameterStore store;
    GruParams p = make_gru_params(store, "gru.s", 1, 1);
    for (ad::Parameter* w : {p.W_r, p.V_r, p.W_h, p.V_h, p.W_z, p.V_z}) w->value = {1.0};
    Tape t;
    GruCell cell = GruCell::lift(t, p);
    Var h = cell.step(t, t.constant(Matrix(1, 1, 1.0)), t.constant(Matrix(1, 1, 0.5)));

    // one-line direct evaluation of the gate equations
    auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    const double R = sig(1.0 + 0.5);
    const double Htil = std::tanh(1.0 + R * 0.5);
    const double Z = sig(1.0 + 0.5);
    const double expect = (1.0 - Z) * Htil + Z * 0.5;
    CHECK(h.value()[0] == doctest::Approx(expect).epsilon(1e-15));
    CHECK(h.value()[0] == doctest::Approx(0.570642).epsilon(1e-5));
}

TEST_CASE("gru outputs are a convex mix of tanh output and memory") {
    ad::ParameterStore store;
    GruParams p = make_gru_params(store, "gru.b", 3, 4);
    Rng rng(31);
    for (ad::Parameter* w : store.params())
        for (double& v : w->value) v = rng.normal();
    Tape t;
    GruCell cell = GruCell::lift(t, p);
    Matrix prev(1, 4);
    for (double& v : prev.data) v = rng.uniform(-2.0, 2.0);
    Matrix in(1, 3);
    for (double& v : in.data) v = rng.normal();
    Var h = cell.step(t, t.constant(in), t.constant(prev));
    for (int j = 0; j < 4; ++j)
        CHECK(std::abs(h.value()[j]) <= std::max(std::abs(prev.data[j]), 1.0) + 1e-12);
}

TEST_CASE("gru readout modes") {
    Tape t;
    std::vector<Var> outs;
    for (int s = 0; s < 4; ++s) {
        Matrix m(1, 3);
        m.data = {s + 0.0, s + 0.5, s + 0.25};
        outs.push_back(t.constant(m));
    }
    Var cat = gru_readout(t, outs, Readout::Concat);
    REQUIRE(cat.value().size() == 12);
    CHECK(cat.value()[0] == 0.0);
    CHECK(cat.value()[3] == 1.0);  // step order
    CHECK(cat.value()[11] == 3.25);

    Var last = gru_readout(t, outs, Readout::Last);
    CHECK(last.value() == outs[3].value());

    Var mean = gru_readout(t, outs, Readout::Mean);
    CHECK(mean.value()[0] == doctest::Approx(1.5));

    // single step: all modes agree
    std::vector<Var> single = {outs[2]};
    CHECK(gru_readout(t, single, Readout::Concat).value() == outs[2].value());
    CHECK(gru_readout(t, single, Readout::Last).value() == outs[2].value());
    CHECK(gru_readout(t, single, Readout::Mean).value() == outs[2].value());

    CHECK(readout_from_string("last") == Readout::Last);
    CHECK(readout_from_string("concat") == Readout::Concat);
    CHECK(readout_from_string("mean") == Readout::Mean);
    CHECK_THROWS_AS(readout_from_string("sum"), ValidationError);
}

}
