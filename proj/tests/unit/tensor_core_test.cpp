#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "bandana/autograd.hpp"
#include "bandana/optim.hpp"
#include "bandana/sparse.hpp"
#include "oracles.hpp"
#include "suites.hpp"

using namespace bandana;

TEST_SUITE("tensor-core") {

TEST_CASE("spmm examples") {
    Rng rng(1);
    const Matrix x = oracle::random_matrix(5, 3, rng);
    CHECK(spmm(SparseMatrix::identity(5), x) == x);

    const SparseMatrix s = SparseMatrix::from_dense(Matrix{{0, 2}, {0, 0}});
    CHECK(spmm(s, Matrix{{1}, {3}}) == Matrix{{6}, {0}});

    SparseMatrix z = SparseMatrix::from_dense(Matrix{{1, 2}, {3, 0}});
    for (double& v : z.values) v = 0.0;
    CHECK(spmm(z, Matrix{{1, 1}, {2, 2}}) == Matrix(2, 2, 0.0));
}

TEST_CASE("spmm and matmul agree with dense arithmetic") {
    Rng rng(2);
    for (int t = 0; t < 50; ++t) {
        Matrix d(10, 10);
        for (double& v : d.values())
            if (rng.bernoulli(0.4)) v = rng.normal();
        const Matrix x = oracle::random_matrix(10, 4, rng);
        Matrix naive(10, 4);
        for (std::size_t i = 0; i < 10; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                for (std::size_t k = 0; k < 10; ++k) naive(i, j) += d(i, k) * x(k, j);
        CHECK(max_abs_diff(spmm(SparseMatrix::from_dense(d), x), naive) <= 1e-12);
        CHECK(max_abs_diff(matmul(d, x), naive) <= 1e-12);
    }
    CHECK_THROWS_AS(spmm(SparseMatrix::identity(3), Matrix(4, 1)), std::invalid_argument);
}

TEST_CASE("sparse helpers") {
    const SparseMatrix s = SparseMatrix::from_dense(Matrix{{0, 2, 1}, {4, 0, 0}, {0, 3, 5}});
    CHECK(s.transposed().to_dense() == s.to_dense().transposed());
    CHECK(s.row_sums() == std::vector<Real>{3, 4, 8});
    CHECK(s.col_sums() == std::vector<Real>{4, 5, 6});
    CHECK(s.find(2, 1) == 3);
    CHECK(s.find(1, 1) == s.nnz());
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("grouped softmax") {
    const std::vector<std::size_t> one{0, 3};
    SUBCASE("symmetric group") {
        const std::vector<Real> s{0, 0, 0};
        for (double v : grouped_softmax(s, one, 1.0)) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("closed form") {
        const std::vector<Real> s{std::numbers::ln2, 0};
        const std::vector<std::size_t> off{0, 2};
        const auto out = grouped_softmax(s, off, 1.0);
        CHECK(out[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
        CHECK(out[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("cold limit") {
        const std::vector<Real> s{5, 0, 0};
        const auto out = grouped_softmax(s, one, 1e-6);
        CHECK(out[0] > 1.0 - 1e-9);
        CHECK(out[1] < 1e-9);
    }
    SUBCASE("groups sum to one even for extreme scores") {
        Rng rng(3);
        for (int t = 0; t < 200; ++t) {
            std::vector<std::size_t> off{0};
            std::vector<Real> s;
            const std::size_t groups = 1 + rng.uniform_index(10);
            for (std::size_t g = 0; g < groups; ++g) {
                const std::size_t len = 1 + rng.uniform_index(8);
                for (std::size_t i = 0; i < len; ++i) s.push_back(rng.uniform(-1e4, 1e4));
                off.push_back(s.size());
            }
            const double tau = rng.bernoulli(0.5) ? 1e-3 : rng.uniform(0.1, 10.0);
            const auto out = grouped_softmax(s, off, tau);
            for (std::size_t g = 0; g + 1 < off.size(); ++g) {
                double sum = 0;
                for (std::size_t i = off[g]; i < off[g + 1]; ++i) {
                    CHECK(std::isfinite(out[i]));
                    sum += out[i];
                }
                CHECK(std::abs(sum - 1.0) <= 1e-12);
            }
        }
    }
    SUBCASE("errors") {
        const std::vector<Real> s{1, 2};
        const std::vector<std::size_t> off{0, 2};
        CHECK_THROWS_AS(grouped_softmax(s, off, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(grouped_softmax(s, off, -1.0), std::invalid_argument);
        const std::vector<std::size_t> empty_group{0, 0, 2};
        CHECK_THROWS_AS(grouped_softmax(s, empty_group, 1.0), std::invalid_argument);
    }
}

TEST_CASE("elementwise forward values") {
    Tape t;
    CHECK(sigmoid(t.constant(Matrix{{0}})).value()[0] == 0.5);
    CHECK(elu(t.constant(Matrix{{-1}})).value()[0] == doctest::Approx(std::exp(-1.0) - 1.0).epsilon(1e-15));
    CHECK(elu(t.constant(Matrix{{-1}})).value()[0] == doctest::Approx(-0.6321).epsilon(1e-4));
    CHECK(elu(t.constant(Matrix{{2.5}})).value()[0] == 2.5);
}

TEST_CASE("dropout") {
    Rng rng(4);
    const Matrix x = oracle::random_matrix(6, 5, rng);
    Tape t;
    const Var v = t.constant(x);
    Rng d(1);
    CHECK(dropout(v, 0.0, d, true).value() == x);
    CHECK(dropout(v, 0.0, d, false).value() == x);
    CHECK(dropout(v, 0.6, d, false).value() == x);
    const Matrix y = dropout(v, 0.25, d, true).value();
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] == 0.0) ++zeros;
        else CHECK(y[i] == doctest::Approx(x[i] / 0.75).epsilon(1e-15));
    }
    CHECK(zeros > 0);
    CHECK(zeros < x.size());
}

TEST_CASE("batch norm train and eval modes") {
    Rng rng(5);
    const Matrix x = oracle::random_matrix(50, 3, rng, 3.0);
    const Matrix gamma{{2.0, 1.0, 0.5}}, beta{{0.0, -1.0, 3.0}};
    BatchNormRunning running(3);
    Tape t;
    const Var out = batch_norm(t.constant(x), t.constant(gamma), t.constant(beta), running, true, 0.1);
    for (std::size_t c = 0; c < 3; ++c) {
        double mean = 0, var = 0, bmean = 0, bvar = 0;
        for (std::size_t r = 0; r < 50; ++r) bmean += x(r, c) / 50.0;
        for (std::size_t r = 0; r < 50; ++r) bvar += (x(r, c) - bmean) * (x(r, c) - bmean) / 50.0;
        for (std::size_t r = 0; r < 50; ++r) mean += out.value()(r, c) / 50.0;
        for (std::size_t r = 0; r < 50; ++r) var += std::pow(out.value()(r, c) - mean, 2) / 50.0;
        CHECK(mean == doctest::Approx(beta[c]).epsilon(1e-10));
        CHECK(var == doctest::Approx(gamma[c] * gamma[c] * bvar / (bvar + 1e-5)).epsilon(1e-10));
        CHECK(running.mean[c] == doctest::Approx(0.1 * bmean).epsilon(1e-12));
    }
    // eval mode uses the running statistics and leaves them alone
    const BatchNormRunning before = running;
    const Var ev = batch_norm(t.constant(x), t.constant(gamma), t.constant(beta), running, false);
    CHECK(running.mean == before.mean);
    CHECK(running.variance == before.variance);
    const double expect = gamma[1] * (x(7, 1) - running.mean[1]) / std::sqrt(running.variance[1] + 1e-5) + beta[1];
    CHECK(ev.value()(7, 1) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("backward hand derivatives") {
    SUBCASE("sum(W x) gives every row of grad(W) equal to x transposed") {
        Tape t;
        const Var w = t.parameter(Matrix{{1, 2}, {3, 4}});
        const Var x = t.constant(Matrix{{5}, {7}});
        t.backward(sum(matmul(w, x)));
        CHECK(w.grad() == Matrix{{5, 7}, {5, 7}});
        CHECK(x.grad() == Matrix(2, 1, 0.0));
    }
    SUBCASE("zero multiplier gives zero gradient") {
        Tape t;
        const Var w = t.parameter(Matrix{{0.3}});
        t.backward(sum(hadamard(sigmoid(w), t.constant(Matrix{{0.0}}))));
        CHECK(w.grad()[0] == 0.0);
    }
    SUBCASE("loss must be a scalar") {
        Tape t;
        const Var w = t.parameter(Matrix{{1, 2}});
        CHECK_THROWS_AS(t.backward(elu(w)), std::invalid_argument);
    }
    SUBCASE("shared subexpressions accumulate and each node is visited once") {
        Tape t;
        const Var w = t.parameter(Matrix{{1.5}});
        const Var y = hadamard(w, w);
        t.backward(sum(add(y, y)));
        CHECK(w.grad()[0] == doctest::Approx(4 * 1.5));
        CHECK(t.last_backward_visits() <= t.size());
    }
}

TEST_CASE("every primitive and both losses pass finite differences") {
    const oracle::GradientReport rep = oracle::gradient_suite(100, 2024);
    for (const auto& [name, err] : rep.worst) {
        INFO(name << " worst relative error " << err);
        CHECK(err < 1e-4);
    }
    CHECK(rep.worst.size() >= 20);
}

TEST_CASE("adam") {
    const AdamConfig cfg{.lr = 0.01};
    SUBCASE("first step moves each entry by lr") {
        Matrix p{{1.0, -2.0, 0.5}};
        const Matrix g{{0.3, -4.0, 1e-3}};
        Matrix* ps[] = {&p};
        const Matrix* gs[] = {&g};
        const Real wd[] = {0.0};
        AdamState st;
        adam_step(ps, gs, wd, st, cfg);
        const Matrix before{{1.0, -2.0, 0.5}};
        for (std::size_t i = 0; i < 3; ++i) {
            const double step = std::abs(p[i] - before[i]);
            const double expect = cfg.lr * std::abs(g[i]) / (std::abs(g[i]) + cfg.eps);
            CHECK(std::abs(step - expect) <= 1e-6 * expect);
            CHECK(std::abs(step - cfg.lr) <= 1e-5 * cfg.lr);
            CHECK((p[i] - before[i]) * g[i] < 0);
        }
        CHECK(st.step == 1);
    }
    SUBCASE("zero gradient leaves parameters unchanged") {
        Matrix p{{1.0, 2.0}};
        const Matrix g(1, 2, 0.0);
        Matrix* ps[] = {&p};
        const Matrix* gs[] = {&g};
        const Real wd[] = {0.0};
        AdamState st;
        for (int i = 0; i < 5; ++i) adam_step(ps, gs, wd, st, cfg);
        CHECK(p == Matrix{{1.0, 2.0}});
    }
    SUBCASE("decoupled weight decay shrinks before the moment update") {
        Matrix p{{2.0}};
        const Matrix g(1, 1, 0.0);
        Matrix* ps[] = {&p};
        const Matrix* gs[] = {&g};
        const Real wd[] = {0.5};
        AdamState st;
        adam_step(ps, gs, wd, st, cfg);
        CHECK(p[0] == doctest::Approx(2.0 - 0.01 * 0.5 * 2.0).epsilon(1e-15));
    }
    SUBCASE("identical gradient sequences give identical parameters") {
        Rng rng(9);
        std::vector<Matrix> grads;
        for (int i = 0; i < 20; ++i) grads.push_back(oracle::random_matrix(3, 3, rng));
        auto run = [&] {
            Matrix p(3, 3, 0.5);
            AdamState st;
            const Real wd[] = {1e-3};
            for (const Matrix& g : grads) {
                Matrix* ps[] = {&p};
                const Matrix* gs[] = {&g};
                adam_step(ps, gs, wd, st, cfg);
            }
            return p;
        };
        CHECK(run() == run());
    }
    SUBCASE("non-finite gradient aborts the step") {
        Matrix p{{1.0, 2.0}};
        const Matrix g{{0.1, std::numeric_limits<double>::quiet_NaN()}};
        Matrix* ps[] = {&p};
        const Matrix* gs[] = {&g};
        const Real wd[] = {0.1};
        AdamState st;
        CHECK_THROWS_AS(adam_step(ps, gs, wd, st, cfg), std::runtime_error);
        CHECK(p == Matrix{{1.0, 2.0}});
    }
}

TEST_CASE("named random streams are reproducible and distinct") {
    Rng a = Rng::derive(7, "masks"), b = Rng::derive(7, "masks"), c = Rng::derive(7, "dropout");
    bool differs = false;
    for (int i = 0; i < 10; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        differs |= x != c.next_u64();
    }
    CHECK(differs);
}

}  // TEST_SUITE
