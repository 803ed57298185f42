#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "replay/errors.hpp"
#include "replay/gradcheck.hpp"
#include "replay/matrix.hpp"
#include "replay/rng.hpp"
#include "replay/tensor.hpp"

using namespace replay;

TEST_CASE("matmul identity") {
    Rng rng(7);
    DenseMatrix m(3, 3);
    for (double& v : m.values) v = rng.uniform(-5.0, 5.0);
    const DenseMatrix out = matmul(DenseMatrix::identity(3), m);
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        CHECK(out.values[i] == m.values[i]);
    }
}

TEST_CASE("matmul hand example") {
    const DenseMatrix a(2, 2, {1, 2, 3, 4});
    const DenseMatrix b(2, 1, {0, 1});
    const DenseMatrix out = matmul(a, b);
    CHECK(out.rows == 2);
    CHECK(out.cols == 1);
    CHECK(out.values[0] == doctest::Approx(2.0));
    CHECK(out.values[1] == doctest::Approx(4.0));
}

TEST_CASE("matmul dimension error") {
    const DenseMatrix a(2, 3);
    const DenseMatrix b(2, 2);
    CHECK_THROWS_AS(matmul(a, b), DimensionError);
}

TEST_CASE("matmul associativity on random small matrices") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n1 = 1 + rng.uniform_int(4);
        const std::size_t n2 = 1 + rng.uniform_int(4);
        const std::size_t n3 = 1 + rng.uniform_int(4);
        const std::size_t n4 = 1 + rng.uniform_int(4);
        DenseMatrix a(n1, n2), b(n2, n3), c(n3, n4);
        for (double& v : a.values) v = rng.uniform(-1.0, 1.0);
        for (double& v : b.values) v = rng.uniform(-1.0, 1.0);
        for (double& v : c.values) v = rng.uniform(-1.0, 1.0);
        const DenseMatrix left = matmul(matmul(a, b), c);
        const DenseMatrix right = matmul(a, matmul(b, c));
        for (std::size_t i = 0; i < left.values.size(); ++i) {
            CHECK(std::fabs(left.values[i] - right.values[i]) < 1e-10);
        }
    }
}

TEST_CASE("gemv kernels against matmul") {
    Rng rng(13);
    DenseMatrix a(4, 3);
    for (double& v : a.values) v = rng.uniform(-1.0, 1.0);
    std::vector<double> x = {0.5, -1.0, 2.0};
    std::vector<double> y(4, 0.0);
    gemv_acc(a.values, 4, 3, x, y);
    const DenseMatrix xv(3, 1, x);
    const DenseMatrix prod = matmul(a, xv);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(y[i] == doctest::Approx(prod.values[i]));
    }

    std::vector<double> u = {1.0, 0.0, -2.0, 0.25};
    std::vector<double> yt(3, 0.0);
    gemv_transpose_acc(a.values, 4, 3, u, yt);
    for (std::size_t c = 0; c < 3; ++c) {
        double want = 0.0;
        for (std::size_t r = 0; r < 4; ++r) want += a.at(r, c) * u[r];
        CHECK(yt[c] == doctest::Approx(want));
    }
}

TEST_CASE("adam zero gradient is the identity") {
    ParameterStore params;
    ParamTensor& t = params.create("w", {4});
    t.value = {1.0, -2.0, 0.5, 3.0};
    const std::vector<double> before = t.value;
    OptimizerConfig cfg;
    adam_step(params, cfg, 1);
    CHECK(t.value == before);
    for (double m : t.m) CHECK(m == 0.0);
    for (double v : t.v) CHECK(v == 0.0);
}

TEST_CASE("adam first step is approximately lr in magnitude") {
    ParameterStore params;
    ParamTensor& t = params.create("w", {1});
    t.value[0] = 1.0;
    t.grad[0] = 0.5;
    OptimizerConfig cfg;  // lr 0.01, beta1 0.9, beta2 0.999, eps 1e-8
    adam_step(params, cfg, 1);
    // First bias-corrected step: m_hat = g, v_hat = g^2, so the update is
    // lr * g / (|g| + eps) = lr up to epsilon.
    CHECK(std::fabs((1.0 - t.value[0]) - 0.01) < 1e-8);
    CHECK(t.grad[0] == 0.0);  // zeroed after the step
}

TEST_CASE("adam second identical gradient does not grow the step") {
    ParameterStore params;
    ParamTensor& t = params.create("w", {1});
    t.value[0] = 1.0;
    OptimizerConfig cfg;
    t.grad[0] = 0.5;
    adam_step(params, cfg, 1);
    const double first = 1.0 - t.value[0];
    const double mid = t.value[0];
    t.grad[0] = 0.5;
    adam_step(params, cfg, 2);
    const double second = mid - t.value[0];
    CHECK(second <= first + 1e-12);
}

TEST_CASE("adam rejects non-finite gradients naming the tensor") {
    ParameterStore params;
    params.create("fine", {2});
    ParamTensor& bad = params.create("poi_embeddings", {2});
    bad.grad[1] = std::numeric_limits<double>::quiet_NaN();
    OptimizerConfig cfg;
    try {
        adam_step(params, cfg, 1);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("poi_embeddings") != std::string::npos);
    }
}

TEST_CASE("optimizer config validation") {
    OptimizerConfig cfg;
    cfg.beta1 = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = OptimizerConfig{};
    cfg.learning_rate = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = OptimizerConfig{};
    cfg.epsilon = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("finite_diff_check on a quadratic") {
    ParameterStore params;
    ParamTensor& t = params.create("x", {1});
    t.value[0] = 3.0;
    auto loss = [&](bool grads) {
        if (grads) t.grad[0] += t.value[0];
        return 0.5 * t.value[0] * t.value[0];
    };
    Rng rng(1);
    const GradCheckReport report = finite_diff_check(loss, params, 1e-5, 4, rng);
    CHECK(report.max_rel_error < 1e-9);
}

TEST_CASE("finite_diff_check ignores dead parameters") {
    ParameterStore params;
    ParamTensor& x = params.create("x", {1});
    params.create("dead", {3});
    x.value[0] = 2.0;
    auto loss = [&](bool grads) {
        if (grads) x.grad[0] += x.value[0];
        return 0.5 * x.value[0] * x.value[0];
    };
    Rng rng(2);
    const GradCheckReport report = finite_diff_check(loss, params, 1e-5, 8, rng);
    CHECK(report.max_rel_error < 1e-9);
}

TEST_CASE("finite_diff_check detects non-determinism") {
    ParameterStore params;
    params.create("x", {1});
    int calls = 0;
    auto loss = [&](bool) { return static_cast<double>(calls++); };
    Rng rng(3);
    CHECK_THROWS_AS(finite_diff_check(loss, params, 1e-5, 2, rng),
                    DeterminismError);
}

TEST_CASE("derived seeds differ per label and index") {
    const std::uint64_t base = 42;
    CHECK(derive_seed(base, "a") != derive_seed(base, "b"));
    CHECK(derive_seed(base, "a", 0) != derive_seed(base, "a", 1));
    CHECK(derive_seed(base, "a") == derive_seed(base, "a"));
}

TEST_CASE("poisson draws have roughly the right mean") {
    Rng rng(5);
    const double lambda = 3.0;
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) sum += rng.poisson(lambda);
    CHECK(std::fabs(sum / n - lambda) < 0.1);
}
