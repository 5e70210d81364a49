#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rssa/autograd.hpp"
#include "rssa/rng.hpp"

#include <cmath>
#include <functional>

using namespace rssa;
using namespace rssa::ag;

namespace {

// central finite differences over every input entry
double max_rel_grad_error(const std::function<Var(const Var&)>& f, Tensor x0, double step = 1e-5) {
    Var x = param(x0);
    Var y = f(x);
    GradMap grads = backward(y);
    const Var& gx = grad_of(grads, x);
    REQUIRE(gx);
    double worst = 0;
    for (std::int64_t i = 0; i < x0.numel(); ++i) {
        Tensor xp = x0, xm = x0;
        xp[i] += step;
        xm[i] -= step;
        // no NoGradGuard here: f may build gradients as part of its value
        const double fp = scalar(f(constant(xp)));
        const double fm = scalar(f(constant(xm)));
        const double fd = (fp - fm) / (2 * step);
        const double an = gx->value[i];
        const double denom = std::max({std::fabs(fd), std::fabs(an), 1e-6});
        worst = std::max(worst, std::fabs(fd - an) / denom);
    }
    return worst;
}

}  // namespace

TEST_CASE("elementwise and broadcast gradients") {
    RandomStream rng(7);
    Tensor a = rng.normal_tensor({2, 3});
    Tensor b = rng.normal_tensor({1, 3});
    Var vb = param(b);

    auto f = [&](const Var& x) { return sum_all(mul(add(x, vb), sub(x, scale(vb, 0.5)))); };
    CHECK(max_rel_grad_error(f, a) < 1e-6);

    auto fdiv = [&](const Var& x) { return sum_all(div(x, add_scalar(square(vb), 1.0))); };
    CHECK(max_rel_grad_error(fdiv, a) < 1e-6);
}

TEST_CASE("matmul transpose reshape slice gradients") {
    RandomStream rng(13);
    Tensor a = rng.normal_tensor({3, 4});
    Tensor m = rng.normal_tensor({4, 2});
    Var vm = constant(m);
    auto f = [&](const Var& x) {
        Var y = matmul(x, vm);                    // [3,2]
        Var t = transpose(y);                     // [2,3]
        Var s = slice(t, {0, 1}, {2, 2});         // [2,2]
        return sum_all(mul(reshape(s, {4, 1}), reshape(s, {4, 1})));
    };
    CHECK(max_rel_grad_error(f, a) < 1e-6);
}

TEST_CASE("nonlinearity gradients") {
    RandomStream rng(17);
    Tensor a = rng.normal_tensor({3, 3});
    CHECK(max_rel_grad_error([](const Var& x) { return sum_all(tanh_(x)); }, a) < 1e-6);
    CHECK(max_rel_grad_error([](const Var& x) { return sum_all(sigmoid_(x)); }, a) < 1e-6);
    CHECK(max_rel_grad_error([](const Var& x) { return sum_all(softplus_(x)); }, a) < 1e-6);
    CHECK(max_rel_grad_error([](const Var& x) { return sum_all(exp_(x)); }, a) < 1e-6);
    CHECK(max_rel_grad_error([](const Var& x) { return sum_all(sqrt_(add_scalar(square(x), 1.0))); }, a) < 1e-6);
    CHECK(max_rel_grad_error([](const Var& x) { return sum_all(lrelu(x, 0.2)); }, a) < 1e-6);
    CHECK(max_rel_grad_error([](const Var& x) { return sum_all(huber(x, 1.0)); }, a) < 1e-5);
    CHECK(max_rel_grad_error([](const Var& x) { return sum_all(abs_(x)); }, a) < 1e-5);
}

TEST_CASE("conv family gradients") {
    RandomStream rng(23);
    Tensor x = rng.normal_tensor({2, 3, 5, 5});
    Tensor w = rng.normal_tensor({4, 3, 3, 3});
    Var vw = param(w);
    auto f = [&](const Var& v) { return sum_all(square(conv2d(v, vw, 1))); };
    CHECK(max_rel_grad_error(f, x) < 1e-6);

    // weight gradient
    Var vx = constant(x);
    auto fw = [&](const Var& v) { return sum_all(square(conv2d(vx, v, 1))); };
    CHECK(max_rel_grad_error(fw, w) < 1e-6);

    // pooling pair
    auto fp = [&](const Var& v) { return sum_all(square(avg_pool2(v))); };
    CHECK(max_rel_grad_error(fp, rng.normal_tensor({1, 2, 4, 4})) < 1e-6);
    auto fu = [&](const Var& v) { return sum_all(square(up2(v))); };
    CHECK(max_rel_grad_error(fu, rng.normal_tensor({1, 2, 3, 3})) < 1e-6);
}

TEST_CASE("masked row softmax gradients and normalization") {
    RandomStream rng(29);
    Tensor logits = rng.normal_tensor({4, 4});
    Tensor mask({4, 4});
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) mask[r * 4 + c] = (std::abs(r - c) <= 1) ? 1.0 : 0.0;
    Var y = masked_row_softmax(constant(logits), mask);
    for (int r = 0; r < 4; ++r) {
        double s = 0;
        for (int c = 0; c < 4; ++c) s += y->value[r * 4 + c];
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    Tensor target = rng.normal_tensor({4, 4});
    auto f = [&](const Var& x) { return sum_all(square(sub(masked_row_softmax(x, mask), constant(target)))); };
    CHECK(max_rel_grad_error(f, logits) < 1e-6);
}

TEST_CASE("double backprop matches finite differences of a first gradient") {
    // g(w) = d/dx [x^2 tanh(w x)] style composite; check grad-of-grad flows
    RandomStream rng(31);
    Tensor w0 = rng.normal_tensor({2, 2});
    Tensor x0 = rng.normal_tensor({2, 2});

    auto grad_norm = [&](const Var& w) {
        Var x = param(x0);
        Var y = sum_all(mul(square(x), tanh_(matmul(w, x))));
        GradMap g = backward(y, /*create_graph=*/true);
        const Var& gx = grad_of(g, x);
        return sum_all(square(gx));
    };
    CHECK(max_rel_grad_error(grad_norm, w0, 1e-5) < 1e-5);
}

TEST_CASE("gradient accumulates over fan-out") {
    Tensor a({2}, {1.5, -2.0});
    Var x = param(a);
    Var y = add(mul(x, x), scale(x, 3.0));  // x^2 + 3x
    GradMap g = backward(sum_all(y));
    const Var& gx = grad_of(g, x);
    CHECK(gx->value[0] == doctest::Approx(2 * 1.5 + 3));
    CHECK(gx->value[1] == doctest::Approx(2 * -2.0 + 3));
}

TEST_CASE("no-grad mode records nothing") {
    NoGradGuard ng;
    Var x = param(Tensor::ones({2}));
    Var y = mul(x, x);
    CHECK_FALSE(y->requires_grad);
}
