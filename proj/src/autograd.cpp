#include "rssa/autograd.hpp"

#include <algorithm>
#include <cmath>

namespace rssa::ag {

namespace {

thread_local bool g_grad_enabled = true;
thread_local std::int64_t g_next_id = 1;

bool any_requires_grad(const std::vector<Var>& vs) {
    for (const auto& v : vs)
        if (v && v->requires_grad) return true;
    return false;
}

Var leaf(Tensor t, bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->value = std::move(t);
    n->requires_grad = requires_grad;
    n->id = g_next_id++;
    return n;
}

}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

GradModeGuard::GradModeGuard(bool enabled) : prev_(g_grad_enabled) { g_grad_enabled = enabled; }
GradModeGuard::~GradModeGuard() { g_grad_enabled = prev_; }

Var constant(Tensor t) { return leaf(std::move(t), false); }
Var param(Tensor t) { return leaf(std::move(t), true); }

Var make_op(Tensor value, std::vector<Var> parents, VjpFn vjp) {
    const bool track = g_grad_enabled && any_requires_grad(parents);
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->id = g_next_id++;
    if (track) {
        n->parents = std::move(parents);
        n->vjp = std::move(vjp);
        n->requires_grad = true;
    }
    return n;
}

GradMap backward(const Var& root, bool create_graph) {
    RSSA_CHECK(root && root->value.numel() == 1, "backward needs a scalar root");
    GradMap grads;
    if (!root->requires_grad) return grads;

    // collect reachable grad-requiring subgraph
    std::vector<const Node*> order;
    std::unordered_map<const Node*, bool> seen;
    std::vector<Var> stack{root};
    std::unordered_map<const Node*, Var> keep;  // keep shared ownership during sweep
    while (!stack.empty()) {
        Var v = stack.back();
        stack.pop_back();
        if (seen.count(v.get())) continue;
        seen[v.get()] = true;
        keep[v.get()] = v;
        order.push_back(v.get());
        for (const auto& p : v->parents)
            if (p && p->requires_grad && !seen.count(p.get())) stack.push_back(p);
    }
    std::sort(order.begin(), order.end(), [](const Node* a, const Node* b) { return a->id > b->id; });

    grads[root.get()] = constant(Tensor::ones({1}));
    GradModeGuard mode(create_graph);
    for (const Node* n : order) {
        auto git = grads.find(n);
        if (git == grads.end() || !n->vjp) continue;
        const Var& self = keep[n];
        std::vector<Var> pg = n->vjp(n->parents, self, git->second);
        RSSA_CHECK(pg.size() == n->parents.size(), "vjp arity mismatch");
        for (std::size_t i = 0; i < pg.size(); ++i) {
            const Var& p = n->parents[i];
            if (!p || !p->requires_grad || !pg[i]) continue;
            RSSA_CHECK(pg[i]->value.shape() == p->value.shape(), "vjp shape mismatch");
            auto it = grads.find(p.get());
            if (it == grads.end())
                grads[p.get()] = pg[i];
            else
                it->second = add(it->second, pg[i]);
        }
    }
    return grads;
}

const Var& grad_of(const GradMap& grads, const Var& v) {
    static const Var null;
    auto it = grads.find(v.get());
    return it == grads.end() ? null : it->second;
}

// ---- elementwise / broadcast ----

Var add(const Var& a, const Var& b) {
    return make_op(rssa::add(a->value, b->value), {a, b},
                   [](const std::vector<Var>& p, const Var&, const Var& g) -> std::vector<Var> {
                       return {sum_to(g, p[0]->shape()), sum_to(g, p[1]->shape())};
                   });
}

Var sub(const Var& a, const Var& b) {
    return make_op(rssa::sub(a->value, b->value), {a, b},
                   [](const std::vector<Var>& p, const Var&, const Var& g) -> std::vector<Var> {
                       return {sum_to(g, p[0]->shape()), sum_to(neg(g), p[1]->shape())};
                   });
}

Var mul(const Var& a, const Var& b) {
    return make_op(rssa::mul(a->value, b->value), {a, b},
                   [](const std::vector<Var>& p, const Var&, const Var& g) -> std::vector<Var> {
                       return {sum_to(mul(g, p[1]), p[0]->shape()), sum_to(mul(g, p[0]), p[1]->shape())};
                   });
}

Var div(const Var& a, const Var& b) {
    return make_op(rssa::div(a->value, b->value), {a, b},
                   [](const std::vector<Var>& p, const Var& self, const Var& g) -> std::vector<Var> {
                       Var da = sum_to(div(g, p[1]), p[0]->shape());
                       Var db = sum_to(neg(div(mul(g, self), p[1])), p[1]->shape());
                       return {da, db};
                   });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var scale(const Var& a, double c) {
    return make_op(rssa::scale(a->value, c), {a},
                   [c](const std::vector<Var>&, const Var&, const Var& g) -> std::vector<Var> {
                       return {scale(g, c)};
                   });
}

Var add_scalar(const Var& a, double c) {
    return make_op(rssa::add_scalar(a->value, c), {a},
                   [](const std::vector<Var>&, const Var&, const Var& g) -> std::vector<Var> {
                       return {g};
                   });
}

// ---- shape ----

Var matmul(const Var& a, const Var& b) {
    return make_op(rssa::matmul(a->value, b->value), {a, b},
                   [](const std::vector<Var>& p, const Var&, const Var& g) -> std::vector<Var> {
                       return {matmul(g, transpose(p[1])), matmul(transpose(p[0]), g)};
                   });
}

Var transpose(const Var& a) {
    return make_op(rssa::transpose2d(a->value), {a},
                   [](const std::vector<Var>&, const Var&, const Var& g) -> std::vector<Var> {
                       return {transpose(g)};
                   });
}

Var reshape(const Var& a, std::vector<int> shape) {
    std::vector<int> orig = a->shape();
    return make_op(rssa::reshape(a->value, std::move(shape)), {a},
                   [orig](const std::vector<Var>&, const Var&, const Var& g) -> std::vector<Var> {
                       return {reshape(g, orig)};
                   });
}

namespace {

// Adjoint pair: slice extracts a block, embed scatters it back into zeros.
Var embed_slice_v(const Var& a, std::vector<int> shape, std::vector<int> start) {
    std::vector<int> size = a->shape();
    return make_op(rssa::embed_slice(a->value, shape, start), {a},
                   [start, size](const std::vector<Var>&, const Var&, const Var& g) -> std::vector<Var> {
                       return {slice(g, start, size)};
                   });
}

}  // namespace

Var slice(const Var& a, std::vector<int> start, std::vector<int> size) {
    std::vector<int> orig = a->shape();
    return make_op(rssa::slice(a->value, start, size), {a},
                   [orig, start](const std::vector<Var>&, const Var&, const Var& g) -> std::vector<Var> {
                       return {embed_slice_v(g, orig, start)};
                   });
}

Var sum_to(const Var& a, std::vector<int> shape) {
    if (a->shape() == shape) return a;
    return make_op(rssa::sum_to(a->value, shape), {a},
                   [](const std::vector<Var>& p, const Var&, const Var& g) -> std::vector<Var> {
                       return {mul(g, constant(Tensor::ones(p[0]->shape())))};
                   });
}

Var sum_all(const Var& a) { return sum_to(a, {1}); }

Var mean_all(const Var& a) { return scale(sum_all(a), 1.0 / static_cast<double>(a->value.numel())); }

// ---- conv family ----

Var conv2d(const Var& x, const Var& w, int pad) {
    return make_op(rssa::conv2d(x->value, w->value, pad), {x, w},
                   [pad](const std::vector<Var>& p, const Var&, const Var& g) -> std::vector<Var> {
                       const auto& xs = p[0]->shape();
                       const auto& ws = p[1]->shape();
                       Var dx = conv2d_input_grad(g, p[1], pad, xs[2], xs[3]);
                       Var dw = conv2d_weight_grad(p[0], g, pad, ws[2], ws[3]);
                       return {dx, dw};
                   });
}

Var conv2d_input_grad(const Var& gy, const Var& w, int pad, int h, int w_in) {
    return make_op(rssa::conv2d_input_grad(gy->value, w->value, pad, h, w_in), {gy, w},
                   [pad](const std::vector<Var>& p, const Var&, const Var& g) -> std::vector<Var> {
                       const auto& ws = p[1]->shape();
                       Var dgy = conv2d(g, p[1], pad);
                       Var dw = conv2d_weight_grad(g, p[0], pad, ws[2], ws[3]);
                       return {dgy, dw};
                   });
}

Var conv2d_weight_grad(const Var& x, const Var& gy, int pad, int kh, int kw) {
    return make_op(rssa::conv2d_weight_grad(x->value, gy->value, pad, kh, kw), {x, gy},
                   [pad](const std::vector<Var>& p, const Var&, const Var& g) -> std::vector<Var> {
                       const auto& xs = p[0]->shape();
                       Var dx = conv2d_input_grad(p[1], g, pad, xs[2], xs[3]);
                       Var dgy = conv2d(p[0], g, pad);
                       return {dx, dgy};
                   });
}

Var sum_pool2(const Var& x) {
    return make_op(rssa::sum_pool2(x->value), {x},
                   [](const std::vector<Var>&, const Var&, const Var& g) -> std::vector<Var> {
                       return {up2(g)};
                   });
}

Var up2(const Var& x) {
    return make_op(rssa::up2(x->value), {x},
                   [](const std::vector<Var>&, const Var&, const Var& g) -> std::vector<Var> {
                       return {sum_pool2(g)};
                   });
}

Var avg_pool2(const Var& x) { return scale(sum_pool2(x), 0.25); }

// ---- nonlinearities ----

Var lrelu(const Var& x, double slope) {
    Tensor y(x->shape());
    Tensor mask(x->shape());
    const std::int64_t n = x->value.numel();
    for (std::int64_t i = 0; i < n; ++i) {
        const double v = x->value[i];
        mask[i] = v > 0 ? 1.0 : slope;
        y[i] = v * mask[i];
    }
    return make_op(std::move(y), {x},
                   [m = std::move(mask)](const std::vector<Var>&, const Var&, const Var& g) -> std::vector<Var> {
                       return {mul(g, constant(m))};
                   });
}

Var tanh_(const Var& x) {
    return make_op(map_unary(x->value, std::tanh), {x},
                   [](const std::vector<Var>&, const Var& self, const Var& g) -> std::vector<Var> {
                       return {mul(g, add_scalar(neg(mul(self, self)), 1.0))};
                   });
}

Var sigmoid_(const Var& x) {
    Tensor y(x->shape());
    for (std::int64_t i = 0; i < x->value.numel(); ++i) {
        const double v = x->value[i];
        y[i] = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    return make_op(std::move(y), {x},
                   [](const std::vector<Var>&, const Var& self, const Var& g) -> std::vector<Var> {
                       return {mul(g, mul(self, add_scalar(neg(self), 1.0)))};
                   });
}

Var softplus_(const Var& x) {
    Tensor y(x->shape());
    for (std::int64_t i = 0; i < x->value.numel(); ++i) {
        const double v = x->value[i];
        y[i] = std::max(v, 0.0) + std::log1p(std::exp(-std::fabs(v)));
    }
    return make_op(std::move(y), {x},
                   [](const std::vector<Var>& p, const Var&, const Var& g) -> std::vector<Var> {
                       return {mul(g, sigmoid_(p[0]))};
                   });
}

Var exp_(const Var& x) {
    return make_op(map_unary(x->value, std::exp), {x},
                   [](const std::vector<Var>&, const Var& self, const Var& g) -> std::vector<Var> {
                       return {mul(g, self)};
                   });
}

Var log_(const Var& x) {
    return make_op(map_unary(x->value, std::log), {x},
                   [](const std::vector<Var>& p, const Var&, const Var& g) -> std::vector<Var> {
                       return {div(g, p[0])};
                   });
}

Var sqrt_(const Var& x) {
    return make_op(map_unary(x->value, std::sqrt), {x},
                   [](const std::vector<Var>&, const Var& self, const Var& g) -> std::vector<Var> {
                       return {div(g, scale(self, 2.0))};
                   });
}

Var square(const Var& x) { return mul(x, x); }

Var abs_(const Var& x) {
    Tensor y(x->shape());
    Tensor sign(x->shape());
    for (std::int64_t i = 0; i < x->value.numel(); ++i) {
        y[i] = std::fabs(x->value[i]);
        sign[i] = x->value[i] >= 0 ? 1.0 : -1.0;
    }
    return make_op(std::move(y), {x},
                   [s = std::move(sign)](const std::vector<Var>&, const Var&, const Var& g) -> std::vector<Var> {
                       return {mul(g, constant(s))};
                   });
}

Var clamp(const Var& x, double lo, double hi) {
    Tensor y(x->shape());
    Tensor mask(x->shape());
    for (std::int64_t i = 0; i < x->value.numel(); ++i) {
        const double v = x->value[i];
        y[i] = std::min(std::max(v, lo), hi);
        mask[i] = (v > lo && v < hi) ? 1.0 : 0.0;
    }
    return make_op(std::move(y), {x},
                   [m = std::move(mask)](const std::vector<Var>&, const Var&, const Var& g) -> std::vector<Var> {
                       return {mul(g, constant(m))};
                   });
}

Var clamp_min(const Var& x, double c) {
    Tensor y(x->shape());
    Tensor mask(x->shape());
    for (std::int64_t i = 0; i < x->value.numel(); ++i) {
        const double v = x->value[i];
        y[i] = std::max(v, c);
        mask[i] = v > c ? 1.0 : 0.0;
    }
    return make_op(std::move(y), {x},
                   [m = std::move(mask)](const std::vector<Var>&, const Var&, const Var& g) -> std::vector<Var> {
                       return {mul(g, constant(m))};
                   });
}

Var huber(const Var& x, double beta) {
    RSSA_CHECK(beta > 0, "huber beta must be positive");
    Tensor y(x->shape());
    for (std::int64_t i = 0; i < x->value.numel(); ++i) {
        const double v = x->value[i];
        y[i] = std::fabs(v) <= beta ? v * v / (2.0 * beta) : std::fabs(v) - beta / 2.0;
    }
    return make_op(std::move(y), {x},
                   [beta](const std::vector<Var>& p, const Var&, const Var& g) -> std::vector<Var> {
                       return {mul(g, scale(clamp(p[0], -beta, beta), 1.0 / beta))};
                   });
}

Var masked_row_softmax(const Var& logits, const Tensor& mask) {
    RSSA_CHECK(logits->shape() == mask.shape(), "masked_row_softmax mask shape mismatch");
    RSSA_CHECK(logits->value.rank() == 2, "masked_row_softmax expects rank-2");
    const int R = logits->value.size(0), C = logits->value.size(1);
    Tensor y({R, C});
    for (int r = 0; r < R; ++r) {
        double mx = -1e300;
        for (int c = 0; c < C; ++c)
            if (mask[r * C + c] != 0.0) mx = std::max(mx, logits->value[r * C + c]);
        double denom = 0;
        for (int c = 0; c < C; ++c)
            if (mask[r * C + c] != 0.0) denom += std::exp(logits->value[r * C + c] - mx);
        RSSA_CHECK(denom > 0, "masked_row_softmax row without active entries");
        for (int c = 0; c < C; ++c)
            y[r * C + c] = mask[r * C + c] != 0.0 ? std::exp(logits->value[r * C + c] - mx) / denom : 0.0;
    }
    return make_op(std::move(y), {logits},
                   [R](const std::vector<Var>&, const Var& self, const Var& g) -> std::vector<Var> {
                       Var t = mul(self, g);
                       Var rowsum = sum_to(t, {R, 1});
                       return {mul(self, sub(g, rowsum))};
                   });
}

double scalar(const Var& v) { return v->value.item(); }

Var detach(const Var& v) { return constant(v->value); }

}  // namespace rssa::ag
