#include "rssa/nn.hpp"

#include <cmath>
#include <cstring>

namespace rssa::nn {

using namespace rssa::ag;

Linear::Linear(int in, int out, RandomStream& rng, double bias_init) {
    weight = param(rng.normal_tensor({in, out}, 1.0 / std::sqrt(static_cast<double>(in))));
    bias = param(Tensor::full({1, out}, bias_init));
}

Var Linear::forward(const Var& x) const { return add(matmul(x, weight), bias); }

void Linear::collect(const std::string& prefix, ParamList& out) const {
    out.emplace_back(prefix + ".weight", weight);
    out.emplace_back(prefix + ".bias", bias);
}

ModulatedConv2d::ModulatedConv2d(int in_ch, int out_ch, int kernel, int style_dim, RandomStream& rng)
    : affine(style_dim, in_ch, rng, 1.0), pad(kernel / 2) {
    const double fan_in = static_cast<double>(in_ch * kernel * kernel);
    weight = param(rng.normal_tensor({out_ch, in_ch, kernel, kernel}, 1.0 / std::sqrt(fan_in)));
    bias = param(Tensor::zeros({1, out_ch, 1, 1}));
}

Var ModulatedConv2d::forward(const Var& x, const Var& style) const {
    const int B = x->shape()[0];
    const int IC = x->shape()[1];
    const int OC = weight->shape()[0];
    const int K = weight->shape()[2];
    Var s = affine.forward(style);                       // [B,IC]
    Var xs = mul(x, reshape(s, {B, IC, 1, 1}));          // scale input channels
    Var y = conv2d(xs, weight, pad);
    if (demodulate) {
        // per-sample, per-output-channel norm of the modulated kernel
        Var w2 = square(weight);                          // [OC,IC,K,K]
        Var w2sum = sum_to(reshape(w2, {OC, IC, K * K}), {OC, IC, 1});
        Var w2mat = transpose(reshape(w2sum, {OC, IC}));  // [IC,OC]
        Var t = add_scalar(matmul(square(s), w2mat), 1e-8);
        Var d = div(constant(Tensor::ones({B, OC})), sqrt_(t));
        y = mul(y, reshape(d, {B, OC, 1, 1}));
    }
    return add(y, bias);
}

void ModulatedConv2d::collect(const std::string& prefix, ParamList& out) const {
    out.emplace_back(prefix + ".weight", weight);
    out.emplace_back(prefix + ".bias", bias);
    affine.collect(prefix + ".affine", out);
}

Conv2d::Conv2d(int in_ch, int out_ch, int kernel, RandomStream& rng) : pad(kernel / 2) {
    const double fan_in = static_cast<double>(in_ch * kernel * kernel);
    weight = param(rng.normal_tensor({out_ch, in_ch, kernel, kernel}, 1.0 / std::sqrt(fan_in)));
    bias = param(Tensor::zeros({1, out_ch, 1, 1}));
}

Var Conv2d::forward(const Var& x) const { return add(conv2d(x, weight, pad), bias); }

void Conv2d::collect(const std::string& prefix, ParamList& out) const {
    out.emplace_back(prefix + ".weight", weight);
    out.emplace_back(prefix + ".bias", bias);
}

void Adam::step(const ParamList& params, const ag::GradMap& grads) {
    for (const auto& [name, p] : params) {
        const Var& g = ag::grad_of(grads, p);
        if (!g) continue;
        auto& slot = state_[name];
        if (slot.t == 0) {
            slot.m = Tensor::zeros(p->value.shape());
            slot.v = Tensor::zeros(p->value.shape());
        }
        slot.t += 1;
        const double b1 = cfg_.beta1, b2 = cfg_.beta2;
        const double bc1 = 1.0 - std::pow(b1, static_cast<double>(slot.t));
        const double bc2 = 1.0 - std::pow(b2, static_cast<double>(slot.t));
        const std::int64_t n = p->value.numel();
        for (std::int64_t i = 0; i < n; ++i) {
            const double gi = g->value[i];
            slot.m[i] = b1 * slot.m[i] + (1.0 - b1) * gi;
            slot.v[i] = b2 * slot.v[i] + (1.0 - b2) * gi * gi;
            const double mhat = slot.m[i] / bc1;
            const double vhat = slot.v[i] / bc2;
            p->value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

void set_requires_grad(ParamList& params, bool enabled) {
    for (auto& [name, p] : params) p->requires_grad = enabled;
}

std::uint64_t parameter_hash(const ParamList& params) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
    auto mix = [&h](const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 1099511628211ULL;
        }
    };
    for (const auto& [name, p] : params) {
        mix(name.data(), name.size());
        mix(p->value.data(), sizeof(double) * static_cast<std::size_t>(p->value.numel()));
    }
    return h;
}

}  // namespace rssa::nn
