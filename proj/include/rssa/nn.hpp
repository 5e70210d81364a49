#pragma once

#include "rssa/autograd.hpp"
#include "rssa/rng.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace rssa::nn {

using ag::Var;

// Ordered list of named parameter leaves. Order is construction order and is
// part of the determinism contract (optimizer updates iterate it).
using ParamList = std::vector<std::pair<std::string, Var>>;

struct Linear {
    Var weight;  // [in,out]
    Var bias;    // [1,out]

    Linear() = default;
    Linear(int in, int out, RandomStream& rng, double bias_init = 0.0);
    Var forward(const Var& x) const;  // [B,in] -> [B,out]
    void collect(const std::string& prefix, ParamList& out) const;
};

// Style-modulated 3x3 (or 1x1) convolution with weight demodulation. The
// style vector is mapped through an affine layer to per-input-channel scales.
struct ModulatedConv2d {
    Var weight;  // [OC,IC,K,K]
    Var bias;    // [1,OC,1,1]
    Linear affine;
    int pad = 1;
    bool demodulate = true;

    ModulatedConv2d() = default;
    ModulatedConv2d(int in_ch, int out_ch, int kernel, int style_dim, RandomStream& rng);
    Var forward(const Var& x, const Var& style) const;  // x [B,IC,H,W], style [B,style_dim]
    void collect(const std::string& prefix, ParamList& out) const;
};

struct Conv2d {
    Var weight;  // [OC,IC,K,K]
    Var bias;    // [1,OC,1,1]
    int pad = 1;

    Conv2d() = default;
    Conv2d(int in_ch, int out_ch, int kernel, RandomStream& rng);
    Var forward(const Var& x) const;
    void collect(const std::string& prefix, ParamList& out) const;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.0;
    double beta2 = 0.99;
    double eps = 1e-8;
};

class Adam {
  public:
    explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

    void step(const ParamList& params, const ag::GradMap& grads);

    AdamConfig& config() { return cfg_; }
    const AdamConfig& config() const { return cfg_; }

    // state access for checkpointing
    struct Slot {
        Tensor m, v;
        std::int64_t t = 0;
    };
    std::map<std::string, Slot>& state() { return state_; }
    const std::map<std::string, Slot>& state() const { return state_; }

  private:
    AdamConfig cfg_;
    std::map<std::string, Slot> state_;
};

void set_requires_grad(ParamList& params, bool enabled);
std::uint64_t parameter_hash(const ParamList& params);

}  // namespace rssa::nn
