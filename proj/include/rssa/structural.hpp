#pragma once

#include "rssa/generator.hpp"

#include <cstdint>
#include <vector>

namespace rssa {

// Weights and resolution policies for the cross-domain structural losses.
// Thresholds are ratios of the generator output resolution so the policy
// keeps its meaning at any scale.
struct StructuralLossConfig {
    double alpha = 1.0;  // self-correlation weight
    double beta = 1.0;   // disturbance-correlation weight
    double smooth_l1_transition = 1.0;
    double cosine_eps = 1e-8;

    int output_resolution = 32;
    double scc_global_max_ratio = 1.0 / 8.0;  // full matrices at or below this width
    int scc_pool_factor = 2;                  // average pooling before patching
    double scc_patch_ratio = 1.0 / 16.0;      // patch width after pooling
    double dcc_cap_ratio = 0.5;               // disturbance loss only at or below this width
    double dcc_delta_ratio = 0.25;            // window width = map width * ratio
    bool dcc_anchor_only = false;             // restrict pairs to (anchor,k)/(k,anchor)

    int scc_global_max() const;
    int scc_patch_size() const;
    int dcc_cap() const;
    int dcc_delta(int width) const;
    void validate() const;
};

// Cosine similarities between the feature vector at every position and every
// other position of one feature map. Positions are linear indices r*W+c.
struct SelfCorrelationMatrix {
    int w = 0, h = 0;
    Tensor m;  // [P,P]

    double at(int r0, int c0, int r1, int c1) const { return m[(std::int64_t)(r0 * w + c0) * w * h + r1 * w + c1]; }
};

// Anchor latent plus N codes sampled uniformly from the ball around it.
struct DisturbanceBatch {
    Tensor anchor;
    std::vector<Tensor> neighbors;
    double radius = 0.0;

    int size() const { return static_cast<int>(neighbors.size()) + 1; }
    std::vector<Tensor> all() const;
};

// Row-stochastic field: for each position p of f_j, a distribution over the
// window around p in f_k (softmax of cosine similarities).
struct MutualCorrelationField {
    int w = 0, h = 0, delta = 0;
    Tensor probs;  // [P,P], zero outside the window
    Tensor mask;   // [P,P], 1 inside the window

    double weight(int r0, int c0, int r1, int c1) const {
        return probs[(std::int64_t)(r0 * w + c0) * w * h + r1 * w + c1];
    }
};

// ---- graph-level building blocks (used by training and the tests) ----

// Column-normalized features: f [C,P] -> u with ||u_p|| = 1 (eps-guarded).
ag::Var normalize_columns(const ag::Var& f, double eps);
// Feature map [C,H,W] -> flattened [C,H*W].
ag::Var flatten_map(const ag::Var& fmap);
ag::Var self_correlation_v(const ag::Var& fmap, double eps);  // [C,H,W] -> [P,P]
ag::Var scc_map_loss_v(const ag::Var& src, const ag::Var& tgt, const StructuralLossConfig& cfg);
ag::Var scc_loss_v(const std::vector<std::vector<ag::Var>>& src_stacks,
                   const std::vector<std::vector<ag::Var>>& tgt_stacks, const StructuralLossConfig& cfg);
ag::Var dcc_loss_v(const std::vector<std::vector<ag::Var>>& src_stacks,
                   const std::vector<std::vector<ag::Var>>& tgt_stacks, const StructuralLossConfig& cfg);

const Tensor& window_mask(int h, int w, int delta);

// ---- value-level public operations ----

SelfCorrelationMatrix self_correlation(const Tensor& fmap);
std::vector<SelfCorrelationMatrix> local_self_correlation(const Tensor& fmap, const StructuralLossConfig& cfg);
double scc_loss(const FeatureMapStack& source, const FeatureMapStack& target, const StructuralLossConfig& cfg);
DisturbanceBatch sample_disturbance(const Tensor& z, double r, int n, std::uint64_t seed);
MutualCorrelationField mutual_correlation(const Tensor& fj, const Tensor& fk, int delta);
double dcc_loss(const std::vector<FeatureMapStack>& source, const std::vector<FeatureMapStack>& target,
                const StructuralLossConfig& cfg);

struct StructuralParts {
    double scc = 0.0;
    double dcc = 0.0;
    double total(const StructuralLossConfig& cfg) const { return cfg.alpha * scc + cfg.beta * dcc; }
};

// Combined loss over one disturbance batch: alpha*L_scc + beta*L_dcc, where
// L_scc averages per-sample sums over the batch.
StructuralParts structural_loss(const std::vector<FeatureMapStack>& source,
                                const std::vector<FeatureMapStack>& target, const StructuralLossConfig& cfg);

}  // namespace rssa
