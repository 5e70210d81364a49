#pragma once

#include "rssa/nn.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace rssa {

using ag::Var;

// One style vector per synthesis layer (the layered latent space).
struct StyleCodeStack {
    std::vector<Tensor> codes;  // L entries, each [style_dim]

    int layers() const { return static_cast<int>(codes.size()); }
};

// Per-stage activations of one synthesis pass, shallow to deep.
struct FeatureMapStack {
    std::vector<Tensor> maps;  // each [C,H,W]

    int layers() const { return static_cast<int>(maps.size()); }
};

struct ModelConfig {
    int latent_dim = 64;
    int style_dim = 64;
    int resolution = 32;
    int img_channels = 3;
    int base_resolution = 4;
    std::vector<int> stage_channels = {48, 48, 24, 12};  // 4,8,16,32
    double lrelu_slope = 0.2;

    int stages() const { return static_cast<int>(stage_channels.size()); }
    int style_layers() const { return 2 * stages(); }  // two modulated convs per stage
    void validate() const;
};

// Style-based generator: mapping network (3 fully connected layers) plus a
// constant-input synthesis network with two modulated 3x3 convolutions per
// resolution stage and nearest 2x upsampling between stages.
class GeneratorModel {
  public:
    GeneratorModel() = default;
    GeneratorModel(const ModelConfig& cfg, RandomStream& rng);

    const ModelConfig& config() const { return cfg_; }

    // Batched graph-level paths.
    Var map_batch(const Var& z) const;  // [B,latent_dim] -> [B,style_dim]
    struct SynthOut {
        Var image;              // [B,3,R,R] in [-1,1]
        std::vector<Var> feats;  // one per stage: [B,C,H,W], H=4,8,16,...
    };
    SynthOut synth_batch(const std::vector<Var>& styles) const;  // L vars of [B,style_dim]

    // Single-sample convenience API.
    StyleCodeStack map_latent(const Tensor& z) const;
    std::pair<Tensor, FeatureMapStack> synthesize(const StyleCodeStack& styles) const;

    nn::ParamList named_parameters() const;        // mapping + synthesis
    nn::ParamList synthesis_parameters() const;    // trainable set during adaption
    GeneratorModel clone() const;
    std::uint64_t parameter_hash() const;
    void set_trainable(bool trainable);

  private:
    ModelConfig cfg_;
    std::vector<nn::Linear> mapping_;
    Var const_input_;  // [1,C0,4,4]
    std::vector<nn::ModulatedConv2d> convs_;  // 2 per stage
    nn::Conv2d to_rgb_;
};

// Shared convolutional trunk feeding an image-level logit head and a
// patch-level logit grid (4x4 at 32x32 input).
class DiscriminatorModel {
  public:
    DiscriminatorModel() = default;
    DiscriminatorModel(const ModelConfig& cfg, RandomStream& rng);

    struct Out {
        Var image_logit;   // [B,1]
        Var patch_logits;  // [B,1,P,P]
    };
    Out forward(const Var& images) const;
    // Image-level logit only (used by the gradient penalty).
    Var image_logit(const Var& images) const;

    std::pair<double, Tensor> discriminate(const Tensor& image) const;

    int patch_grid() const { return patch_grid_; }
    nn::ParamList named_parameters() const;
    DiscriminatorModel clone() const;
    std::uint64_t parameter_hash() const;
    void set_trainable(bool trainable);

  private:
    Var trunk(const Var& images) const;
    ModelConfig cfg_;
    std::vector<int> channels_;
    nn::Conv2d from_rgb_;
    std::vector<nn::Conv2d> convs_;
    nn::Conv2d patch_head_;
    nn::Conv2d image_conv_;
    nn::Linear image_fc_;
    int patch_grid_ = 4;
};

// i.i.d. standard normal latent codes, deterministic per seed.
std::vector<Tensor> sample_latent(int count, std::uint64_t seed, int dim = 64);

// Stack a batch of vectors [d] into one tensor [B,d].
Tensor stack_rows(const std::vector<Tensor>& rows);

}  // namespace rssa
