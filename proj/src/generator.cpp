#include "rssa/generator.hpp"

#include <cmath>

namespace rssa {

using namespace rssa::ag;

void ModelConfig::validate() const {
    RSSA_CHECK(latent_dim >= 1 && style_dim >= 1, "latent/style dims must be positive");
    RSSA_CHECK(!stage_channels.empty(), "stage_channels empty");
    RSSA_CHECK(base_resolution >= 2, "base_resolution too small");
    int r = base_resolution;
    for (std::size_t i = 1; i < stage_channels.size(); ++i) r *= 2;
    RSSA_CHECK(r == resolution, "resolution must equal base_resolution * 2^(stages-1)");
    RSSA_CHECK(img_channels >= 1, "img_channels must be positive");
}

GeneratorModel::GeneratorModel(const ModelConfig& cfg, RandomStream& rng) : cfg_(cfg) {
    cfg_.validate();
    int d = cfg_.latent_dim;
    for (int i = 0; i < 3; ++i) {
        int out = (i == 2) ? cfg_.style_dim : d;
        mapping_.emplace_back(d, out, rng);
        d = out;
    }
    const_input_ = param(rng.normal_tensor({1, cfg_.stage_channels[0], cfg_.base_resolution, cfg_.base_resolution}));
    int in_ch = cfg_.stage_channels[0];
    for (int s = 0; s < cfg_.stages(); ++s) {
        const int out_ch = cfg_.stage_channels[s];
        convs_.emplace_back(in_ch, out_ch, 3, cfg_.style_dim, rng);
        convs_.emplace_back(out_ch, out_ch, 3, cfg_.style_dim, rng);
        in_ch = out_ch;
    }
    to_rgb_ = nn::Conv2d(in_ch, cfg_.img_channels, 1, rng);
}

Var GeneratorModel::map_batch(const Var& z) const {
    RSSA_CHECK(z->value.rank() == 2 && z->shape()[1] == cfg_.latent_dim, "map_batch latent shape mismatch");
    RSSA_CHECK(z->value.all_finite(), "latent code must be finite");
    Var x = z;
    for (const auto& fc : mapping_) x = lrelu(fc.forward(x), cfg_.lrelu_slope);
    return x;
}

GeneratorModel::SynthOut GeneratorModel::synth_batch(const std::vector<Var>& styles) const {
    RSSA_CHECK(static_cast<int>(styles.size()) == cfg_.style_layers(), "style stack length mismatch");
    const int B = styles[0]->shape()[0];
    SynthOut out;
    Var x = add(const_input_, constant(Tensor::zeros({B, 1, 1, 1})));  // broadcast to batch
    for (int s = 0; s < cfg_.stages(); ++s) {
        if (s > 0) x = up2(x);
        x = lrelu(convs_[2 * s].forward(x, styles[2 * s]), cfg_.lrelu_slope);
        x = lrelu(convs_[2 * s + 1].forward(x, styles[2 * s + 1]), cfg_.lrelu_slope);
        out.feats.push_back(x);
    }
    out.image = tanh_(to_rgb_.forward(x));
    return out;
}

StyleCodeStack GeneratorModel::map_latent(const Tensor& z) const {
    RSSA_CHECK(z.rank() == 1 && z.size(0) == cfg_.latent_dim, "map_latent latent dim mismatch");
    RSSA_CHECK(z.all_finite(), "latent code must be finite");
    NoGradGuard ng;
    Var w = map_batch(constant(reshape(z, {1, cfg_.latent_dim})));
    StyleCodeStack stack;
    Tensor wt = reshape(w->value, {cfg_.style_dim});
    for (int l = 0; l < cfg_.style_layers(); ++l) stack.codes.push_back(wt);
    return stack;
}

std::pair<Tensor, FeatureMapStack> GeneratorModel::synthesize(const StyleCodeStack& styles) const {
    RSSA_CHECK(styles.layers() == cfg_.style_layers(), "style stack length mismatch");
    NoGradGuard ng;
    std::vector<Var> vs;
    for (const auto& c : styles.codes) {
        RSSA_CHECK(c.rank() == 1 && c.size(0) == cfg_.style_dim, "style code dim mismatch");
        vs.push_back(constant(reshape(c, {1, cfg_.style_dim})));
    }
    SynthOut so = synth_batch(vs);
    FeatureMapStack stack;
    for (const auto& f : so.feats) {
        const auto& s = f->shape();
        stack.maps.push_back(reshape(f->value, {s[1], s[2], s[3]}));
    }
    const auto& is = so.image->shape();
    return {reshape(so.image->value, {is[1], is[2], is[3]}), std::move(stack)};
}

nn::ParamList GeneratorModel::named_parameters() const {
    nn::ParamList out;
    for (std::size_t i = 0; i < mapping_.size(); ++i) mapping_[i].collect("mapping.fc" + std::to_string(i), out);
    out.emplace_back("synthesis.const_input", const_input_);
    for (std::size_t i = 0; i < convs_.size(); ++i) convs_[i].collect("synthesis.conv" + std::to_string(i), out);
    to_rgb_.collect("synthesis.to_rgb", out);
    return out;
}

nn::ParamList GeneratorModel::synthesis_parameters() const {
    nn::ParamList all = named_parameters();
    nn::ParamList out;
    for (auto& kv : all)
        if (kv.first.rfind("synthesis.", 0) == 0) out.push_back(std::move(kv));
    return out;
}

GeneratorModel GeneratorModel::clone() const {
    GeneratorModel g;
    g.cfg_ = cfg_;
    g.mapping_ = mapping_;
    g.convs_ = convs_;
    g.to_rgb_ = to_rgb_;
    // deep-copy every parameter leaf
    auto copy_var = [](Var& v) { v = param(v->value); };
    for (auto& fc : g.mapping_) {
        copy_var(fc.weight);
        copy_var(fc.bias);
    }
    g.const_input_ = param(const_input_->value);
    for (auto& c : g.convs_) {
        copy_var(c.weight);
        copy_var(c.bias);
        copy_var(c.affine.weight);
        copy_var(c.affine.bias);
    }
    copy_var(g.to_rgb_.weight);
    copy_var(g.to_rgb_.bias);
    return g;
}

std::uint64_t GeneratorModel::parameter_hash() const {
    nn::ParamList p = named_parameters();
    return nn::parameter_hash(p);
}

void GeneratorModel::set_trainable(bool trainable) {
    nn::ParamList p = named_parameters();
    nn::set_requires_grad(p, trainable);
}

DiscriminatorModel::DiscriminatorModel(const ModelConfig& cfg, RandomStream& rng) : cfg_(cfg) {
    // trunk channel plan mirrors the generator in reverse
    channels_ = {12, 24, 48, 64};
    patch_grid_ = cfg_.resolution / 8;  // three 2x poolings after from_rgb
    RSSA_CHECK(patch_grid_ >= 1, "discriminator needs resolution >= 8");
    from_rgb_ = nn::Conv2d(cfg_.img_channels, channels_[0], 1, rng);
    for (std::size_t i = 0; i + 1 < channels_.size(); ++i) convs_.emplace_back(channels_[i], channels_[i + 1], 3, rng);
    const int cl = channels_.back();
    patch_head_ = nn::Conv2d(cl, 1, 1, rng);
    image_conv_ = nn::Conv2d(cl, cl, 3, rng);
    image_fc_ = nn::Linear(cl * patch_grid_ * patch_grid_, 1, rng);
}

Var DiscriminatorModel::trunk(const Var& images) const {
    RSSA_CHECK(images->value.rank() == 4 && images->shape()[1] == cfg_.img_channels &&
                   images->shape()[2] == cfg_.resolution && images->shape()[3] == cfg_.resolution,
               "discriminator input shape mismatch");
    Var x = lrelu(from_rgb_.forward(images), cfg_.lrelu_slope);
    for (const auto& c : convs_) {
        x = lrelu(c.forward(x), cfg_.lrelu_slope);
        x = avg_pool2(x);
    }
    return x;  // [B,C,4,4]
}

DiscriminatorModel::Out DiscriminatorModel::forward(const Var& images) const {
    Var t = trunk(images);
    Out out;
    out.patch_logits = patch_head_.forward(t);
    Var h = lrelu(image_conv_.forward(t), cfg_.lrelu_slope);
    const auto& s = h->shape();
    out.image_logit = image_fc_.forward(reshape(h, {s[0], s[1] * s[2] * s[3]}));
    return out;
}

Var DiscriminatorModel::image_logit(const Var& images) const { return forward(images).image_logit; }

std::pair<double, Tensor> DiscriminatorModel::discriminate(const Tensor& image) const {
    RSSA_CHECK(image.rank() == 3, "discriminate expects a [C,H,W] image");
    NoGradGuard ng;
    Out out = forward(constant(reshape(image, {1, image.size(0), image.size(1), image.size(2)})));
    const auto& ps = out.patch_logits->shape();
    Tensor grid = reshape(out.patch_logits->value, {ps[2], ps[3]});
    RSSA_CHECK(out.image_logit->value.all_finite() && grid.all_finite(), "non-finite discriminator logits");
    return {out.image_logit->value[0], grid};
}

nn::ParamList DiscriminatorModel::named_parameters() const {
    nn::ParamList out;
    from_rgb_.collect("disc.from_rgb", out);
    for (std::size_t i = 0; i < convs_.size(); ++i) convs_[i].collect("disc.conv" + std::to_string(i), out);
    patch_head_.collect("disc.patch_head", out);
    image_conv_.collect("disc.image_conv", out);
    image_fc_.collect("disc.image_fc", out);
    return out;
}

DiscriminatorModel DiscriminatorModel::clone() const {
    DiscriminatorModel d = *this;
    auto copy_var = [](Var& v) { v = param(v->value); };
    copy_var(d.from_rgb_.weight);
    copy_var(d.from_rgb_.bias);
    for (auto& c : d.convs_) {
        copy_var(c.weight);
        copy_var(c.bias);
    }
    copy_var(d.patch_head_.weight);
    copy_var(d.patch_head_.bias);
    copy_var(d.image_conv_.weight);
    copy_var(d.image_conv_.bias);
    copy_var(d.image_fc_.weight);
    copy_var(d.image_fc_.bias);
    return d;
}

std::uint64_t DiscriminatorModel::parameter_hash() const {
    nn::ParamList p = named_parameters();
    return nn::parameter_hash(p);
}

void DiscriminatorModel::set_trainable(bool trainable) {
    nn::ParamList p = named_parameters();
    nn::set_requires_grad(p, trainable);
}

std::vector<Tensor> sample_latent(int count, std::uint64_t seed, int dim) {
    RSSA_CHECK(count >= 1, "sample_latent needs count >= 1");
    RandomStream rng(hash_combine(seed, 0x1a7e57ULL));
    std::vector<Tensor> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(rng.normal_tensor({dim}));
    return out;
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
    RSSA_CHECK(!rows.empty(), "stack_rows on empty list");
    const int d = rows[0].size(0);
    Tensor out({static_cast<int>(rows.size()), d});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        RSSA_CHECK(rows[i].rank() == 1 && rows[i].size(0) == d, "stack_rows shape mismatch");
        for (int j = 0; j < d; ++j) out[static_cast<std::int64_t>(i) * d + j] = rows[i][j];
    }
    return out;
}

}  // namespace rssa
