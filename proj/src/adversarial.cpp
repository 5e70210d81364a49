#include "rssa/adversarial.hpp"

#include <cmath>

namespace rssa {

using namespace rssa::ag;

void AdversarialConfig::validate() const {
    RSSA_CHECK(image_weight >= 0 && patch_weight >= 0, "head weights must be nonnegative");
    RSSA_CHECK(r1_gamma >= 0 && pl_weight >= 0, "regularizer weights must be nonnegative");
    RSSA_CHECK(r1_interval >= 1 && pl_interval >= 1, "regularizer cadences must be >= 1");
    RSSA_CHECK(pl_decay > 0 && pl_decay < 1, "pl_decay must lie in (0,1)");
}

namespace {

Var head_mean(const Var& logits) { return mean_all(logits); }

}  // namespace

Var generator_adv_loss_v(const DiscriminatorModel& d, const Var& fake_images, const AdversarialConfig& cfg) {
    RSSA_CHECK(fake_images->shape()[0] >= 1, "generator_adv_loss needs a nonempty batch");
    auto out = d.forward(fake_images);
    Var img = head_mean(softplus_(neg(out.image_logit)));
    Var patch = head_mean(softplus_(neg(out.patch_logits)));
    return add(scale(img, cfg.image_weight), scale(patch, cfg.patch_weight));
}

double generator_adv_loss(const DiscriminatorModel& d, const Tensor& fake_images, const AdversarialConfig& cfg) {
    NoGradGuard ng;
    return scalar(generator_adv_loss_v(d, constant(fake_images), cfg));
}

Var discriminator_adv_loss_v(const DiscriminatorModel& d, const Var& real_images, const Var& fake_images,
                             const AdversarialConfig& cfg) {
    RSSA_CHECK(real_images->shape()[0] >= 1 && fake_images->shape()[0] >= 1,
               "discriminator_adv_loss needs nonempty batches");
    auto real = d.forward(real_images);
    auto fake = d.forward(fake_images);
    Var img = add(head_mean(softplus_(neg(real.image_logit))), head_mean(softplus_(fake.image_logit)));
    Var patch = add(head_mean(softplus_(neg(real.patch_logits))), head_mean(softplus_(fake.patch_logits)));
    return add(scale(img, cfg.image_weight), scale(patch, cfg.patch_weight));
}

double discriminator_adv_loss(const DiscriminatorModel& d, const Tensor& real_images, const Tensor& fake_images,
                              const AdversarialConfig& cfg) {
    NoGradGuard ng;
    return scalar(discriminator_adv_loss_v(d, constant(real_images), constant(fake_images), cfg));
}

Var r1_penalty_fn(const std::function<Var(const Var&)>& image_logit_fn, const Tensor& real_images, double gamma) {
    RSSA_CHECK(real_images.rank() == 4 && real_images.size(0) >= 1, "r1_penalty needs a [N,C,H,W] batch");
    GradModeGuard mode(true);  // the penalty is built from an input gradient
    const int batch = real_images.size(0);
    Var x = param(real_images);  // grad-requiring input leaf
    Var logit = image_logit_fn(x);
    // per-sample input gradients via one backward pass; the sum over the
    // batch gives each sample its own gradient since samples do not interact
    Var s = sum_all(logit);
    GradMap grads = backward(s, /*create_graph=*/true);
    const Var& gx = grad_of(grads, x);
    RSSA_CHECK(gx, "r1_penalty: no input gradient");
    Var sq = sum_to(square(gx), {batch, 1, 1, 1});
    return scale(mean_all(sq), gamma / 2.0);
}

Var r1_penalty_v(const DiscriminatorModel& d, const Tensor& real_images, double gamma) {
    return r1_penalty_fn([&d](const Var& x) { return d.image_logit(x); }, real_images, gamma);
}

double r1_penalty(const DiscriminatorModel& d, const Tensor& real_images, double gamma) {
    Var p = r1_penalty_v(d, real_images, gamma);
    return scalar(p);
}

Var path_length_penalty_v(const Var& image, const std::vector<Var>& styles, PathLengthState& state, double decay,
                          RandomStream& rng) {
    RSSA_CHECK(!styles.empty() && styles[0]->shape()[0] >= 1, "path length penalty needs a nonempty batch");
    const int batch = styles[0]->shape()[0];
    Tensor y = rng.normal_tensor(image->shape());
    Var s = sum_all(mul(image, constant(y)));
    GradMap grads = backward(s, /*create_graph=*/true);
    Var norm2;
    for (const auto& st : styles) {
        const Var& gs = grad_of(grads, st);
        if (!gs) continue;
        Var term = sum_to(square(gs), {batch, 1});
        norm2 = norm2 ? add(norm2, term) : term;
    }
    RSSA_CHECK(norm2, "path length penalty: styles received no gradient");
    Var lengths = sqrt_(clamp_min(norm2, 1e-12));  // [batch,1]
    Var batch_norm = mean_all(lengths);
    const double observed = scalar(batch_norm);
    if (!state.initialized) {
        state.mean = observed;
        state.initialized = true;
    }
    Var penalty = square(add_scalar(batch_norm, -state.mean));
    state.mean = decay * state.mean + (1.0 - decay) * observed;
    return penalty;
}

}  // namespace rssa
