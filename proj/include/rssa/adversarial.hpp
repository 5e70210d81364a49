#pragma once

#include "rssa/generator.hpp"

#include <functional>

namespace rssa {

struct AdversarialConfig {
    double image_weight = 1.0;
    double patch_weight = 1.0;
    double r1_gamma = 10.0;
    int r1_interval = 16;
    double pl_weight = 2.0;
    int pl_interval = 8;
    double pl_decay = 0.99;

    void validate() const;
};

// Non-saturating generator loss over both discriminator heads:
// mean softplus(-logit), patch head averaged over its grid.
ag::Var generator_adv_loss_v(const DiscriminatorModel& d, const ag::Var& fake_images, const AdversarialConfig& cfg);
double generator_adv_loss(const DiscriminatorModel& d, const Tensor& fake_images, const AdversarialConfig& cfg);

// Logistic discriminator loss pushing real logits up and fake logits down.
ag::Var discriminator_adv_loss_v(const DiscriminatorModel& d, const ag::Var& real_images, const ag::Var& fake_images,
                                 const AdversarialConfig& cfg);
double discriminator_adv_loss(const DiscriminatorModel& d, const Tensor& real_images, const Tensor& fake_images,
                              const AdversarialConfig& cfg);

// R1 penalty (gamma/2)*E[||grad_x D_img(x)||^2] for an arbitrary scalar head.
// The returned node is differentiable with respect to the head's parameters.
ag::Var r1_penalty_fn(const std::function<ag::Var(const ag::Var&)>& image_logit_fn, const Tensor& real_images,
                      double gamma);
ag::Var r1_penalty_v(const DiscriminatorModel& d, const Tensor& real_images, double gamma);
double r1_penalty(const DiscriminatorModel& d, const Tensor& real_images, double gamma);

// Running-mean state for the path length regularizer.
struct PathLengthState {
    double mean = 0.0;
    bool initialized = false;
};

// Penalize deviation of ||J_w^T y|| (y unit-variance image noise) from its
// exponential running mean; updates the state in place. `image` must be the
// synthesis output of `styles` with the graph alive.
ag::Var path_length_penalty_v(const ag::Var& image, const std::vector<ag::Var>& styles, PathLengthState& state,
                              double decay, RandomStream& rng);

}  // namespace rssa
