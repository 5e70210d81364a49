#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rssa/generator.hpp"

#include <cmath>

using namespace rssa;
using namespace rssa::ag;

namespace {

GeneratorModel make_generator(std::uint64_t seed = 3) {
    ModelConfig cfg;
    RandomStream rng(seed);
    return GeneratorModel(cfg, rng);
}

DiscriminatorModel make_discriminator(std::uint64_t seed = 4) {
    ModelConfig cfg;
    RandomStream rng(seed);
    return DiscriminatorModel(cfg, rng);
}

}  // namespace

TEST_CASE("sample_latent is deterministic per seed") {
    auto a = sample_latent(1, 0);
    auto b = sample_latent(1, 0);
    REQUIRE(a.size() == 1);
    for (int i = 0; i < 64; ++i) CHECK(a[0][i] == b[0][i]);
    auto c = sample_latent(1, 1);
    bool all_same = true;
    for (int i = 0; i < 64; ++i) all_same = all_same && a[0][i] == c[0][i];
    CHECK_FALSE(all_same);
}

TEST_CASE("sample_latent matches the standard normal at large counts") {
    auto zs = sample_latent(10000, 1);
    for (int d = 0; d < 64; ++d) {
        double mean = 0;
        for (const auto& z : zs) mean += z[d];
        mean /= 10000.0;
        CHECK(std::fabs(mean) < 0.05);
    }
}

TEST_CASE("sample_latent rejects an empty request") {
    CHECK_THROWS_AS(sample_latent(0, 0), std::invalid_argument);
}

TEST_CASE("map_latent determinism, length and injectivity") {
    GeneratorModel g = make_generator();
    Tensor z = sample_latent(1, 7)[0];
    StyleCodeStack s1 = g.map_latent(z);
    StyleCodeStack s2 = g.map_latent(z);
    CHECK(s1.layers() == g.config().style_layers());
    CHECK(s1.layers() == 8);
    for (int l = 0; l < s1.layers(); ++l)
        for (int i = 0; i < 64; ++i) CHECK(s1.codes[l][i] == s2.codes[l][i]);

    Tensor z2 = sample_latent(1, 8)[0];
    StyleCodeStack s3 = g.map_latent(z2);
    double diff = 0;
    for (int i = 0; i < 64; ++i) diff += std::fabs(s1.codes[0][i] - s3.codes[0][i]);
    CHECK(diff > 1e-9);
}

TEST_CASE("map_latent rejects non-finite input") {
    GeneratorModel g = make_generator();
    Tensor z({64});
    z[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(g.map_latent(z), std::invalid_argument);
}

TEST_CASE("synthesize output contracts") {
    GeneratorModel g = make_generator();
    Tensor z = sample_latent(1, 11)[0];
    auto [img, feats] = g.synthesize(g.map_latent(z));

    CHECK(img.shape() == std::vector<int>{3, 32, 32});
    bool in_range = true;
    for (std::int64_t i = 0; i < img.numel(); ++i) in_range = in_range && img[i] <= 1.0 && img[i] >= -1.0;
    CHECK(in_range);
    REQUIRE(feats.layers() == 4);
    const int expect[4] = {4, 8, 16, 32};
    for (int l = 0; l < 4; ++l) {
        CHECK(feats.maps[l].size(1) == expect[l]);
        CHECK(feats.maps[l].size(2) == expect[l]);
    }

    auto [img2, feats2] = g.synthesize(g.map_latent(z));
    bool same = true;
    for (std::int64_t i = 0; i < img.numel(); ++i) same = same && img[i] == img2[i];
    for (int l = 0; l < 4; ++l)
        for (std::int64_t i = 0; i < feats.maps[l].numel(); ++i)
            same = same && feats.maps[l][i] == feats2.maps[l][i];
    CHECK(same);
}

TEST_CASE("synthesize rejects a mismatched stack") {
    GeneratorModel g = make_generator();
    StyleCodeStack s = g.map_latent(sample_latent(1, 1)[0]);
    s.codes.pop_back();
    CHECK_THROWS_AS(g.synthesize(s), std::invalid_argument);
}

TEST_CASE("discriminate determinism, patch grid and robustness") {
    DiscriminatorModel d = make_discriminator();
    GeneratorModel g = make_generator();
    auto [img, feats] = g.synthesize(g.map_latent(sample_latent(1, 2)[0]));

    auto [l1, p1] = d.discriminate(img);
    auto [l2, p2] = d.discriminate(img);
    CHECK(l1 == l2);
    CHECK(p1.shape() == std::vector<int>{4, 4});
    bool same = true;
    for (std::int64_t i = 0; i < p1.numel(); ++i) same = same && p1[i] == p2[i];
    CHECK(same);

    Tensor extreme_hi = Tensor::full({3, 32, 32}, 1.0);
    Tensor extreme_lo = Tensor::full({3, 32, 32}, -1.0);
    auto [lh, ph] = d.discriminate(extreme_hi);
    auto [ll, pl] = d.discriminate(extreme_lo);
    CHECK(std::isfinite(lh));
    CHECK(std::isfinite(ll));
    CHECK(ph.all_finite());
    CHECK(pl.all_finite());

    CHECK_THROWS_AS(d.discriminate(Tensor::zeros({3, 16, 16})), std::invalid_argument);
}

TEST_CASE("clone initializes an exact copy") {
    GeneratorModel g = make_generator();
    GeneratorModel t = g.clone();
    CHECK(g.parameter_hash() == t.parameter_hash());
    Tensor z = sample_latent(1, 5)[0];
    auto [img_s, fs] = g.synthesize(g.map_latent(z));
    auto [img_t, ft] = t.synthesize(t.map_latent(z));
    bool same = true;
    for (std::int64_t i = 0; i < img_s.numel(); ++i) same = same && img_s[i] == img_t[i];
    CHECK(same);

    // clones are independent parameter stores
    nn::ParamList pt = t.named_parameters();
    pt[0].second->value[0] += 1.0;
    CHECK(g.parameter_hash() != t.parameter_hash());
}

TEST_CASE("losses are differentiable in parameters and style codes") {
    GeneratorModel g = make_generator();
    Var zb = constant(reshape(sample_latent(1, 9)[0], {1, 64}));
    Var w = g.map_batch(zb);
    std::vector<Var> styles;
    for (int l = 0; l < g.config().style_layers(); ++l) styles.push_back(scale(w, 1.0));
    auto so = g.synth_batch(styles);
    Var loss = mean_all(square(so.image));
    GradMap grads = backward(loss);
    int with_grad = 0;
    for (const auto& [name, p] : g.named_parameters()) {
        const Var& gp = grad_of(grads, p);
        if (!gp) continue;
        ++with_grad;
        CHECK(gp->value.all_finite());
    }
    CHECK(with_grad == static_cast<int>(g.named_parameters().size()));
    for (const auto& s : styles) {
        const Var& gs = grad_of(grads, s);
        REQUIRE(gs);
        CHECK(gs->value.all_finite());
    }
}
