#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rssa/compression.hpp"

#include <cmath>

using namespace rssa;

namespace {

GeneratorModel make_generator(std::uint64_t seed = 3) {
    ModelConfig cfg;
    RandomStream rng(seed);
    return GeneratorModel(cfg, rng);
}

InvertedCodeSet codes_from_columns(const std::vector<Tensor>& cols, int layers = 1) {
    InvertedCodeSet set;
    for (const auto& c : cols) {
        StyleCodeStack stack;
        for (int l = 0; l < layers; ++l) stack.codes.push_back(c);
        set.codes.push_back(std::move(stack));
        set.final_error.push_back(0.0);
        set.diverged.push_back(false);
    }
    return set;
}

double norm(const Tensor& v) {
    double s = 0;
    for (std::int64_t i = 0; i < v.numel(); ++i) s += v[i] * v[i];
    return std::sqrt(s);
}

double dist(const Tensor& a, const Tensor& b) {
    double s = 0;
    for (std::int64_t i = 0; i < a.numel(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

double pixel_mse(const Tensor& a, const Tensor& b) {
    double s = 0;
    for (std::int64_t i = 0; i < a.numel(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s / static_cast<double>(a.numel());
}

}  // namespace

TEST_CASE("rank-1 subspace gives the outer-product projector") {
    Tensor e({3}, {1.0, 0.0, 0.0});
    SubspaceBasis basis = build_subspace(codes_from_columns({e}), 0.0);
    REQUIRE(basis.layer_count() == 1);
    Tensor w({3}, {0.4, -1.2, 2.0});
    Tensor proj = project_code(w, basis.layers[0], 1.0);
    // projection of w onto span{e1} is (0.4,0,0); rescaled to ||w||
    const double wn = norm(w);
    CHECK(proj[0] == doctest::Approx(wn).epsilon(1e-9));
    CHECK(proj[1] == doctest::Approx(0.0));
    CHECK(proj[2] == doctest::Approx(0.0));
}

TEST_CASE("duplicate columns behave like a single column") {
    RandomStream rng(5);
    Tensor a = rng.normal_tensor({16});
    SubspaceBasis one = build_subspace(codes_from_columns({a}), 1e-6);
    SubspaceBasis dup = build_subspace(codes_from_columns({a, a}), 1e-6);
    Tensor w = rng.normal_tensor({16});
    Tensor p1 = project_code(w, one.layers[0], 1.0);
    Tensor p2 = project_code(w, dup.layers[0], 1.0);
    for (int i = 0; i < 16; ++i) CHECK(std::fabs(p1[i] - p2[i]) < 1e-4);
}

TEST_CASE("normal-equations projector is symmetric") {
    RandomStream rng(7);
    std::vector<Tensor> cols;
    for (int i = 0; i < 3; ++i) cols.push_back(rng.normal_tensor({8}));
    SubspaceBasis basis = build_subspace(codes_from_columns(cols), 1e-6);
    const auto& l = basis.layers[0];
    Eigen::MatrixXd p = l.a * l.factor * l.a.transpose();
    CHECK((p - p.transpose()).cwiseAbs().maxCoeff() < 1e-8);
    // near idempotent at tiny lambda with full column rank
    CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-4);
    SubspaceBasis exact = build_subspace(codes_from_columns(cols), 0.0);
    Eigen::MatrixXd p0 = exact.layers[0].a * exact.layers[0].factor * exact.layers[0].a.transpose();
    CHECK((p0 * p0 - p0).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("projection hand oracle in the plane") {
    Tensor e1({2}, {1.0, 0.0});
    SubspaceBasis basis = build_subspace(codes_from_columns({e1}), 0.0);
    Tensor w({2}, {1.0, 1.0});
    Tensor out = project_code(w, basis.layers[0], 0.5);
    // projection (1,0), rescaled to norm sqrt(2), blended: (0.5*sqrt(2)+0.5, 0.5)
    CHECK(std::fabs(out[0] - 1.2071) < 1e-4);
    CHECK(std::fabs(out[1] - 0.5) < 1e-4);
}

TEST_CASE("projection edge behaviors") {
    RandomStream rng(11);
    std::vector<Tensor> cols{rng.normal_tensor({8}), rng.normal_tensor({8})};
    SubspaceBasis basis = build_subspace(codes_from_columns(cols), 1e-6);
    Tensor w = rng.normal_tensor({8});

    // alpha = 0 returns the input bit-exactly
    Tensor zero = project_code(w, basis.layers[0], 0.0);
    for (int i = 0; i < 8; ++i) CHECK(zero[i] == w[i]);

    // in-span input is a fixed point at alpha = 1
    Tensor in_span({8});
    for (int i = 0; i < 8; ++i) in_span[i] = 0.7 * cols[0][i] - 1.3 * cols[1][i];
    Tensor fixed = project_code(in_span, basis.layers[0], 1.0);
    for (int i = 0; i < 8; ++i) CHECK(std::fabs(fixed[i] - in_span[i]) < 1e-6);

    // degenerate projection: orthogonal complement input returns unchanged
    Tensor e1({3}, {1.0, 0.0, 0.0});
    SubspaceBasis small = build_subspace(codes_from_columns({e1}), 0.0);
    Tensor ortho({3}, {0.0, 1.0, 0.0});
    ProjectionStats stats;
    Tensor same = project_code(ortho, small.layers[0], 1.0, &stats);
    CHECK(stats.degenerate == 1);
    for (int i = 0; i < 3; ++i) CHECK(same[i] == ortho[i]);

    CHECK_THROWS_AS(project_code(w, basis.layers[0], 1.5), std::invalid_argument);
}

TEST_CASE("projection invariants: idempotence, norm, convexity, attraction, regularization") {
    RandomStream rng(13);
    std::vector<Tensor> cols{rng.normal_tensor({12}), rng.normal_tensor({12}), rng.normal_tensor({12})};
    SubspaceBasis basis = build_subspace(codes_from_columns(cols), 1e-6);
    SubspaceBasis basis0 = build_subspace(codes_from_columns(cols), 0.0);
    const auto& layer = basis.layers[0];

    for (int trial = 0; trial < 20; ++trial) {
        Tensor w = rng.normal_tensor({12});

        Tensor once = project_code(w, layer, 1.0);
        Tensor twice = project_code(once, layer, 1.0);
        for (int i = 0; i < 12; ++i) CHECK(std::fabs(twice[i] - once[i]) < 1e-5);

        CHECK(std::fabs(norm(once) - norm(w)) < 1e-5);

        // blend convexity: distance to the rescaled projection shrinks linearly
        Tensor full = project_code(w, layer, 1.0);
        double prev_d = dist(w, full);
        double prev_res = -1;
        for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            Tensor mid = project_code(w, layer, alpha);
            const double d = dist(mid, full);
            CHECK(d <= prev_d + 1e-9);
            prev_d = d;
            Tensor expect({12});
            for (int i = 0; i < 12; ++i) expect[i] = (1 - alpha) * w[i] + alpha * full[i];
            for (int i = 0; i < 12; ++i) CHECK(std::fabs(mid[i] - expect[i]) < 1e-9);

            // residual distance to the column span is nonincreasing in alpha
            Eigen::VectorXd we(12);
            for (int i = 0; i < 12; ++i) we(i) = mid[i];
            Eigen::VectorXd res = we - basis0.layers[0].project(we);
            const double r = res.norm();
            if (prev_res >= 0) CHECK(r <= prev_res + 1e-9);
            prev_res = r;
        }

        // lambda transparency on a well-conditioned basis
        Tensor reg = project_code(w, layer, 1.0);
        Tensor exact = project_code(w, basis0.layers[0], 1.0);
        for (int i = 0; i < 12; ++i) CHECK(std::fabs(reg[i] - exact[i]) < 1e-4);
    }
}

TEST_CASE("modulation schedules") {
    ModulationSchedule ref = reference_schedule();
    REQUIRE(ref.layers() == 14);
    CHECK(ref.alpha[0] == 0.0);
    CHECK(ref.alpha[2] == 0.0);
    CHECK(ref.alpha[3] == 0.1);
    CHECK(ref.alpha[7] == 0.3);
    CHECK(ref.alpha[9] == 0.7);
    CHECK(ref.alpha[11] == 0.9);
    CHECK(ref.alpha[13] == 0.9);

    ModulationSchedule toy = resample_schedule(8);
    const std::vector<double> expect{0.0, 0.0, 0.1, 0.1, 0.3, 0.7, 0.9, 0.9};
    REQUIRE(toy.layers() == 8);
    for (int i = 0; i < 8; ++i) CHECK(toy.alpha[i] == doctest::Approx(expect[i]));

    ModulationSchedule same = resample_schedule(14);
    for (int i = 0; i < 14; ++i) CHECK(same.alpha[i] == ref.alpha[i]);

    ModulationSchedule bad;
    bad.alpha = {0.5, 0.1};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("project_stack applies the per-layer schedule") {
    RandomStream rng(17);
    GeneratorModel g = make_generator();
    const int layers = g.config().style_layers();
    std::vector<Tensor> cols{rng.normal_tensor({64}), rng.normal_tensor({64})};
    SubspaceBasis basis = build_subspace(codes_from_columns(cols, layers), 1e-6);

    StyleCodeStack styles = g.map_latent(sample_latent(1, 3)[0]);

    ModulationSchedule zeros;
    zeros.alpha.assign(layers, 0.0);
    StyleCodeStack unchanged = project_stack(styles, basis, zeros);
    for (int l = 0; l < layers; ++l)
        for (int i = 0; i < 64; ++i) CHECK(unchanged.codes[l][i] == styles.codes[l][i]);

    ModulationSchedule toy = resample_schedule(layers);
    StyleCodeStack blended = project_stack(styles, basis, toy);
    for (int l = 0; l < layers; ++l) {
        Tensor direct = project_code(styles.codes[l], basis.layers[l], toy.alpha[l]);
        for (int i = 0; i < 64; ++i) CHECK(blended.codes[l][i] == direct[i]);
    }
    // shallow layers have alpha 0 and stay identical
    for (int i = 0; i < 64; ++i) CHECK(blended.codes[0][i] == styles.codes[0][i]);

    ModulationSchedule wrong;
    wrong.alpha.assign(layers - 1, 0.0);
    CHECK_THROWS_AS(project_stack(styles, basis, wrong), std::invalid_argument);
}

TEST_CASE("inverting from the true code is immediately optimal") {
    GeneratorModel g = make_generator(23);
    Tensor z = sample_latent(1, 31)[0];
    StyleCodeStack truth = g.map_latent(z);
    auto [img, feats] = g.synthesize(truth);

    InvertOptions opts;
    opts.steps = 1;
    opts.init_samples = 8;
    opts.init = truth;
    InvertedCodeSet set = invert_images(g, {img}, opts);
    REQUIRE(set.images() == 1);
    CHECK(set.final_error[0] < 1e-6);
    CHECK_FALSE(set.diverged[0]);
}

TEST_CASE("self-inversion from the mean code reaches a small pixel error") {
    GeneratorModel g = make_generator(29);
    Tensor z = sample_latent(1, 37)[0];
    auto [target, tf] = g.synthesize(g.map_latent(z));

    InvertOptions opts;
    opts.steps = 500;
    opts.lr = 0.01;
    opts.init_samples = 2000;
    opts.seed = 7;
    InvertedCodeSet set = invert_images(g, {target}, opts);
    REQUIRE(set.images() == 1);

    auto [recon, rf] = g.synthesize(set.codes[0]);
    CHECK(pixel_mse(recon, target) < 1e-2);

    // best-so-far trace is nonincreasing
    const auto& trace = set.error_trace[0];
    REQUIRE(trace.size() > 2);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-15);
}
