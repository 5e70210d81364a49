#include "rssa/compression.hpp"

#include <algorithm>
#include <cmath>

namespace rssa {

using namespace rssa::ag;

void ModulationSchedule::validate() const {
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        RSSA_CHECK(alpha[i] >= 0.0 && alpha[i] <= 1.0, "modulation coefficients must lie in [0,1]");
        if (i > 0) RSSA_CHECK(alpha[i] >= alpha[i - 1], "modulation schedule must be nondecreasing");
    }
}

Tensor mean_style_code(const GeneratorModel& g_s, int samples, std::uint64_t seed) {
    RSSA_CHECK(samples >= 1, "mean_style_code needs samples >= 1");
    NoGradGuard ng;
    const auto& cfg = g_s.config();
    RandomStream rng(hash_combine(seed, 0x3ea9ULL));
    Tensor acc({cfg.style_dim});
    const int chunk = 256;
    int done = 0;
    while (done < samples) {
        const int b = std::min(chunk, samples - done);
        Tensor z = rng.normal_tensor({b, cfg.latent_dim});
        Var w = g_s.map_batch(constant(z));
        Tensor rowsum = sum_to(w->value, {1, cfg.style_dim});
        for (int i = 0; i < cfg.style_dim; ++i) acc[i] += rowsum[i];
        done += b;
    }
    for (int i = 0; i < cfg.style_dim; ++i) acc[i] /= static_cast<double>(samples);
    return acc;
}

namespace {

Var downsample4(const Var& img) { return avg_pool2(avg_pool2(img)); }

double inversion_objective_and_grads(const GeneratorModel& g, const std::vector<Var>& styles, const Tensor& target,
                                     GradMap* grads_out) {
    const int c = target.size(0), h = target.size(1), w = target.size(2);
    Var tgt = constant(reshape(target, {1, c, h, w}));
    auto so = g.synth_batch(styles);
    Var diff = sub(so.image, tgt);
    Var pixel = mean_all(square(diff));
    Var low = mean_all(square(sub(downsample4(so.image), downsample4(tgt))));
    Var loss = add(pixel, low);
    if (grads_out) *grads_out = backward(loss);
    return scalar(loss);
}

}  // namespace

InvertedCodeSet invert_images(const GeneratorModel& g_s, const std::vector<Tensor>& images,
                              const InvertOptions& opts) {
    RSSA_CHECK(!images.empty(), "invert_images needs at least one image");
    RSSA_CHECK(opts.steps >= 1, "invert_images needs steps >= 1");
    const auto& cfg = g_s.config();
    for (const auto& img : images)
        RSSA_CHECK(img.rank() == 3 && img.size(1) == cfg.resolution && img.size(2) == cfg.resolution,
                   "invert_images: image resolution mismatch");

    Tensor init_code = opts.init ? Tensor() : mean_style_code(g_s, opts.init_samples, opts.seed);
    const int layers = cfg.style_layers();

    InvertedCodeSet out;
    for (const auto& img : images) {
        // one trainable code per layer
        std::vector<Var> styles;
        nn::ParamList params;
        for (int l = 0; l < layers; ++l) {
            Tensor c0 = opts.init ? reshape(opts.init->codes[l], {1, cfg.style_dim})
                                  : reshape(init_code, {1, cfg.style_dim});
            Var v = param(c0);
            styles.push_back(v);
            params.emplace_back("code.layer" + std::to_string(l), v);
        }
        nn::Adam adam({opts.lr, 0.9, 0.999, 1e-8});

        double initial = -1.0, best = -1.0;
        std::vector<StyleCodeStack> snapshot(1);
        StyleCodeStack best_stack;
        std::vector<double> trace;
        for (int step = 0; step < opts.steps; ++step) {
            GradMap grads;
            const double loss = inversion_objective_and_grads(g_s, styles, img, &grads);
            if (step == 0) initial = loss;
            if (best < 0 || loss < best) {
                best = loss;
                best_stack.codes.clear();
                for (const auto& s : styles) best_stack.codes.push_back(reshape(s->value, {cfg.style_dim}));
            }
            if (step % opts.record_every == 0) trace.push_back(best);
            adam.step(params, grads);
        }
        {
            NoGradGuard ng;
            const double final_loss = inversion_objective_and_grads(g_s, styles, img, nullptr);
            if (final_loss < best) {
                best = final_loss;
                best_stack.codes.clear();
                for (const auto& s : styles) best_stack.codes.push_back(reshape(s->value, {cfg.style_dim}));
            }
        }
        trace.push_back(best);
        out.codes.push_back(std::move(best_stack));
        out.final_error.push_back(best);
        out.error_trace.push_back(std::move(trace));
        out.diverged.push_back(best > initial);
    }
    return out;
}

SubspaceBasis build_subspace(const InvertedCodeSet& codes, double lambda) {
    RSSA_CHECK(codes.images() >= 1, "build_subspace needs at least one inverted image");
    RSSA_CHECK(lambda >= 0.0, "lambda must be nonnegative");
    const int n = codes.images();
    const int layers = codes.codes[0].layers();
    const int d = codes.codes[0].codes[0].size(0);
    SubspaceBasis basis;
    basis.lambda = lambda;
    for (int l = 0; l < layers; ++l) {
        SubspaceLayer layer;
        layer.lambda = lambda;
        layer.a.resize(d, n);
        for (int i = 0; i < n; ++i) {
            const Tensor& w = codes.codes[i].codes[l];
            RSSA_CHECK(w.size(0) == d, "inverted code dim mismatch");
            RSSA_CHECK(w.all_finite(), "inverted code must be finite");
            for (int j = 0; j < d; ++j) layer.a(j, i) = w[j];
        }
        Eigen::MatrixXd gram = layer.a.transpose() * layer.a;
        gram.diagonal().array() += lambda;
        layer.factor = gram.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
        basis.layers.push_back(std::move(layer));
    }
    return basis;
}

Tensor project_code(const Tensor& w, const SubspaceLayer& layer, double alpha, ProjectionStats* stats) {
    RSSA_CHECK(w.rank() == 1, "project_code expects a vector");
    RSSA_CHECK(w.all_finite(), "project_code expects finite input");
    RSSA_CHECK(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0,1]");
    if (alpha == 0.0) return w;
    const int d = w.size(0);
    RSSA_CHECK(layer.a.rows() == d, "project_code dim mismatch");
    Eigen::VectorXd we(d);
    for (int i = 0; i < d; ++i) we(i) = w[i];
    Eigen::VectorXd proj = layer.project(we);
    const double wn = we.norm();
    const double pn = proj.norm();
    constexpr double kEps = 1e-8;
    if (pn <= kEps) {
        if (stats) stats->degenerate += 1;
        return w;
    }
    Eigen::VectorXd rescaled = proj * (wn / std::max(pn, kEps));
    Eigen::VectorXd blended = alpha * rescaled + (1.0 - alpha) * we;
    Tensor out({d});
    for (int i = 0; i < d; ++i) out[i] = blended(i);
    return out;
}

StyleCodeStack project_stack(const StyleCodeStack& styles, const SubspaceBasis& basis,
                             const ModulationSchedule& schedule, ProjectionStats* stats) {
    RSSA_CHECK(styles.layers() == basis.layer_count() && styles.layers() == schedule.layers(),
               "project_stack layer count mismatch");
    StyleCodeStack out;
    for (int l = 0; l < styles.layers(); ++l)
        out.codes.push_back(project_code(styles.codes[l], basis.layers[l], schedule.alpha[l], stats));
    return out;
}

ModulationSchedule reference_schedule() {
    ModulationSchedule s;
    s.alpha = {0.0, 0.0, 0.0, 0.1, 0.1, 0.1, 0.1, 0.3, 0.3, 0.7, 0.7, 0.9, 0.9, 0.9};
    return s;
}

ModulationSchedule resample_schedule(int layers) {
    RSSA_CHECK(layers >= 1, "schedule needs at least one layer");
    const ModulationSchedule ref = reference_schedule();
    const int n = ref.layers();
    ModulationSchedule out;
    for (int i = 1; i <= layers; ++i) {
        // midpoint of layer i's depth fraction, mapped onto the reference
        const double pos = (i - 0.5) * n / static_cast<double>(layers);
        const int j = std::min(n, std::max(1, static_cast<int>(std::ceil(pos))));
        out.alpha.push_back(ref.alpha[j - 1]);
    }
    out.validate();
    return out;
}

}  // namespace rssa
