#include "rssa/scs.hpp"

#include "rssa/checkpoint.hpp"

#include <cmath>

namespace rssa {

using namespace rssa::ag;

EdgeDetector EdgeDetector::sobel() {
    EdgeDetector d;
    d.name_ = "sobel";
    return d;
}

EdgeDetector EdgeDetector::external(const std::filesystem::path& model_file) {
    EdgeDetector d;
    d.name_ = "external:" + model_file.string();
    d.external_ = true;
    Archive a = Archive::load(model_file);
    if (!a.meta.contains("kind") || a.meta["kind"] != "edge_detector")
        throw CheckpointError("not an edge detector archive: " + model_file.string());
    const int layers = a.meta.value("layers", 0);
    if (layers < 1) throw CheckpointError("edge detector archive has no layers");
    for (int l = 0; l < layers; ++l) {
        d.weights_.push_back(a.get("edge.conv" + std::to_string(l) + ".weight"));
        d.biases_.push_back(a.get("edge.conv" + std::to_string(l) + ".bias"));
    }
    if (d.weights_.back().size(0) != 1) throw CheckpointError("edge detector must end in a single channel");
    return d;
}

EdgeDetector EdgeDetector::parse(const std::string& spec) {
    if (spec == "sobel") return sobel();
    if (spec.rfind("external:", 0) == 0) return external(spec.substr(9));
    throw std::invalid_argument("unknown edge detector spec: " + spec);
}

namespace {

// [-1,1] RGB to [0,1] luma
Tensor to_luma(const Tensor& image) {
    RSSA_CHECK(image.rank() == 3 && image.size(0) == 3, "edge_map expects a [3,H,W] image");
    const int h = image.size(1), w = image.size(2);
    Tensor luma({h, w});
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const double rr = (image.at(0, 0, r, c) + 1.0) / 2.0;
            const double gg = (image.at(0, 1, r, c) + 1.0) / 2.0;
            const double bb = (image.at(0, 2, r, c) + 1.0) / 2.0;
            luma.at(0, 0, r, c) = 0.299 * rr + 0.587 * gg + 0.114 * bb;
        }
    return luma;
}

// 3x3 Sobel with replicate borders, normalized by the per-image max.
EdgeMap sobel_map(const Tensor& image) {
    Tensor luma = to_luma(image);
    const int h = luma.size(0), w = luma.size(1);
    auto px = [&](int r, int c) {
        r = std::min(std::max(r, 0), h - 1);
        c = std::min(std::max(c, 0), w - 1);
        return luma.at(0, 0, r, c);
    };
    EdgeMap mag({h, w});
    double maxv = 0.0;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const double gx = (px(r - 1, c + 1) + 2 * px(r, c + 1) + px(r + 1, c + 1)) -
                              (px(r - 1, c - 1) + 2 * px(r, c - 1) + px(r + 1, c - 1));
            const double gy = (px(r + 1, c - 1) + 2 * px(r + 1, c) + px(r + 1, c + 1)) -
                              (px(r - 1, c - 1) + 2 * px(r - 1, c) + px(r - 1, c + 1));
            const double m = std::sqrt(gx * gx + gy * gy);
            mag.at(0, 0, r, c) = m;
            maxv = std::max(maxv, m);
        }
    const double denom = std::max(maxv, 1e-8);
    for (std::int64_t i = 0; i < mag.numel(); ++i) mag[i] = std::min(1.0, std::max(0.0, mag[i] / denom));
    return mag;
}

}  // namespace

EdgeMap EdgeDetector::apply(const Tensor& image) const {
    if (!external_) return sobel_map(image);
    NoGradGuard ng;
    const int h = image.size(1), w = image.size(2);
    Var x = constant(reshape(image, {1, image.size(0), h, w}));
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        x = add(conv2d(x, constant(weights_[l]), weights_[l].size(2) / 2),
                constant(reshape(biases_[l], {1, biases_[l].size(0), 1, 1})));
        if (l + 1 < weights_.size()) x = lrelu(x, 0.2);
    }
    x = sigmoid_(x);
    Tensor out = reshape(x->value, {h, w});
    for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = std::min(1.0, std::max(0.0, out[i]));
    return out;
}

EdgeMap edge_map(const Tensor& image, const EdgeDetector& detector) { return detector.apply(image); }

double dice(const EdgeMap& a, const EdgeMap& b) {
    RSSA_CHECK(a.same_shape(b), "dice shape mismatch");
    const double inner = dot_all(a, b);
    const double na = dot_all(a, a);
    const double nb = dot_all(b, b);
    if (na == 0.0 && nb == 0.0) return 1.0;  // both structureless: identical
    return 2.0 * inner / (na + nb);
}

ScsReport scs_score(const GeneratorModel& g_s, const GeneratorModel& g_t, int samples, std::uint64_t seed,
                    const EdgeDetector& detector, const ProjectionContext* projection) {
    RSSA_CHECK(samples >= 1, "scs_score needs samples >= 1");
    ScsReport report;
    report.samples = samples;
    report.detector = detector.name();
    report.seed = seed;
    report.projection = projection != nullptr;
    std::vector<Tensor> latents = sample_latent(samples, seed, g_s.config().latent_dim);
    double acc = 0.0;
    for (const Tensor& z : latents) {
        // shared data path: source mapping drives both generators
        StyleCodeStack styles = g_s.map_latent(z);
        if (projection) styles = project_stack(styles, projection->basis, projection->schedule);
        auto [img_s, feats_s] = g_s.synthesize(styles);
        auto [img_t, feats_t] = g_t.synthesize(styles);
        const double score = dice(detector.apply(img_s), detector.apply(img_t));
        report.scores.push_back(score);
        acc += score;
    }
    report.mean = acc / static_cast<double>(samples);
    return report;
}

}  // namespace rssa
