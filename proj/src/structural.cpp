#include "rssa/structural.hpp"

#include <cmath>
#include <map>

namespace rssa {

using namespace rssa::ag;

int StructuralLossConfig::scc_global_max() const {
    return std::max(1, static_cast<int>(std::llround(output_resolution * scc_global_max_ratio)));
}

int StructuralLossConfig::scc_patch_size() const {
    return std::max(1, static_cast<int>(std::llround(output_resolution * scc_patch_ratio)));
}

int StructuralLossConfig::dcc_cap() const {
    return std::max(1, static_cast<int>(std::llround(output_resolution * dcc_cap_ratio)));
}

int StructuralLossConfig::dcc_delta(int width) const {
    return std::max(1, static_cast<int>(std::llround(width * dcc_delta_ratio)));
}

void StructuralLossConfig::validate() const {
    RSSA_CHECK(alpha >= 0 && beta >= 0, "structural loss weights must be nonnegative");
    RSSA_CHECK(smooth_l1_transition > 0, "smooth_l1_transition must be positive");
    RSSA_CHECK(scc_pool_factor == 2, "only 2x pooling is supported");
    RSSA_CHECK(output_resolution >= 4, "output_resolution too small");
}

std::vector<Tensor> DisturbanceBatch::all() const {
    std::vector<Tensor> out;
    out.push_back(anchor);
    for (const auto& n : neighbors) out.push_back(n);
    return out;
}

Var normalize_columns(const Var& f, double eps) {
    RSSA_CHECK(f->value.rank() == 2, "normalize_columns expects [C,P]");
    const int p = f->shape()[1];
    Var norms = sqrt_(sum_to(square(f), {1, p}));
    return div(f, clamp_min(norms, eps));
}

Var flatten_map(const Var& fmap) {
    RSSA_CHECK(fmap->value.rank() == 3, "flatten_map expects [C,H,W]");
    const auto& s = fmap->shape();
    return reshape(fmap, {s[0], s[1] * s[2]});
}

Var self_correlation_v(const Var& fmap, double eps) {
    Var u = normalize_columns(flatten_map(fmap), eps);
    return matmul(transpose(u), u);
}

namespace {

Var pool_map(const Var& fmap) {
    const auto& s = fmap->shape();
    Var x = reshape(fmap, {1, s[0], s[1], s[2]});
    x = avg_pool2(x);
    const auto& t = x->shape();
    return reshape(x, {t[1], t[2], t[3]});
}

Var patch_of(const Var& fmap, int r0, int c0, int size) {
    const auto& s = fmap->shape();
    return slice(fmap, {0, r0, c0}, {s[0], size, size});
}

}  // namespace

Var scc_map_loss_v(const Var& src, const Var& tgt, const StructuralLossConfig& cfg) {
    RSSA_CHECK(src->shape() == tgt->shape(), "scc feature map shape mismatch");
    const auto& s = src->shape();
    const int width = std::max(s[1], s[2]);
    auto pair_loss = [&](const Var& a, const Var& b) {
        Var d = sub(self_correlation_v(b, cfg.cosine_eps), self_correlation_v(a, cfg.cosine_eps));
        return sum_all(huber(d, cfg.smooth_l1_transition));
    };
    if (width <= cfg.scc_global_max()) return pair_loss(src, tgt);

    Var ps = pool_map(src);
    Var pt = pool_map(tgt);
    const auto& q = ps->shape();
    const int patch = cfg.scc_patch_size();
    RSSA_CHECK(q[1] % patch == 0 && q[2] % patch == 0,
               "pooled feature map not divisible into correlation patches; configure compatible sizes");
    Var total;
    for (int r = 0; r < q[1]; r += patch)
        for (int c = 0; c < q[2]; c += patch) {
            Var l = pair_loss(patch_of(ps, r, c, patch), patch_of(pt, r, c, patch));
            total = total ? add(total, l) : l;
        }
    return total;
}

Var scc_loss_v(const std::vector<std::vector<Var>>& src_stacks, const std::vector<std::vector<Var>>& tgt_stacks,
               const StructuralLossConfig& cfg) {
    RSSA_CHECK(!src_stacks.empty() && src_stacks.size() == tgt_stacks.size(), "scc batch size mismatch");
    Var total;
    for (std::size_t b = 0; b < src_stacks.size(); ++b) {
        RSSA_CHECK(src_stacks[b].size() == tgt_stacks[b].size(), "scc stack layer count mismatch");
        for (std::size_t l = 0; l < src_stacks[b].size(); ++l) {
            Var v = scc_map_loss_v(src_stacks[b][l], tgt_stacks[b][l], cfg);
            total = total ? add(total, v) : v;
        }
    }
    return scale(total, 1.0 / static_cast<double>(src_stacks.size()));
}

const Tensor& window_mask(int h, int w, int delta) {
    static std::map<std::tuple<int, int, int>, Tensor> cache;
    auto key = std::make_tuple(h, w, delta);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const int p = h * w;
    Tensor mask({p, p});
    const double half = delta / 2.0;
    for (int r0 = 0; r0 < h; ++r0)
        for (int c0 = 0; c0 < w; ++c0)
            for (int r1 = 0; r1 < h; ++r1)
                for (int c1 = 0; c1 < w; ++c1) {
                    const bool in = std::abs(r1 - r0) < half && std::abs(c1 - c0) < half;
                    mask[(std::int64_t)(r0 * w + c0) * p + r1 * w + c1] = in ? 1.0 : 0.0;
                }
    return cache.emplace(key, std::move(mask)).first->second;
}

namespace {

bool window_is_singleton(int delta) { return delta <= 2; }  // |offset| < delta/2 admits only 0

Var mutual_field_v(const Var& u_j, const Var& u_k, const Tensor& mask) {
    Var s = matmul(transpose(u_j), u_k);
    return masked_row_softmax(s, mask);
}

}  // namespace

Var dcc_loss_v(const std::vector<std::vector<Var>>& src_stacks, const std::vector<std::vector<Var>>& tgt_stacks,
               const StructuralLossConfig& cfg) {
    RSSA_CHECK(src_stacks.size() == tgt_stacks.size(), "dcc batch size mismatch");
    const int batch = static_cast<int>(src_stacks.size());
    RSSA_CHECK(batch >= 1, "dcc needs a nonempty batch");
    const std::size_t layers = src_stacks[0].size();
    Var total;
    for (std::size_t l = 0; l < layers; ++l) {
        const auto& shape = src_stacks[0][l]->shape();
        const int h = shape[1], w = shape[2];
        if (std::max(h, w) > cfg.dcc_cap()) continue;
        const int delta = cfg.dcc_delta(w);
        if (window_is_singleton(delta)) continue;  // field is identically one-hot, zero contribution
        const Tensor& mask = window_mask(h, w, delta);

        std::vector<Var> us, ut;
        for (int b = 0; b < batch; ++b) {
            RSSA_CHECK(src_stacks[b][l]->shape() == shape && tgt_stacks[b][l]->shape() == shape,
                       "dcc layer shape mismatch");
            us.push_back(normalize_columns(flatten_map(src_stacks[b][l]), cfg.cosine_eps));
            ut.push_back(normalize_columns(flatten_map(tgt_stacks[b][l]), cfg.cosine_eps));
        }
        for (int j = 0; j < batch; ++j) {
            for (int k = j + 1; k < batch; ++k) {
                if (cfg.dcc_anchor_only && j != 0) continue;
                Var ss = matmul(transpose(us[j]), us[k]);
                Var st = matmul(transpose(ut[j]), ut[k]);
                // ordered pair (j,k)
                Var diff_jk = sub(masked_row_softmax(st, mask), masked_row_softmax(ss, mask));
                Var l_jk = sum_all(abs_(diff_jk));
                // ordered pair (k,j): logits are the transposed similarity matrices
                Var diff_kj = sub(masked_row_softmax(transpose(st), mask), masked_row_softmax(transpose(ss), mask));
                Var l_kj = sum_all(abs_(diff_kj));
                Var both = add(l_jk, l_kj);
                total = total ? add(total, both) : both;
            }
        }
    }
    if (!total) return constant(Tensor::zeros({1}));
    return total;
}

SelfCorrelationMatrix self_correlation(const Tensor& fmap) {
    RSSA_CHECK(fmap.rank() == 3, "self_correlation expects [C,H,W]");
    RSSA_CHECK(fmap.all_finite(), "self_correlation expects finite features");
    NoGradGuard ng;
    StructuralLossConfig cfg;
    SelfCorrelationMatrix out;
    out.h = fmap.size(1);
    out.w = fmap.size(2);
    out.m = self_correlation_v(constant(fmap), cfg.cosine_eps)->value;
    return out;
}

std::vector<SelfCorrelationMatrix> local_self_correlation(const Tensor& fmap, const StructuralLossConfig& cfg) {
    RSSA_CHECK(fmap.rank() == 3, "local_self_correlation expects [C,H,W]");
    NoGradGuard ng;
    const int width = std::max(fmap.size(1), fmap.size(2));
    if (width <= cfg.scc_global_max()) return {self_correlation(fmap)};
    Var pooled = pool_map(constant(fmap));
    const auto& q = pooled->shape();
    const int patch = cfg.scc_patch_size();
    RSSA_CHECK(q[1] % patch == 0 && q[2] % patch == 0,
               "pooled feature map not divisible into correlation patches; configure compatible sizes");
    std::vector<SelfCorrelationMatrix> out;
    for (int r = 0; r < q[1]; r += patch)
        for (int c = 0; c < q[2]; c += patch) {
            SelfCorrelationMatrix scm;
            scm.h = patch;
            scm.w = patch;
            scm.m = self_correlation_v(patch_of(pooled, r, c, patch), cfg.cosine_eps)->value;
            out.push_back(std::move(scm));
        }
    return out;
}

double scc_loss(const FeatureMapStack& source, const FeatureMapStack& target, const StructuralLossConfig& cfg) {
    RSSA_CHECK(source.layers() == target.layers(), "scc stack layer count mismatch");
    NoGradGuard ng;
    std::vector<std::vector<Var>> s(1), t(1);
    for (int l = 0; l < source.layers(); ++l) {
        s[0].push_back(constant(source.maps[l]));
        t[0].push_back(constant(target.maps[l]));
    }
    return scalar(scc_loss_v(s, t, cfg));
}

DisturbanceBatch sample_disturbance(const Tensor& z, double r, int n, std::uint64_t seed) {
    RSSA_CHECK(z.rank() == 1, "sample_disturbance expects a vector latent");
    RSSA_CHECK(r > 0, "disturbance radius must be positive");
    RSSA_CHECK(n >= 1, "disturbance sample count must be >= 1");
    DisturbanceBatch batch;
    batch.anchor = z;
    batch.radius = r;
    RandomStream rng(hash_combine(seed, 0xd157ULL));
    const int d = z.size(0);
    for (int i = 0; i < n; ++i) {
        Tensor eps = rng.ball(d, r);
        batch.neighbors.push_back(add(z, eps));
    }
    return batch;
}

MutualCorrelationField mutual_correlation(const Tensor& fj, const Tensor& fk, int delta) {
    RSSA_CHECK(fj.rank() == 3 && fj.same_shape(fk), "mutual_correlation shape mismatch");
    RSSA_CHECK(delta >= 1, "mutual_correlation window width must be >= 1");
    NoGradGuard ng;
    StructuralLossConfig cfg;
    MutualCorrelationField out;
    out.h = fj.size(1);
    out.w = fj.size(2);
    out.delta = delta;
    out.mask = window_mask(out.h, out.w, delta);
    Var uj = normalize_columns(flatten_map(constant(fj)), cfg.cosine_eps);
    Var uk = normalize_columns(flatten_map(constant(fk)), cfg.cosine_eps);
    out.probs = mutual_field_v(uj, uk, out.mask)->value;
    return out;
}

double dcc_loss(const std::vector<FeatureMapStack>& source, const std::vector<FeatureMapStack>& target,
                const StructuralLossConfig& cfg) {
    RSSA_CHECK(source.size() == target.size() && !source.empty(), "dcc list length mismatch");
    NoGradGuard ng;
    std::vector<std::vector<Var>> s(source.size()), t(target.size());
    for (std::size_t b = 0; b < source.size(); ++b) {
        RSSA_CHECK(source[b].layers() == target[b].layers(), "dcc stack layer count mismatch");
        for (int l = 0; l < source[b].layers(); ++l) {
            s[b].push_back(constant(source[b].maps[l]));
            t[b].push_back(constant(target[b].maps[l]));
        }
    }
    return scalar(dcc_loss_v(s, t, cfg));
}

StructuralParts structural_loss(const std::vector<FeatureMapStack>& source, const std::vector<FeatureMapStack>& target,
                                const StructuralLossConfig& cfg) {
    StructuralParts parts;
    NoGradGuard ng;
    std::vector<std::vector<Var>> s(source.size()), t(target.size());
    RSSA_CHECK(source.size() == target.size() && !source.empty(), "structural loss batch mismatch");
    for (std::size_t b = 0; b < source.size(); ++b)
        for (int l = 0; l < source[b].layers(); ++l) {
            s[b].push_back(constant(source[b].maps[l]));
            t[b].push_back(constant(target[b].maps[l]));
        }
    parts.scc = scalar(scc_loss_v(s, t, cfg));
    parts.dcc = scalar(dcc_loss_v(s, t, cfg));
    return parts;
}

}  // namespace rssa
