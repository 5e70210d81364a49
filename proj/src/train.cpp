#include "rssa/train.hpp"

#include "rssa/image_io.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

namespace rssa {

using namespace rssa::ag;
using nlohmann::ordered_json;

MetricsWriter::MetricsWriter(const std::filesystem::path& path, bool append) : path_(path) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    if (!append) std::ofstream clear(path_, std::ios::trunc);
}

void MetricsWriter::write(const ordered_json& record) {
    std::ofstream os(path_, std::ios::app);
    if (!os) throw std::runtime_error("cannot append metrics: " + path_.string());
    os << record.dump() << "\n";
}

std::vector<ordered_json> read_metrics(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read metrics: " + path.string());
    std::vector<ordered_json> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        out.push_back(ordered_json::parse(line));
    }
    return out;
}

ordered_json model_meta(const ModelConfig& cfg) {
    ordered_json j;
    j["latent_dim"] = cfg.latent_dim;
    j["style_dim"] = cfg.style_dim;
    j["resolution"] = cfg.resolution;
    j["img_channels"] = cfg.img_channels;
    j["base_resolution"] = cfg.base_resolution;
    j["stage_channels"] = cfg.stage_channels;
    j["lrelu_slope"] = cfg.lrelu_slope;
    return j;
}

ModelConfig model_config_from_meta(const ordered_json& meta) {
    ModelConfig cfg;
    cfg.latent_dim = meta.at("latent_dim").get<int>();
    cfg.style_dim = meta.at("style_dim").get<int>();
    cfg.resolution = meta.at("resolution").get<int>();
    cfg.img_channels = meta.at("img_channels").get<int>();
    cfg.base_resolution = meta.at("base_resolution").get<int>();
    cfg.stage_channels = meta.at("stage_channels").get<std::vector<int>>();
    cfg.lrelu_slope = meta.at("lrelu_slope").get<double>();
    cfg.validate();
    return cfg;
}

void save_source_checkpoint(const std::filesystem::path& path, const SourceModel& m) {
    Archive a;
    a.meta["schema_version"] = kArchiveSchemaVersion;
    a.meta["kind"] = "source_model";
    a.meta["model"] = model_meta(m.g.config());
    a.meta["seed"] = m.seed;
    a.meta["iteration"] = m.iteration;
    a.put_params("generator.", m.g.named_parameters());
    a.put_params("disc.", m.d.named_parameters());
    a.save(path);
}

namespace {

std::pair<GeneratorModel, DiscriminatorModel> build_models(const ModelConfig& cfg, std::uint64_t init_seed) {
    RandomStream rng(hash_combine(init_seed, 0x1417ULL));
    GeneratorModel g(cfg, rng);
    DiscriminatorModel d(cfg, rng);
    return {std::move(g), std::move(d)};
}

void check_finite(double v, const std::string& what, int iter) {
    if (!std::isfinite(v))
        throw DivergenceError("numerical divergence: " + what + " is not finite at iteration " +
                              std::to_string(iter));
}

DisturbanceBatch sample_disturbance_stream(const Tensor& z, double r, int n, RandomStream& rng) {
    DisturbanceBatch batch;
    batch.anchor = z;
    batch.radius = r;
    for (int i = 0; i < n; ++i) batch.neighbors.push_back(add(z, rng.ball(z.size(0), r)));
    return batch;
}

double vector_norm(const Tensor& v) {
    double s = 0;
    for (std::int64_t i = 0; i < v.numel(); ++i) s += v[i] * v[i];
    return std::sqrt(s);
}

Tensor batch_images(const std::vector<Tensor>& images, const std::vector<int>& idx) {
    const int c = images[0].size(0), h = images[0].size(1), w = images[0].size(2);
    Tensor out({static_cast<int>(idx.size()), c, h, w});
    for (std::size_t b = 0; b < idx.size(); ++b) {
        const Tensor& img = images[static_cast<std::size_t>(idx[b])];
        std::copy(img.data(), img.data() + img.numel(), out.data() + static_cast<std::int64_t>(b) * img.numel());
    }
    return out;
}

Tensor slice_sample(const Tensor& batch, int b) {
    Tensor s = slice(batch, {b, 0, 0, 0}, {1, batch.size(1), batch.size(2), batch.size(3)});
    return reshape(s, {batch.size(1), batch.size(2), batch.size(3)});
}

// per-sample [C,H,W] views of batched per-layer features
std::vector<std::vector<Var>> split_stacks(const std::vector<Var>& feats, int batch) {
    std::vector<std::vector<Var>> out(static_cast<std::size_t>(batch));
    for (const Var& f : feats) {
        const auto& s = f->shape();
        for (int b = 0; b < batch; ++b) {
            Var v = reshape(slice(f, {b, 0, 0, 0}, {1, s[1], s[2], s[3]}), {s[1], s[2], s[3]});
            out[static_cast<std::size_t>(b)].push_back(v);
        }
    }
    return out;
}

struct AdaptState {
    GeneratorModel g_s, g_t;
    DiscriminatorModel d;
    nn::Adam adam_g{{}}, adam_d{{}};
    PathLengthState pl;
    RandomStream rng{0};
    int iteration = 0;
    std::int64_t degenerate = 0;
    std::optional<ProjectionContext> projection;
    InvertedCodeSet inverted;
    std::uint64_t source_hash = 0;
};

void save_adapt_checkpoint(const std::filesystem::path& path, const RunConfig& cfg, const AdaptState& st,
                           const std::vector<std::string>& target_files) {
    Archive a;
    a.meta["schema_version"] = kArchiveSchemaVersion;
    a.meta["kind"] = "adapted_model";
    a.meta["model"] = model_meta(st.g_t.config());
    a.meta["seed"] = cfg.seed;
    a.meta["iteration"] = st.iteration;
    a.meta["mode"] = cfg.mode;
    a.meta["pl_mean"] = st.pl.mean;
    a.meta["pl_initialized"] = st.pl.initialized;
    a.meta["rng_state"] = st.rng.serialize();
    a.meta["degenerate_projections"] = st.degenerate;
    a.meta["source_hash"] = st.source_hash;
    a.meta["target_files"] = target_files;
    a.put_params("generator_s.", st.g_s.named_parameters());
    a.put_params("generator_t.", st.g_t.named_parameters());
    a.put_params("disc.", st.d.named_parameters());
    a.put_adam("opt_g.", st.adam_g);
    a.put_adam("opt_d.", st.adam_d);
    if (st.projection) {
        a.meta["compression"] = ordered_json::object();
        a.meta["compression"]["lambda"] = cfg.subspace_lambda;
        a.meta["compression"]["schedule"] = st.projection->schedule.alpha;
        a.meta["compression"]["final_error"] = st.inverted.final_error;
        a.meta["compression"]["diverged"] = st.inverted.diverged;
        for (int i = 0; i < st.inverted.images(); ++i)
            for (int l = 0; l < st.inverted.codes[i].layers(); ++l)
                a.put("compression/code.img" + std::to_string(i) + ".layer" + std::to_string(l),
                      st.inverted.codes[i].codes[l]);
    }
    a.save(path);
}

std::optional<ProjectionContext> projection_from_archive(const Archive& a) {
    if (!a.meta.contains("compression")) return std::nullopt;
    const auto& cj = a.meta.at("compression");
    InvertedCodeSet codes;
    const std::vector<double> errors = cj.at("final_error").get<std::vector<double>>();
    const int n = static_cast<int>(errors.size());
    for (int i = 0; i < n; ++i) {
        StyleCodeStack stack;
        for (int l = 0;; ++l) {
            const std::string key = "compression/code.img" + std::to_string(i) + ".layer" + std::to_string(l);
            if (!a.has(key)) break;
            stack.codes.push_back(a.get(key));
        }
        codes.codes.push_back(std::move(stack));
        codes.final_error.push_back(errors[i]);
        codes.diverged.push_back(false);
    }
    ProjectionContext ctx;
    ctx.basis = build_subspace(codes, cj.at("lambda").get<double>());
    ctx.schedule.alpha = cj.at("schedule").get<std::vector<double>>();
    return ctx;
}

}  // namespace

SourceModel load_source_checkpoint(const std::filesystem::path& path) {
    Archive a = Archive::load(path);
    if (!a.meta.contains("kind") || a.meta["kind"] != "source_model")
        throw CheckpointError("not a source model checkpoint: " + path.string());
    ModelConfig cfg = model_config_from_meta(a.meta.at("model"));
    SourceModel m;
    auto [g, d] = build_models(cfg, 0);
    m.g = std::move(g);
    m.d = std::move(d);
    a.load_params("generator.", m.g.named_parameters());
    a.load_params("disc.", m.d.named_parameters());
    m.seed = a.meta.value("seed", 0ULL);
    m.iteration = a.meta.value("iteration", 0);
    return m;
}

AdaptedCheckpoint load_adapted_checkpoint(const std::filesystem::path& path) {
    Archive a = Archive::load(path);
    if (!a.meta.contains("kind") || a.meta["kind"] != "adapted_model")
        throw CheckpointError("not an adapted model checkpoint: " + path.string());
    ModelConfig cfg = model_config_from_meta(a.meta.at("model"));
    AdaptedCheckpoint out;
    auto [g1, d1] = build_models(cfg, 0);
    out.g_s = std::move(g1);
    out.d = std::move(d1);
    out.g_t = out.g_s.clone();
    a.load_params("generator_s.", out.g_s.named_parameters());
    a.load_params("generator_t.", out.g_t.named_parameters());
    a.load_params("disc.", out.d.named_parameters());
    out.projection = projection_from_archive(a);
    out.meta = a.meta;
    return out;
}

PretrainResult pretrain_source(const RunConfig& cfg, const std::filesystem::path& data_dir,
                               const std::filesystem::path& out_dir) {
    cfg.validate();
    TargetDataset corpus = TargetDataset::load(data_dir, cfg.model.resolution);
    if (corpus.size() < 2000)
        throw ConfigError("pretrain: source corpus must contain at least 2000 images, found " +
                          std::to_string(corpus.size()));
    std::filesystem::create_directories(out_dir);

    auto [g, d] = build_models(cfg.model, cfg.seed);
    nn::ParamList g_params = g.named_parameters();
    nn::ParamList d_params = d.named_parameters();
    nn::Adam adam_g({cfg.pretrain_g_lr, cfg.adam_beta1, cfg.adam_beta2, 1e-8});
    nn::Adam adam_d({cfg.pretrain_d_lr, cfg.adam_beta1, cfg.adam_beta2, 1e-8});
    PathLengthState pl;
    RandomStream rng(hash_combine(cfg.seed, 0x9e7ea1ULL));

    MetricsWriter metrics(out_dir / "pretrain_metrics.jsonl", false);
    const int batch = cfg.pretrain_batch;
    const int iters = cfg.pretrain_iters;
    const auto t0 = std::chrono::steady_clock::now();

    for (int iter = 0; iter < iters; ++iter) {
        Tensor z = rng.normal_tensor({batch, cfg.model.latent_dim});
        std::vector<int> idx(batch);
        for (int b = 0; b < batch; ++b) idx[b] = static_cast<int>(rng.uniform_int(corpus.size()));
        Tensor reals = batch_images(corpus.images, idx);

        // generator forward (graph kept for the G step)
        Var w = g.map_batch(constant(z));
        std::vector<Var> styles;
        for (int l = 0; l < cfg.model.style_layers(); ++l) styles.push_back(scale(w, 1.0));
        auto so = g.synth_batch(styles);

        // discriminator step
        Var d_loss = discriminator_adv_loss_v(d, constant(reals), detach(so.image), cfg.adv);
        double r1_val = 0.0;
        if (cfg.adv.r1_gamma > 0 && iter % cfg.adv.r1_interval == 0) {
            Var r1 = r1_penalty_v(d, reals, cfg.adv.r1_gamma);
            r1_val = scalar(r1);
            d_loss = add(d_loss, r1);
        }
        const double d_val = scalar(d_loss);
        check_finite(d_val, "discriminator loss", iter);
        {
            GradMap grads = backward(d_loss);
            adam_d.step(d_params, grads);
        }

        // generator step
        Var g_loss = generator_adv_loss_v(d, so.image, cfg.adv);
        const double g_adv_val = scalar(g_loss);
        double pl_val = 0.0;
        if (cfg.adv.pl_weight > 0 && iter % cfg.adv.pl_interval == 0) {
            Var pl_pen = path_length_penalty_v(so.image, styles, pl, cfg.adv.pl_decay, rng);
            pl_val = scalar(pl_pen);
            g_loss = add(g_loss, scale(pl_pen, cfg.adv.pl_weight));
        }
        check_finite(scalar(g_loss), "generator loss", iter);
        {
            GradMap grads = backward(g_loss);
            adam_g.step(g_params, grads);
        }

        if (iter % 20 == 0 || iter + 1 == iters) {
            const auto ms =
                std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
            ordered_json rec;
            rec["iter"] = iter;
            rec["g_adv"] = g_adv_val;
            rec["d_loss"] = d_val;
            rec["r1"] = r1_val;
            rec["pl"] = pl_val;
            rec["wall_ms"] = ms;
            metrics.write(rec);
        }
    }

    PretrainResult res;
    res.checkpoint = out_dir / "source.ckpt";
    res.metrics = metrics.path();
    res.iterations = iters;
    SourceModel m;
    m.g = std::move(g);
    m.d = std::move(d);
    m.seed = cfg.seed;
    m.iteration = iters;
    save_source_checkpoint(res.checkpoint, m);
    return res;
}

AdaptResult adapt(const RunConfig& cfg, const std::filesystem::path& source_ckpt,
                  const std::filesystem::path& target_dir, const std::filesystem::path& out_dir,
                  const std::optional<std::filesystem::path>& resume_from) {
    cfg.validate();
    TargetDataset targets = TargetDataset::load(target_dir, cfg.model.resolution);
    std::filesystem::create_directories(out_dir);

    const bool use_compression = cfg.rssa_mode() && cfg.compression;
    const bool use_structural = cfg.rssa_mode() && (cfg.structural.alpha > 0 || cfg.structural.beta > 0);

    AdaptState st;
    if (resume_from) {
        Archive a = Archive::load(*resume_from);
        if (!a.meta.contains("kind") || a.meta["kind"] != "adapted_model")
            throw CheckpointError("resume target is not an adapted model checkpoint");
        ModelConfig mc = model_config_from_meta(a.meta.at("model"));
        auto [g0, d0] = build_models(mc, 0);
        st.g_s = std::move(g0);
        st.d = std::move(d0);
        st.g_t = st.g_s.clone();
        a.load_params("generator_s.", st.g_s.named_parameters());
        a.load_params("generator_t.", st.g_t.named_parameters());
        a.load_params("disc.", st.d.named_parameters());
        st.adam_g = nn::Adam({cfg.g_lr, cfg.adam_beta1, cfg.adam_beta2, 1e-8});
        st.adam_d = nn::Adam({cfg.d_lr, cfg.adam_beta1, cfg.adam_beta2, 1e-8});
        a.load_adam("opt_g.", st.adam_g);
        a.load_adam("opt_d.", st.adam_d);
        st.pl.mean = a.meta.at("pl_mean").get<double>();
        st.pl.initialized = a.meta.at("pl_initialized").get<bool>();
        st.rng = RandomStream::deserialize(a.meta.at("rng_state").get<std::string>());
        st.iteration = a.meta.at("iteration").get<int>();
        st.degenerate = a.meta.at("degenerate_projections").get<std::int64_t>();
        st.source_hash = a.meta.at("source_hash").get<std::uint64_t>();
        st.projection = projection_from_archive(a);
        if (st.projection) st.inverted = InvertedCodeSet{};  // codes stay in the archive via save path below
        // re-read codes so later saves keep them
        if (st.projection) {
            const auto errs = a.meta.at("compression").at("final_error").get<std::vector<double>>();
            for (int i = 0; i < static_cast<int>(errs.size()); ++i) {
                StyleCodeStack stack;
                for (int l = 0;; ++l) {
                    const std::string key = "compression/code.img" + std::to_string(i) + ".layer" + std::to_string(l);
                    if (!a.has(key)) break;
                    stack.codes.push_back(a.get(key));
                }
                st.inverted.codes.push_back(std::move(stack));
                st.inverted.final_error.push_back(errs[i]);
                st.inverted.diverged.push_back(false);
            }
        }
    } else {
        SourceModel src = load_source_checkpoint(source_ckpt);
        st.g_s = std::move(src.g);
        st.g_t = st.g_s.clone();
        st.d = src.d.clone();
        st.adam_g = nn::Adam({cfg.g_lr, cfg.adam_beta1, cfg.adam_beta2, 1e-8});
        st.adam_d = nn::Adam({cfg.d_lr, cfg.adam_beta1, cfg.adam_beta2, 1e-8});
        st.rng = RandomStream(hash_combine(cfg.seed, 0xada77ULL));
        st.iteration = 0;
        st.source_hash = st.g_s.parameter_hash();
        if (use_compression) {
            InvertOptions opts;
            opts.steps = cfg.invert_steps;
            opts.lr = cfg.invert_lr;
            opts.init_samples = cfg.invert_init_samples;
            opts.seed = hash_combine(cfg.seed, 0x117e7ULL);
            st.inverted = invert_images(st.g_s, targets.images, opts);
            ProjectionContext ctx;
            ctx.basis = build_subspace(st.inverted, cfg.subspace_lambda);
            if (!cfg.schedule.empty())
                ctx.schedule.alpha = cfg.schedule;
            else
                ctx.schedule = resample_schedule(cfg.model.style_layers());
            st.projection = std::move(ctx);
        }
    }

    st.g_s.set_trainable(false);
    st.g_t.set_trainable(true);
    {
        // adaption trains the synthesis network; the mapping stays the shared
        // frozen copy so one projected stack drives both generators
        nn::ParamList all = st.g_t.named_parameters();
        for (auto& [name, p] : all)
            if (name.rfind("mapping.", 0) == 0) p->requires_grad = false;
    }
    nn::ParamList g_train = st.g_t.synthesis_parameters();
    nn::ParamList d_params = st.d.named_parameters();

    const int batch = cfg.effective_batch();
    const int iters = cfg.effective_iters();
    const int layers = cfg.model.style_layers();
    const EdgeDetector detector = EdgeDetector::parse(cfg.detector);

    MetricsWriter metrics(out_dir / "metrics.jsonl", /*append=*/resume_from.has_value());
    const auto t0 = std::chrono::steady_clock::now();
    const std::filesystem::path ckpt_path = out_dir / "adapted.ckpt";

    for (int iter = st.iteration; iter < iters; ++iter) {
        // latent batch: anchor plus ball neighbors (or independent anchors)
        Tensor anchor = st.rng.normal_tensor({cfg.model.latent_dim});
        std::vector<Tensor> rows{anchor};
        if (batch > 1) {
            if (cfg.batch_mode == "neighborhood") {
                const double radius = cfg.disturbance_r_ratio * vector_norm(anchor);
                DisturbanceBatch db = sample_disturbance_stream(anchor, radius, batch - 1, st.rng);
                for (auto& nb : db.neighbors) rows.push_back(std::move(nb));
            } else {
                for (int b = 1; b < batch; ++b) rows.push_back(st.rng.normal_tensor({cfg.model.latent_dim}));
            }
        }
        std::vector<int> idx(batch);
        for (int b = 0; b < batch; ++b) idx[b] = static_cast<int>(st.rng.uniform_int(targets.size()));

        // shared style stack from the frozen source mapping, optionally projected
        Tensor wvals;
        {
            NoGradGuard ng;
            wvals = st.g_s.map_batch(constant(stack_rows(rows)))->value;
        }
        std::vector<Tensor> layer_styles(static_cast<std::size_t>(layers), wvals);
        if (st.projection) {
            ProjectionStats stats;
            for (int l = 0; l < layers; ++l) {
                Tensor proj({batch, cfg.model.style_dim});
                for (int b = 0; b < batch; ++b) {
                    Tensor row = reshape(slice(wvals, {b, 0}, {1, cfg.model.style_dim}), {cfg.model.style_dim});
                    Tensor pr = project_code(row, st.projection->basis.layers[l], st.projection->schedule.alpha[l],
                                             &stats);
                    std::copy(pr.data(), pr.data() + pr.numel(),
                              proj.data() + static_cast<std::int64_t>(b) * cfg.model.style_dim);
                }
                layer_styles[static_cast<std::size_t>(l)] = std::move(proj);
            }
            st.degenerate += stats.degenerate;
        }

        // target generator forward (with graph); style leaves get gradients
        std::vector<Var> styles_t;
        for (int l = 0; l < layers; ++l) styles_t.push_back(param(layer_styles[static_cast<std::size_t>(l)]));
        auto so_t = st.g_t.synth_batch(styles_t);

        // frozen source forward
        std::vector<std::vector<Var>> src_stacks;
        if (use_structural) {
            NoGradGuard ng;
            std::vector<Var> styles_s;
            for (int l = 0; l < layers; ++l) styles_s.push_back(constant(layer_styles[static_cast<std::size_t>(l)]));
            auto so_s = st.g_s.synth_batch(styles_s);
            src_stacks = split_stacks(so_s.feats, batch);
        }

        Tensor reals = batch_images(targets.images, idx);

        // discriminator step
        Var d_loss = discriminator_adv_loss_v(st.d, constant(reals), detach(so_t.image), cfg.adv);
        double r1_val = 0.0;
        if (cfg.adv.r1_gamma > 0 && iter % cfg.adv.r1_interval == 0) {
            Var r1 = r1_penalty_v(st.d, reals, cfg.adv.r1_gamma);
            r1_val = scalar(r1);
            d_loss = add(d_loss, r1);
        }
        const double d_val = scalar(d_loss);
        check_finite(d_val, "discriminator loss", iter);
        {
            GradMap grads = backward(d_loss);
            st.adam_d.step(d_params, grads);
        }

        // generator step
        Var g_loss = generator_adv_loss_v(st.d, so_t.image, cfg.adv);
        const double g_adv_val = scalar(g_loss);
        double scc_val = 0.0, dcc_val = 0.0;
        if (use_structural) {
            std::vector<std::vector<Var>> tgt_stacks = split_stacks(so_t.feats, batch);
            if (cfg.structural.alpha > 0) {
                Var scc = scc_loss_v(src_stacks, tgt_stacks, cfg.structural);
                scc_val = scalar(scc);
                g_loss = add(g_loss, scale(scc, cfg.structural.alpha));
            }
            if (cfg.structural.beta > 0) {
                Var dcc = dcc_loss_v(src_stacks, tgt_stacks, cfg.structural);
                dcc_val = scalar(dcc);
                g_loss = add(g_loss, scale(dcc, cfg.structural.beta));
            }
        }
        double pl_val = 0.0;
        if (cfg.adv.pl_weight > 0 && iter % cfg.adv.pl_interval == 0) {
            Var pl_pen = path_length_penalty_v(so_t.image, styles_t, st.pl, cfg.adv.pl_decay, st.rng);
            pl_val = scalar(pl_pen);
            g_loss = add(g_loss, scale(pl_pen, cfg.adv.pl_weight));
        }
        check_finite(scalar(g_loss), "generator loss", iter);
        check_finite(scc_val + dcc_val, "structural loss", iter);
        {
            GradMap grads = backward(g_loss);
            st.adam_g.step(g_train, grads);
        }

        st.iteration = iter + 1;
        const auto ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
        ordered_json rec;
        rec["iter"] = iter;
        rec["g_adv"] = g_adv_val;
        rec["d_loss"] = d_val;
        rec["scc"] = scc_val;
        rec["dcc"] = dcc_val;
        rec["r1"] = r1_val;
        rec["pl"] = pl_val;
        rec["proj_degenerate"] = st.degenerate;
        rec["wall_ms"] = ms;
        metrics.write(rec);

        if (cfg.scs_snapshot_interval > 0 && st.iteration % cfg.scs_snapshot_interval == 0) {
            const ProjectionContext* proj =
                (cfg.projection_at_eval && st.projection) ? &*st.projection : nullptr;
            ScsReport snap = scs_score(st.g_s, st.g_t, cfg.scs_snapshot_samples,
                                       hash_combine(cfg.seed, 0x5c50000ULL + st.iteration), detector, proj);
            ordered_json sj;
            sj["iter"] = iter;
            sj["scs_snapshot"] = snap.mean;
            sj["scs_samples"] = snap.samples;
            metrics.write(sj);
        }
        if (st.iteration % cfg.checkpoint_interval == 0 && st.iteration < iters)
            save_adapt_checkpoint(ckpt_path, cfg, st, targets.files);
    }

    RSSA_CHECK(st.g_s.parameter_hash() == st.source_hash, "frozen source generator changed during adaption");
    save_adapt_checkpoint(ckpt_path, cfg, st, targets.files);

    AdaptResult res;
    res.checkpoint = ckpt_path;
    res.metrics = metrics.path();
    res.iterations = st.iteration;
    res.projection_degenerate = st.degenerate;
    return res;
}

StyleCodeStack shared_path_styles(const GeneratorModel& g_s, const Tensor& z, const ProjectionContext* projection) {
    StyleCodeStack styles = g_s.map_latent(z);
    if (projection) styles = project_stack(styles, projection->basis, projection->schedule);
    return styles;
}

std::vector<Tensor> interpolate_frames(const GeneratorModel& g_s, const GeneratorModel& g_t,
                                       const ProjectionContext* projection, const Tensor& z_a, const Tensor& z_b,
                                       int steps) {
    RSSA_CHECK(steps >= 2, "interpolate needs steps >= 2");
    RSSA_CHECK(z_a.same_shape(z_b), "interpolate endpoint shape mismatch");
    std::vector<Tensor> frames;
    for (int s = 0; s < steps; ++s) {
        const double t = static_cast<double>(s) / static_cast<double>(steps - 1);
        Tensor z({z_a.size(0)});
        for (int i = 0; i < z_a.size(0); ++i) z[i] = (1.0 - t) * z_a[i] + t * z_b[i];
        StyleCodeStack styles = shared_path_styles(g_s, z, projection);
        frames.push_back(g_t.synthesize(styles).first);
    }
    return frames;
}

Tensor sample_grid_image(const GeneratorModel& g_s, const GeneratorModel& g_t, const ProjectionContext* projection,
                         int rows, int cols, std::uint64_t seed) {
    RSSA_CHECK(rows >= 1 && cols >= 1, "sample grid dims must be positive");
    std::vector<Tensor> latents = sample_latent(rows * cols, seed, g_s.config().latent_dim);
    std::vector<Tensor> cells;
    for (const Tensor& z : latents) {
        StyleCodeStack styles = shared_path_styles(g_s, z, projection);
        cells.push_back(g_s.synthesize(styles).first);
        cells.push_back(g_t.synthesize(styles).first);
    }
    return grid_images(cells, rows, 2 * cols);
}

double discriminator_accuracy(const DiscriminatorModel& d, const std::vector<Tensor>& held_out,
                              const GeneratorModel& g, std::uint64_t seed) {
    RSSA_CHECK(!held_out.empty(), "discriminator_accuracy needs held-out images");
    NoGradGuard ng;
    int correct = 0, total = 0;
    for (const auto& img : held_out) {
        auto [logit, patches] = d.discriminate(img);
        if (logit > 0) ++correct;
        ++total;
    }
    std::vector<Tensor> latents = sample_latent(static_cast<int>(held_out.size()), seed, g.config().latent_dim);
    for (const Tensor& z : latents) {
        auto [img, feats] = g.synthesize(g.map_latent(z));
        auto [logit, patches] = d.discriminate(img);
        if (logit < 0) ++correct;
        ++total;
    }
    return static_cast<double>(correct) / static_cast<double>(total);
}

double mean_pairwise_mse(const GeneratorModel& g, int samples, std::uint64_t seed) {
    RSSA_CHECK(samples >= 2, "mean_pairwise_mse needs samples >= 2");
    NoGradGuard ng;
    std::vector<Tensor> imgs;
    for (const Tensor& z : sample_latent(samples, seed, g.config().latent_dim))
        imgs.push_back(g.synthesize(g.map_latent(z)).first);
    double acc = 0;
    int pairs = 0;
    for (int i = 0; i < samples; ++i)
        for (int j = i + 1; j < samples; ++j) {
            double mse = 0;
            for (std::int64_t k = 0; k < imgs[i].numel(); ++k) {
                const double dv = imgs[i][k] - imgs[j][k];
                mse += dv * dv;
            }
            acc += mse / static_cast<double>(imgs[i].numel());
            ++pairs;
        }
    return acc / pairs;
}

}  // namespace rssa
