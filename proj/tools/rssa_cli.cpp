#include "rssa/config.hpp"
#include "rssa/dataset.hpp"
#include "rssa/image_io.hpp"
#include "rssa/train.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

struct GlobalOpts {
    std::string config_path;
    std::optional<std::int64_t> seed;
    std::string out_dir = "runs/out";
    std::string device;
};

rssa::RunConfig load_config(const GlobalOpts& g) {
    rssa::RunConfig cfg;
    if (!g.config_path.empty()) cfg = rssa::RunConfig::from_file(g.config_path);
    if (g.seed) cfg.seed = static_cast<std::uint64_t>(*g.seed);
    if (!g.device.empty()) cfg.device = g.device;
    cfg.validate();
    return cfg;
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path);
    os << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rssa: few-shot generator adaption with spatial structural alignment"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOpts g;
    app.add_option("--config", g.config_path, "TOML run configuration");
    app.add_option("--seed", g.seed, "override the config seed");
    app.add_option("--out-dir", g.out_dir, "output directory");
    app.add_option("--device", g.device, "compute device (cpu)");

    // gen-source-data
    auto* gen = app.add_subcommand("gen-source-data", "render a procedural image corpus");
    int gen_count = 3000;
    std::string gen_family = "shapes", gen_style = "plain";
    gen->add_option("--count", gen_count, "number of images");
    gen->add_option("--family", gen_family, "procedural family (shapes)");
    gen->add_option("--style", gen_style, "style: plain|inverted|palette|sketch");

    // pretrain
    auto* pre = app.add_subcommand("pretrain", "adversarially pretrain the source model");
    std::string pre_data;
    pre->add_option("--data", pre_data, "source corpus directory")->required();

    // adapt
    auto* ad = app.add_subcommand("adapt", "adapt the source model to a few-shot target domain");
    std::string ad_source, ad_target, ad_resume;
    ad->add_option("--source", ad_source, "source model checkpoint");
    ad->add_option("--target", ad_target, "target image directory")->required();
    ad->add_option("--resume", ad_resume, "resume from an adapted checkpoint");

    // evaluate-scs
    auto* ev = app.add_subcommand("evaluate-scs", "structural consistency score of a model pair");
    std::string ev_source, ev_target, ev_detector = "sobel", ev_report = "scs_report.json";
    int ev_samples = 500, ev_grid = 0;
    bool ev_noproj = false;
    std::int64_t ev_seed = 0;
    ev->add_option("--source", ev_source, "source model checkpoint")->required();
    ev->add_option("--target", ev_target, "adapted model checkpoint")->required();
    ev->add_option("--samples", ev_samples, "latent sample count");
    ev->add_option("--seed", ev_seed, "sampling seed");
    ev->add_option("--detector", ev_detector, "edge detector: sobel | external:<path>");
    ev->add_flag("--no-projection", ev_noproj, "disable latent compression at evaluation");
    ev->add_option("--grid", ev_grid, "also save a PNG grid of the first k samples");
    ev->add_option("--report", ev_report, "report file name (under --out-dir)");

    // interpolate
    auto* ip = app.add_subcommand("interpolate", "latent interpolation strip");
    std::string ip_ckpt;
    int ip_steps = 8;
    std::int64_t ip_seed_a = 0, ip_seed_b = 1;
    bool ip_noproj = false;
    ip->add_option("--checkpoint", ip_ckpt, "adapted model checkpoint")->required();
    ip->add_option("--steps", ip_steps, "number of frames (>= 2)");
    ip->add_option("--seed-a", ip_seed_a, "endpoint latent seed a");
    ip->add_option("--seed-b", ip_seed_b, "endpoint latent seed b");
    ip->add_flag("--no-projection", ip_noproj, "disable latent compression");

    // sample-grid
    auto* sg = app.add_subcommand("sample-grid", "paired source/target sample grid");
    std::string sg_source, sg_target;
    int sg_rows = 4, sg_cols = 4;
    std::int64_t sg_seed = 0;
    bool sg_noproj = false;
    sg->add_option("--source", sg_source, "source model checkpoint")->required();
    sg->add_option("--target", sg_target, "adapted model checkpoint")->required();
    sg->add_option("--rows", sg_rows, "grid rows");
    sg->add_option("--cols", sg_cols, "latent columns (each shows a source/target pair)");
    sg->add_option("--seed", sg_seed, "latent seed");
    sg->add_flag("--no-projection", sg_noproj, "disable latent compression");

    // dump-config
    auto* dc = app.add_subcommand("dump-config", "print all effective configuration values");

    CLI11_PARSE(app, argc, argv);

    try {
        const std::filesystem::path out_dir = g.out_dir;
        if (gen->parsed()) {
            rssa::RunConfig cfg = load_config(g);
            rssa::DatasetSpec spec;
            spec.family = gen_family;
            spec.style = gen_style;
            spec.resolution = cfg.model.resolution;
            spec.validate();
            rssa::generate_toy_source_dataset(spec, out_dir, gen_count, cfg.seed);
            std::cout << "wrote " << gen_count << " images to " << out_dir.string() << "\n";
        } else if (pre->parsed()) {
            rssa::RunConfig cfg = load_config(g);
            auto res = rssa::pretrain_source(cfg, pre_data, out_dir);
            std::cout << "pretrained " << res.iterations << " iterations -> " << res.checkpoint.string() << "\n";
        } else if (ad->parsed()) {
            rssa::RunConfig cfg = load_config(g);
            std::optional<std::filesystem::path> resume;
            if (!ad_resume.empty()) resume = ad_resume;
            if (ad_source.empty() && !resume)
                throw rssa::ConfigError("adapt: --source is required unless --resume is given");
            auto res = rssa::adapt(cfg, ad_source, ad_target, out_dir, resume);
            std::cout << "adapted " << res.iterations << " iterations -> " << res.checkpoint.string() << "\n";
        } else if (ev->parsed()) {
            rssa::SourceModel src = rssa::load_source_checkpoint(ev_source);
            rssa::AdaptedCheckpoint tgt = rssa::load_adapted_checkpoint(ev_target);
            const rssa::ProjectionContext* proj =
                (!ev_noproj && tgt.projection) ? &*tgt.projection : nullptr;
            rssa::EdgeDetector det = rssa::EdgeDetector::parse(ev_detector);
            rssa::ScsReport rep =
                rssa::scs_score(src.g, tgt.g_t, ev_samples, static_cast<std::uint64_t>(ev_seed), det, proj);
            nlohmann::ordered_json j;
            j["mean"] = rep.mean;
            j["samples"] = rep.samples;
            j["detector"] = rep.detector;
            j["seed"] = rep.seed;
            j["projection"] = rep.projection;
            j["scores"] = rep.scores;
            write_json(out_dir / ev_report, j);
            std::cout << "scs mean = " << rep.mean << " over " << rep.samples << " samples -> "
                      << (out_dir / ev_report).string() << "\n";
            if (ev_grid > 0) {
                std::vector<rssa::Tensor> cells;
                auto latents = rssa::sample_latent(ev_grid, static_cast<std::uint64_t>(ev_seed),
                                                   src.g.config().latent_dim);
                for (const auto& z : latents) {
                    rssa::StyleCodeStack styles = rssa::shared_path_styles(src.g, z, proj);
                    auto img_s = src.g.synthesize(styles).first;
                    auto img_t = tgt.g_t.synthesize(styles).first;
                    auto gray = [](const rssa::Tensor& e) {
                        rssa::Tensor rgb({3, e.size(0), e.size(1)});
                        for (int k = 0; k < 3; ++k)
                            for (int r = 0; r < e.size(0); ++r)
                                for (int c = 0; c < e.size(1); ++c)
                                    rgb.at(0, k, r, c) = e.at(0, 0, r, c) * 2.0 - 1.0;
                        return rgb;
                    };
                    cells.push_back(img_s);
                    cells.push_back(img_t);
                    cells.push_back(gray(rssa::edge_map(img_s, det)));
                    cells.push_back(gray(rssa::edge_map(img_t, det)));
                }
                rssa::Tensor grid = rssa::grid_images(cells, ev_grid, 4);
                rssa::save_png(grid, out_dir / "scs_grid.png");
                std::cout << "wrote " << (out_dir / "scs_grid.png").string() << "\n";
            }
        } else if (ip->parsed()) {
            rssa::AdaptedCheckpoint ckpt = rssa::load_adapted_checkpoint(ip_ckpt);
            const rssa::ProjectionContext* proj =
                (!ip_noproj && ckpt.projection) ? &*ckpt.projection : nullptr;
            const int dim = ckpt.g_s.config().latent_dim;
            rssa::Tensor za = rssa::sample_latent(1, static_cast<std::uint64_t>(ip_seed_a), dim)[0];
            rssa::Tensor zb = rssa::sample_latent(1, static_cast<std::uint64_t>(ip_seed_b), dim)[0];
            auto frames = rssa::interpolate_frames(ckpt.g_s, ckpt.g_t, proj, za, zb, ip_steps);
            rssa::Tensor strip = rssa::hstack_images(frames);
            rssa::save_png(strip, out_dir / "interpolation.png");
            std::cout << "wrote " << (out_dir / "interpolation.png").string() << "\n";
        } else if (sg->parsed()) {
            rssa::SourceModel src = rssa::load_source_checkpoint(sg_source);
            rssa::AdaptedCheckpoint tgt = rssa::load_adapted_checkpoint(sg_target);
            const rssa::ProjectionContext* proj =
                (!sg_noproj && tgt.projection) ? &*tgt.projection : nullptr;
            rssa::Tensor grid = rssa::sample_grid_image(src.g, tgt.g_t, proj, sg_rows, sg_cols,
                                                        static_cast<std::uint64_t>(sg_seed));
            rssa::save_png(grid, out_dir / "sample_grid.png");
            std::cout << "wrote " << (out_dir / "sample_grid.png").string() << "\n";
        } else if (dc->parsed()) {
            rssa::RunConfig cfg = load_config(g);
            std::cout << cfg.dump_toml();
        }
        return kExitOk;
    } catch (const rssa::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const rssa::toml::ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const rssa::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
