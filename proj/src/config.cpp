#include "rssa/config.hpp"

#include "rssa/compression.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace rssa {

namespace {

void require(bool cond, const std::string& field, const std::string& rule) {
    if (!cond) throw ConfigError("config: " + field + " " + rule);
}

double get_f(const toml::Document& d, const std::string& t, const std::string& k, double fallback) {
    if (!d.has(t, k)) return fallback;
    const auto& v = d.at(t, k);
    if (v.is_int()) return static_cast<double>(std::get<std::int64_t>(v.v));
    if (v.is_float()) return std::get<double>(v.v);
    throw ConfigError("config: " + t + "." + k + " must be a number");
}

std::int64_t get_i(const toml::Document& d, const std::string& t, const std::string& k, std::int64_t fallback) {
    if (!d.has(t, k)) return fallback;
    const auto& v = d.at(t, k);
    if (!v.is_int()) throw ConfigError("config: " + t + "." + k + " must be an integer");
    return std::get<std::int64_t>(v.v);
}

std::string get_s(const toml::Document& d, const std::string& t, const std::string& k, const std::string& fallback) {
    if (!d.has(t, k)) return fallback;
    const auto& v = d.at(t, k);
    if (!v.is_string()) throw ConfigError("config: " + t + "." + k + " must be a string");
    return std::get<std::string>(v.v);
}

bool get_b(const toml::Document& d, const std::string& t, const std::string& k, bool fallback) {
    if (!d.has(t, k)) return fallback;
    const auto& v = d.at(t, k);
    if (!v.is_bool()) throw ConfigError("config: " + t + "." + k + " must be a boolean");
    return std::get<bool>(v.v);
}

}  // namespace

void RunConfig::validate() const {
    require(mode == "rssa" || mode == "baseline", "run.mode", "must be 'rssa' or 'baseline'");
    require(shots >= 1 && shots <= 1000, "run.shots", "must lie in [1,1000]");
    require(device == "cpu", "run.device", "must be 'cpu' (only cpu execution is built in)");
    try {
        model.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: model: ") + e.what());
    }
    require(g_lr > 0 && g_lr < 1, "train.g_lr", "must lie in (0,1)");
    require(d_lr > 0 && d_lr < 1, "train.d_lr", "must lie in (0,1)");
    require(adam_beta1 >= 0 && adam_beta1 < 1, "train.adam_beta1", "must lie in [0,1)");
    require(adam_beta2 >= 0 && adam_beta2 < 1, "train.adam_beta2", "must lie in [0,1)");
    require(batch_size >= 0 && batch_size <= 64, "train.batch_size", "must lie in [0,64] (0 derives from shots)");
    require(max_iters >= 0 && max_iters <= 10000000, "train.max_iters", "must lie in [0,1e7] (0 derives from shots)");
    require(checkpoint_interval >= 1, "train.checkpoint_interval", "must be >= 1");
    require(batch_mode == "neighborhood" || batch_mode == "independent", "train.batch_mode",
            "must be 'neighborhood' or 'independent'");
    try {
        structural.validate();
        adv.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    require(structural.output_resolution == model.resolution, "structural.output_resolution",
            "must equal model.resolution");
    require(disturbance_r_ratio > 0 && disturbance_r_ratio <= 10, "structural.disturbance_r_ratio",
            "must lie in (0,10]");
    require(subspace_lambda >= 0, "compression.lambda", "must be nonnegative");
    require(invert_steps >= 1 && invert_steps <= 100000, "compression.invert_steps", "must lie in [1,1e5]");
    require(invert_lr > 0 && invert_lr < 1, "compression.invert_lr", "must lie in (0,1)");
    require(invert_init_samples >= 1, "compression.invert_init_samples", "must be >= 1");
    if (!schedule.empty()) {
        require(static_cast<int>(schedule.size()) == model.style_layers(), "compression.schedule",
                "must have one coefficient per style layer");
        ModulationSchedule s;
        s.alpha = schedule;
        try {
            s.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config: compression.schedule: ") + e.what());
        }
    }
    require(pretrain_iters >= 1, "pretrain.iters", "must be >= 1");
    require(pretrain_batch >= 2, "pretrain.batch_size", "must be >= 2");
    require(pretrain_g_lr > 0 && pretrain_g_lr < 1, "pretrain.g_lr", "must lie in (0,1)");
    require(pretrain_d_lr > 0 && pretrain_d_lr < 1, "pretrain.d_lr", "must lie in (0,1)");
    require(scs_samples >= 1, "eval.scs_samples", "must be >= 1");
    require(detector == "sobel" || detector.rfind("external:", 0) == 0, "eval.detector",
            "must be 'sobel' or 'external:<path>'");
    require(scs_snapshot_interval >= 0, "eval.scs_snapshot_interval", "must be >= 0 (0 disables snapshots)");
    require(scs_snapshot_samples >= 1, "eval.scs_snapshot_samples", "must be >= 1");
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    try {
        return from_toml(toml::parse_file(path));
    } catch (const toml::ParseError& e) {
        throw ConfigError(e.what());
    }
}

RunConfig RunConfig::from_toml(const toml::Document& d) {
    RunConfig c;
    c.mode = get_s(d, "run", "mode", c.mode);
    c.shots = static_cast<int>(get_i(d, "run", "shots", c.shots));
    c.seed = static_cast<std::uint64_t>(get_i(d, "run", "seed", static_cast<std::int64_t>(c.seed)));
    c.device = get_s(d, "run", "device", c.device);

    c.model.latent_dim = static_cast<int>(get_i(d, "model", "latent_dim", c.model.latent_dim));
    c.model.style_dim = static_cast<int>(get_i(d, "model", "style_dim", c.model.style_dim));
    c.model.resolution = static_cast<int>(get_i(d, "model", "resolution", c.model.resolution));
    c.model.base_resolution = static_cast<int>(get_i(d, "model", "base_resolution", c.model.base_resolution));
    if (d.has("model", "stage_channels")) {
        const auto& v = d.at("model", "stage_channels");
        if (!v.is_number_array()) throw ConfigError("config: model.stage_channels must be an array of integers");
        c.model.stage_channels.clear();
        for (double x : std::get<std::vector<double>>(v.v)) c.model.stage_channels.push_back(static_cast<int>(x));
    }

    c.g_lr = get_f(d, "train", "g_lr", c.g_lr);
    c.d_lr = get_f(d, "train", "d_lr", c.d_lr);
    c.adam_beta1 = get_f(d, "train", "adam_beta1", c.adam_beta1);
    c.adam_beta2 = get_f(d, "train", "adam_beta2", c.adam_beta2);
    c.batch_size = static_cast<int>(get_i(d, "train", "batch_size", c.batch_size));
    c.max_iters = static_cast<int>(get_i(d, "train", "max_iters", c.max_iters));
    c.checkpoint_interval = static_cast<int>(get_i(d, "train", "checkpoint_interval", c.checkpoint_interval));
    c.batch_mode = get_s(d, "train", "batch_mode", c.batch_mode);

    c.structural.alpha = get_f(d, "structural", "alpha", c.structural.alpha);
    c.structural.beta = get_f(d, "structural", "beta", c.structural.beta);
    c.structural.smooth_l1_transition =
        get_f(d, "structural", "smooth_l1_transition", c.structural.smooth_l1_transition);
    c.structural.scc_global_max_ratio =
        get_f(d, "structural", "scc_global_max_ratio", c.structural.scc_global_max_ratio);
    c.structural.scc_patch_ratio = get_f(d, "structural", "scc_patch_ratio", c.structural.scc_patch_ratio);
    c.structural.dcc_cap_ratio = get_f(d, "structural", "dcc_cap_ratio", c.structural.dcc_cap_ratio);
    c.structural.dcc_delta_ratio = get_f(d, "structural", "dcc_delta_ratio", c.structural.dcc_delta_ratio);
    c.structural.dcc_anchor_only = get_b(d, "structural", "dcc_anchor_only", c.structural.dcc_anchor_only);
    c.disturbance_r_ratio = get_f(d, "structural", "disturbance_r_ratio", c.disturbance_r_ratio);
    c.structural.output_resolution = c.model.resolution;

    c.compression = get_b(d, "compression", "enabled", c.compression);
    c.subspace_lambda = get_f(d, "compression", "lambda", c.subspace_lambda);
    c.invert_steps = static_cast<int>(get_i(d, "compression", "invert_steps", c.invert_steps));
    c.invert_lr = get_f(d, "compression", "invert_lr", c.invert_lr);
    c.invert_init_samples = static_cast<int>(get_i(d, "compression", "invert_init_samples", c.invert_init_samples));
    if (d.has("compression", "schedule")) {
        const auto& v = d.at("compression", "schedule");
        if (!v.is_number_array()) throw ConfigError("config: compression.schedule must be an array of numbers");
        c.schedule = std::get<std::vector<double>>(v.v);
    }

    c.adv.image_weight = get_f(d, "adversarial", "image_weight", c.adv.image_weight);
    c.adv.patch_weight = get_f(d, "adversarial", "patch_weight", c.adv.patch_weight);
    c.adv.r1_gamma = get_f(d, "adversarial", "r1_gamma", c.adv.r1_gamma);
    c.adv.r1_interval = static_cast<int>(get_i(d, "adversarial", "r1_interval", c.adv.r1_interval));
    c.adv.pl_weight = get_f(d, "adversarial", "pl_weight", c.adv.pl_weight);
    c.adv.pl_interval = static_cast<int>(get_i(d, "adversarial", "pl_interval", c.adv.pl_interval));
    c.adv.pl_decay = get_f(d, "adversarial", "pl_decay", c.adv.pl_decay);

    c.pretrain_iters = static_cast<int>(get_i(d, "pretrain", "iters", c.pretrain_iters));
    c.pretrain_batch = static_cast<int>(get_i(d, "pretrain", "batch_size", c.pretrain_batch));
    c.pretrain_g_lr = get_f(d, "pretrain", "g_lr", c.pretrain_g_lr);
    c.pretrain_d_lr = get_f(d, "pretrain", "d_lr", c.pretrain_d_lr);

    c.scs_samples = static_cast<int>(get_i(d, "eval", "scs_samples", c.scs_samples));
    c.detector = get_s(d, "eval", "detector", c.detector);
    c.scs_snapshot_interval = static_cast<int>(get_i(d, "eval", "scs_snapshot_interval", c.scs_snapshot_interval));
    c.scs_snapshot_samples = static_cast<int>(get_i(d, "eval", "scs_snapshot_samples", c.scs_snapshot_samples));
    c.projection_at_eval = get_b(d, "eval", "projection_at_eval", c.projection_at_eval);

    c.validate();
    return c;
}

namespace {

// shortest round-trip representation
std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string RunConfig::dump_toml() const {
    std::ostringstream os;
    os << "[run]\n";
    os << "mode = \"" << mode << "\"\n";
    os << "shots = " << shots << "\n";
    os << "seed = " << seed << "\n";
    os << "device = \"" << device << "\"\n\n";
    os << "[model]\n";
    os << "latent_dim = " << model.latent_dim << "\n";
    os << "style_dim = " << model.style_dim << "\n";
    os << "resolution = " << model.resolution << "\n";
    os << "base_resolution = " << model.base_resolution << "\n";
    os << "stage_channels = [";
    for (std::size_t i = 0; i < model.stage_channels.size(); ++i)
        os << (i ? ", " : "") << model.stage_channels[i];
    os << "]\n\n";
    os << "[train]\n";
    os << "g_lr = " << fmt(g_lr) << "\n";
    os << "d_lr = " << fmt(d_lr) << "\n";
    os << "adam_beta1 = " << fmt(adam_beta1) << "\n";
    os << "adam_beta2 = " << fmt(adam_beta2) << "\n";
    os << "batch_size = " << effective_batch() << "\n";
    os << "max_iters = " << effective_iters() << "\n";
    os << "checkpoint_interval = " << checkpoint_interval << "\n";
    os << "batch_mode = \"" << batch_mode << "\"\n\n";
    os << "[structural]\n";
    os << "alpha = " << fmt(structural.alpha) << "\n";
    os << "beta = " << fmt(structural.beta) << "\n";
    os << "smooth_l1_transition = " << fmt(structural.smooth_l1_transition) << "\n";
    os << "scc_global_max_ratio = " << fmt(structural.scc_global_max_ratio) << "\n";
    os << "scc_patch_ratio = " << fmt(structural.scc_patch_ratio) << "\n";
    os << "dcc_cap_ratio = " << fmt(structural.dcc_cap_ratio) << "\n";
    os << "dcc_delta_ratio = " << fmt(structural.dcc_delta_ratio) << "\n";
    os << "dcc_anchor_only = " << (structural.dcc_anchor_only ? "true" : "false") << "\n";
    os << "disturbance_n = " << effective_n() << "\n";
    os << "disturbance_r_ratio = " << fmt(disturbance_r_ratio) << "\n\n";
    os << "[compression]\n";
    os << "enabled = " << ((compression && rssa_mode()) ? "true" : "false") << "\n";
    os << "lambda = " << fmt(subspace_lambda) << "\n";
    os << "invert_steps = " << invert_steps << "\n";
    os << "invert_lr = " << fmt(invert_lr) << "\n";
    os << "invert_init_samples = " << invert_init_samples << "\n";
    os << "schedule = [";
    std::vector<double> sched = schedule;
    if (sched.empty()) sched = resample_schedule(model.style_layers()).alpha;
    for (std::size_t i = 0; i < sched.size(); ++i) os << (i ? ", " : "") << fmt(sched[i]);
    os << "]\n\n";
    os << "[adversarial]\n";
    os << "image_weight = " << fmt(adv.image_weight) << "\n";
    os << "patch_weight = " << fmt(adv.patch_weight) << "\n";
    os << "r1_gamma = " << fmt(adv.r1_gamma) << "\n";
    os << "r1_interval = " << adv.r1_interval << "\n";
    os << "pl_weight = " << fmt(adv.pl_weight) << "\n";
    os << "pl_interval = " << adv.pl_interval << "\n";
    os << "pl_decay = " << fmt(adv.pl_decay) << "\n\n";
    os << "[pretrain]\n";
    os << "iters = " << pretrain_iters << "\n";
    os << "batch_size = " << pretrain_batch << "\n";
    os << "g_lr = " << fmt(pretrain_g_lr) << "\n";
    os << "d_lr = " << fmt(pretrain_d_lr) << "\n\n";
    os << "[eval]\n";
    os << "scs_samples = " << scs_samples << "\n";
    os << "detector = \"" << detector << "\"\n";
    os << "scs_snapshot_interval = " << scs_snapshot_interval << "\n";
    os << "scs_snapshot_samples = " << scs_snapshot_samples << "\n";
    os << "projection_at_eval = " << (projection_at_eval ? "true" : "false") << "\n";
    return os.str();
}

}  // namespace rssa
