#pragma once

#include "rssa/adversarial.hpp"
#include "rssa/generator.hpp"
#include "rssa/structural.hpp"
#include "rssa/toml_lite.hpp"

#include <filesystem>
#include <string>

namespace rssa {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Every training hyperparameter, with the published values as defaults.
// batch_size/max_iters of 0 mean "derive from the shot count".
struct RunConfig {
    // [run]
    std::string mode = "rssa";  // rssa | baseline
    int shots = 10;
    std::uint64_t seed = 0;
    std::string device = "cpu";

    // [model]
    ModelConfig model;

    // [train]
    double g_lr = 1.6e-4;
    double d_lr = 1.8e-4;
    double adam_beta1 = 0.0;
    double adam_beta2 = 0.99;
    int batch_size = 0;
    int max_iters = 0;
    int checkpoint_interval = 500;
    std::string batch_mode = "neighborhood";  // neighborhood | independent

    // [structural]
    StructuralLossConfig structural;
    double disturbance_r_ratio = 0.2;

    // [compression]
    bool compression = true;  // ignored (off) in baseline mode
    double subspace_lambda = 1e-6;
    int invert_steps = 500;
    double invert_lr = 0.01;
    int invert_init_samples = 10000;
    std::vector<double> schedule;  // empty = reference schedule resampled to the layer count

    // [adversarial]
    AdversarialConfig adv;

    // [pretrain]
    int pretrain_iters = 20000;
    int pretrain_batch = 8;
    double pretrain_g_lr = 2e-3;
    double pretrain_d_lr = 2e-3;

    // [eval]
    int scs_samples = 500;
    std::string detector = "sobel";
    int scs_snapshot_interval = 500;
    int scs_snapshot_samples = 64;
    bool projection_at_eval = true;

    int effective_batch() const { return batch_size > 0 ? batch_size : (shots >= 5 ? 4 : 1); }
    int effective_iters() const {
        if (max_iters > 0) return max_iters;
        if (shots >= 10) return 2500;
        if (shots >= 5) return 2000;
        return 1250;
    }
    // disturbance neighbors per anchor; the batch is anchor + N neighbors
    int effective_n() const { return effective_batch() - 1; }
    bool rssa_mode() const { return mode == "rssa"; }

    void validate() const;
    static RunConfig from_file(const std::filesystem::path& path);
    static RunConfig from_toml(const toml::Document& doc);
    std::string dump_toml() const;
};

}  // namespace rssa
