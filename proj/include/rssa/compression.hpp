#pragma once

#include "rssa/generator.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace rssa {

// Per-image layered codes recovered by optimizing against the target images,
// with the reconstruction error kept for audit.
struct InvertedCodeSet {
    std::vector<StyleCodeStack> codes;       // one stack per image
    std::vector<double> final_error;         // best pixel+lowres MSE per image
    std::vector<std::vector<double>> error_trace;  // best-so-far at recorded checkpoints
    std::vector<bool> diverged;              // error above the initial value after all steps

    int images() const { return static_cast<int>(codes.size()); }
};

// Column space of the inverted codes at one layer, with the regularized
// normal-equations factor precomputed.
struct SubspaceLayer {
    Eigen::MatrixXd a;       // [style_dim, n]
    Eigen::MatrixXd factor;  // (A^T A + lambda I)^{-1}
    double lambda = 0.0;

    Eigen::VectorXd project(const Eigen::VectorXd& w) const { return a * (factor * (a.transpose() * w)); }
};

struct SubspaceBasis {
    std::vector<SubspaceLayer> layers;
    double lambda = 0.0;

    int layer_count() const { return static_cast<int>(layers.size()); }
};

struct ModulationSchedule {
    std::vector<double> alpha;  // per layer, in [0,1], nondecreasing

    int layers() const { return static_cast<int>(alpha.size()); }
    void validate() const;
};

struct ProjectionStats {
    std::int64_t degenerate = 0;  // projections with near-zero norm, returned unchanged
};

struct InvertOptions {
    int steps = 500;
    double lr = 0.01;
    int init_samples = 10000;   // prior draws for the mean style code
    int record_every = 10;
    std::uint64_t seed = 0;     // seeds the mean-code estimate
    std::optional<StyleCodeStack> init;  // overrides the mean-code init
};

// Optimize per-layer style codes so the generator reproduces each image;
// objective is pixel MSE plus 4x-downsampled MSE.
InvertedCodeSet invert_images(const GeneratorModel& g_s, const std::vector<Tensor>& images,
                              const InvertOptions& opts);

Tensor mean_style_code(const GeneratorModel& g_s, int samples, std::uint64_t seed);

SubspaceBasis build_subspace(const InvertedCodeSet& codes, double lambda);

// Project one style code onto the subspace span, rescale to the input norm,
// and blend with weight alpha. A near-zero projection returns w unchanged.
Tensor project_code(const Tensor& w, const SubspaceLayer& layer, double alpha, ProjectionStats* stats = nullptr);

StyleCodeStack project_stack(const StyleCodeStack& styles, const SubspaceBasis& basis,
                             const ModulationSchedule& schedule, ProjectionStats* stats = nullptr);

// Reference per-layer modulation coefficients for a 14-layer generator.
ModulationSchedule reference_schedule();
// Piecewise-constant resampling of the reference schedule by fractional depth.
ModulationSchedule resample_schedule(int layers);

// Basis plus schedule: everything needed to project sampled stacks on the
// shared data path (training and evaluation).
struct ProjectionContext {
    SubspaceBasis basis;
    ModulationSchedule schedule;
};

}  // namespace rssa
