#pragma once

#include "rssa/checkpoint.hpp"
#include "rssa/config.hpp"
#include "rssa/dataset.hpp"
#include "rssa/scs.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rssa {

// Append-only line-delimited JSON stream.
class MetricsWriter {
  public:
    MetricsWriter() = default;
    MetricsWriter(const std::filesystem::path& path, bool append);
    void write(const nlohmann::ordered_json& record);
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

std::vector<nlohmann::ordered_json> read_metrics(const std::filesystem::path& path);

nlohmann::ordered_json model_meta(const ModelConfig& cfg);
ModelConfig model_config_from_meta(const nlohmann::ordered_json& meta);

struct SourceModel {
    GeneratorModel g;
    DiscriminatorModel d;
    std::uint64_t seed = 0;
    int iteration = 0;
};

void save_source_checkpoint(const std::filesystem::path& path, const SourceModel& m);
SourceModel load_source_checkpoint(const std::filesystem::path& path);

struct AdaptedCheckpoint {
    GeneratorModel g_s;  // frozen source copy
    GeneratorModel g_t;  // adapted generator
    DiscriminatorModel d;
    std::optional<ProjectionContext> projection;
    nlohmann::ordered_json meta;
};

AdaptedCheckpoint load_adapted_checkpoint(const std::filesystem::path& path);

struct PretrainResult {
    std::filesystem::path checkpoint;
    std::filesystem::path metrics;
    int iterations = 0;
};

// Adversarial pretraining of the source pair on a procedural corpus
// (no structural loss, no compression).
PretrainResult pretrain_source(const RunConfig& cfg, const std::filesystem::path& data_dir,
                               const std::filesystem::path& out_dir);

struct AdaptResult {
    std::filesystem::path checkpoint;
    std::filesystem::path metrics;
    int iterations = 0;
    std::int64_t projection_degenerate = 0;
};

// Few-shot adaption. resume_from continues an interrupted run and reproduces
// the uninterrupted metrics suffix exactly.
AdaptResult adapt(const RunConfig& cfg, const std::filesystem::path& source_ckpt,
                  const std::filesystem::path& target_dir, const std::filesystem::path& out_dir,
                  const std::optional<std::filesystem::path>& resume_from = std::nullopt);

// Styles for one latent on the shared data path (source mapping, optional
// projection); feeds either generator of the pair.
StyleCodeStack shared_path_styles(const GeneratorModel& g_s, const Tensor& z, const ProjectionContext* projection);

std::vector<Tensor> interpolate_frames(const GeneratorModel& g_s, const GeneratorModel& g_t,
                                       const ProjectionContext* projection, const Tensor& z_a, const Tensor& z_b,
                                       int steps);

// rows x cols latent grid; each cell is the (source, target) pair side by side.
Tensor sample_grid_image(const GeneratorModel& g_s, const GeneratorModel& g_t, const ProjectionContext* projection,
                         int rows, int cols, std::uint64_t seed);

// Image-head accuracy of d on held-out reals vs fresh fakes (0.5 = chance).
double discriminator_accuracy(const DiscriminatorModel& d, const std::vector<Tensor>& held_out,
                              const GeneratorModel& g, std::uint64_t seed);

// Mean pairwise pixel MSE over generated samples (collapse detector).
double mean_pairwise_mse(const GeneratorModel& g, int samples, std::uint64_t seed);

}  // namespace rssa
