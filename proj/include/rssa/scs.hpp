#pragma once

#include "rssa/compression.hpp"
#include "rssa/generator.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rssa {

// Soft edge-strength map in [0,1], same spatial size as the input image.
using EdgeMap = Tensor;  // [H,W]

// Edge extraction strategy: the classical gradient-magnitude detector, or a
// small learned convolutional detector loaded from an archive file.
class EdgeDetector {
  public:
    static EdgeDetector sobel();
    static EdgeDetector external(const std::filesystem::path& model_file);
    // Parse "sobel" or "external:<path>".
    static EdgeDetector parse(const std::string& spec);

    EdgeMap apply(const Tensor& image) const;  // image [3,H,W] in [-1,1]
    const std::string& name() const { return name_; }

  private:
    EdgeDetector() = default;
    std::string name_;
    bool external_ = false;
    // external model: 3x3 conv stack, leaky-relu between layers, sigmoid out
    std::vector<Tensor> weights_;
    std::vector<Tensor> biases_;
};

EdgeMap edge_map(const Tensor& image, const EdgeDetector& detector);

// Dice similarity 2<a,b>/(|a|^2+|b|^2); two all-zero maps count as identical.
double dice(const EdgeMap& a, const EdgeMap& b);

struct ScsReport {
    std::vector<double> scores;
    double mean = 0.0;
    int samples = 0;
    std::string detector;
    std::uint64_t seed = 0;
    bool projection = false;
};

// Expected dice coefficient between edge maps of paired generations from the
// frozen source model and the adapted model, over `samples` latent draws.
ScsReport scs_score(const GeneratorModel& g_s, const GeneratorModel& g_t, int samples, std::uint64_t seed,
                    const EdgeDetector& detector, const ProjectionContext* projection = nullptr);

}  // namespace rssa
