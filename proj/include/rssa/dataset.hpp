#pragma once

#include "rssa/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rssa {

// Procedural corpus: anti-aliased colored ellipses and rectangles on gradient
// backgrounds, with controlled position/scale variation. Styles derive the
// target domains from the same structure family.
struct DatasetSpec {
    std::string family = "shapes";
    std::string style = "plain";  // plain | inverted | palette | sketch
    int resolution = 32;

    void validate() const;
};

Tensor render_scene(const DatasetSpec& spec, std::uint64_t seed, int index);
Tensor apply_style(const Tensor& image, const std::string& style);

// Write `count` PNGs (img_%05d.png) under out_dir; deterministic per seed.
void generate_toy_source_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir, int count,
                                 std::uint64_t seed);

// Images from a directory in lexicographic filename order, resized and
// center-cropped to the given resolution, values in [-1,1].
struct TargetDataset {
    std::vector<Tensor> images;
    std::vector<std::string> files;

    int size() const { return static_cast<int>(images.size()); }
    static TargetDataset load(const std::filesystem::path& dir, int resolution);
};

}  // namespace rssa
