#pragma once

#include "rssa/tensor.hpp"

#include <filesystem>

namespace rssa {

// PNG I/O for [3,H,W] images. Tensors hold values in [-1,1]; files are 8-bit
// RGB. Encoding is deterministic (fixed libpng settings).
void save_png(const Tensor& image, const std::filesystem::path& path);
Tensor load_png(const std::filesystem::path& path);

// Bilinear resize to [3,h,w].
Tensor resize_image(const Tensor& image, int h, int w);
Tensor center_crop(const Tensor& image, int h, int w);

// Horizontal strip / grid assembly of equally sized images.
Tensor hstack_images(const std::vector<Tensor>& images, int pad = 2, double pad_value = 1.0);
Tensor grid_images(const std::vector<Tensor>& images, int rows, int cols, int pad = 2, double pad_value = 1.0);

}  // namespace rssa
