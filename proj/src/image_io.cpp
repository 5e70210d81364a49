#include "rssa/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace rssa {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

unsigned char to_byte(double v) {
    const double x = (v + 1.0) / 2.0 * 255.0;
    return static_cast<unsigned char>(std::min(255.0, std::max(0.0, std::round(x))));
}

}  // namespace

void save_png(const Tensor& image, const std::filesystem::path& path) {
    RSSA_CHECK(image.rank() == 3 && image.size(0) == 3, "save_png expects [3,H,W]");
    const int h = image.size(1), w = image.size(2);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot open for write: " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png write failed: " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    std::vector<unsigned char> row(static_cast<std::size_t>(w) * 3);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c)
            for (int ch = 0; ch < 3; ++ch) row[c * 3 + ch] = to_byte(image.at(0, ch, r, c));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Tensor load_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw std::runtime_error("cannot open image: " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png read failed: " + path.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    std::vector<unsigned char> row(static_cast<std::size_t>(w) * 3);
    Tensor out({3, h, w});
    for (int r = 0; r < h; ++r) {
        png_read_row(png, row.data(), nullptr);
        for (int c = 0; c < w; ++c)
            for (int ch = 0; ch < 3; ++ch) out.at(0, ch, r, c) = row[c * 3 + ch] / 255.0 * 2.0 - 1.0;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

Tensor resize_image(const Tensor& image, int h, int w) {
    RSSA_CHECK(image.rank() == 3, "resize_image expects [C,H,W]");
    const int ch = image.size(0), ih = image.size(1), iw = image.size(2);
    if (ih == h && iw == w) return image;
    Tensor out({ch, h, w});
    for (int r = 0; r < h; ++r) {
        const double sy = (r + 0.5) * ih / h - 0.5;
        const int y0 = std::max(0, std::min(ih - 1, static_cast<int>(std::floor(sy))));
        const int y1 = std::min(ih - 1, y0 + 1);
        const double fy = std::min(1.0, std::max(0.0, sy - y0));
        for (int c = 0; c < w; ++c) {
            const double sx = (c + 0.5) * iw / w - 0.5;
            const int x0 = std::max(0, std::min(iw - 1, static_cast<int>(std::floor(sx))));
            const int x1 = std::min(iw - 1, x0 + 1);
            const double fx = std::min(1.0, std::max(0.0, sx - x0));
            for (int k = 0; k < ch; ++k) {
                const double v = (1 - fy) * ((1 - fx) * image.at(0, k, y0, x0) + fx * image.at(0, k, y0, x1)) +
                                 fy * ((1 - fx) * image.at(0, k, y1, x0) + fx * image.at(0, k, y1, x1));
                out.at(0, k, r, c) = v;
            }
        }
    }
    return out;
}

Tensor center_crop(const Tensor& image, int h, int w) {
    RSSA_CHECK(image.rank() == 3 && image.size(1) >= h && image.size(2) >= w, "center_crop target too large");
    const int r0 = (image.size(1) - h) / 2;
    const int c0 = (image.size(2) - w) / 2;
    return slice(image, {0, r0, c0}, {image.size(0), h, w});
}

Tensor hstack_images(const std::vector<Tensor>& images, int pad, double pad_value) {
    RSSA_CHECK(!images.empty(), "hstack_images on empty list");
    return grid_images(images, 1, static_cast<int>(images.size()), pad, pad_value);
}

Tensor grid_images(const std::vector<Tensor>& images, int rows, int cols, int pad, double pad_value) {
    RSSA_CHECK(rows >= 1 && cols >= 1, "grid dims must be positive");
    RSSA_CHECK(static_cast<int>(images.size()) == rows * cols, "grid_images count mismatch");
    const int ch = images[0].size(0), h = images[0].size(1), w = images[0].size(2);
    const int gh = rows * h + (rows + 1) * pad;
    const int gw = cols * w + (cols + 1) * pad;
    Tensor out = Tensor::full({ch, gh, gw}, pad_value);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const Tensor& img = images[static_cast<std::size_t>(r) * cols + c];
            RSSA_CHECK(img.size(0) == ch && img.size(1) == h && img.size(2) == w, "grid_images size mismatch");
            const int r0 = pad + r * (h + pad);
            const int c0 = pad + c * (w + pad);
            for (int k = 0; k < ch; ++k)
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < w; ++x) out.at(0, k, r0 + y, c0 + x) = img.at(0, k, y, x);
        }
    return out;
}

}  // namespace rssa
