#include "rssa/dataset.hpp"

#include "rssa/image_io.hpp"
#include "rssa/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace rssa {

void DatasetSpec::validate() const {
    RSSA_CHECK(family == "shapes", "unknown dataset family: " + family);
    RSSA_CHECK(style == "plain" || style == "inverted" || style == "palette" || style == "sketch",
               "unknown dataset style: " + style);
    RSSA_CHECK(resolution >= 8, "dataset resolution too small");
}

namespace {

struct Shape {
    bool ellipse = true;
    double cx = 0, cy = 0;     // center, in [0,1] image coords
    double rx = 0, ry = 0;     // half extents
    double angle = 0;
    double color[3] = {0, 0, 0};

    bool contains(double x, double y) const {
        const double dx = x - cx, dy = y - cy;
        const double ca = std::cos(angle), sa = std::sin(angle);
        const double u = (ca * dx + sa * dy) / rx;
        const double v = (-sa * dx + ca * dy) / ry;
        return ellipse ? (u * u + v * v <= 1.0) : (std::fabs(u) <= 1.0 && std::fabs(v) <= 1.0);
    }
};

Tensor render_supersampled(const DatasetSpec& spec, RandomStream& rng) {
    const int res = spec.resolution;
    const int ss = 4;  // supersampling factor for anti-aliasing
    const int big = res * ss;

    double bg0[3], bg1[3];
    for (int k = 0; k < 3; ++k) {
        bg0[k] = rng.uniform(0.1, 0.9);
        bg1[k] = rng.uniform(0.1, 0.9);
    }
    const double theta = rng.uniform(0.0, 2.0 * M_PI);
    const double gx = std::cos(theta), gy = std::sin(theta);

    const int nshapes = 1 + static_cast<int>(rng.uniform_int(3));
    std::vector<Shape> shapes;
    for (int i = 0; i < nshapes; ++i) {
        Shape s;
        s.ellipse = rng.uniform() < 0.5;
        s.cx = rng.uniform(0.3, 0.7);
        s.cy = rng.uniform(0.3, 0.7);
        s.rx = rng.uniform(0.12, 0.3);
        s.ry = rng.uniform(0.12, 0.3);
        s.angle = rng.uniform(0.0, M_PI);
        for (int k = 0; k < 3; ++k) s.color[k] = rng.uniform(0.05, 0.95);
        shapes.push_back(s);
    }

    Tensor img({3, res, res});
    for (int r = 0; r < res; ++r)
        for (int c = 0; c < res; ++c) {
            double acc[3] = {0, 0, 0};
            for (int sr = 0; sr < ss; ++sr)
                for (int sc = 0; sc < ss; ++sc) {
                    const double y = (r * ss + sr + 0.5) / big;
                    const double x = (c * ss + sc + 0.5) / big;
                    const double t = ((x - 0.5) * gx + (y - 0.5) * gy + 1.0) / 2.0;
                    double px[3];
                    for (int k = 0; k < 3; ++k) px[k] = bg0[k] + (bg1[k] - bg0[k]) * t;
                    for (const auto& s : shapes)
                        if (s.contains(x, y))
                            for (int k = 0; k < 3; ++k) px[k] = s.color[k];
                    for (int k = 0; k < 3; ++k) acc[k] += px[k];
                }
            for (int k = 0; k < 3; ++k) img.at(0, k, r, c) = acc[k] / (ss * ss) * 2.0 - 1.0;
        }
    return img;
}

double luma01(const Tensor& img, int r, int c) {
    const double rr = (img.at(0, 0, r, c) + 1) / 2;
    const double gg = (img.at(0, 1, r, c) + 1) / 2;
    const double bb = (img.at(0, 2, r, c) + 1) / 2;
    return 0.299 * rr + 0.587 * gg + 0.114 * bb;
}

}  // namespace

Tensor apply_style(const Tensor& image, const std::string& style) {
    RSSA_CHECK(image.rank() == 3 && image.size(0) == 3, "apply_style expects [3,H,W]");
    if (style == "plain") return image;
    const int h = image.size(1), w = image.size(2);
    Tensor out({3, h, w});
    if (style == "inverted") {
        for (std::int64_t i = 0; i < image.numel(); ++i) out[i] = -image[i];
        return out;
    }
    if (style == "palette") {
        // luma remapped through a dark-navy / amber / cream ramp
        const double c0[3] = {0.08, 0.08, 0.25}, c1[3] = {0.95, 0.62, 0.15}, c2[3] = {0.98, 0.96, 0.88};
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) {
                const double t = luma01(image, r, c);
                double px[3];
                if (t < 0.5)
                    for (int k = 0; k < 3; ++k) px[k] = c0[k] + (c1[k] - c0[k]) * (t * 2.0);
                else
                    for (int k = 0; k < 3; ++k) px[k] = c1[k] + (c2[k] - c1[k]) * ((t - 0.5) * 2.0);
                for (int k = 0; k < 3; ++k) out.at(0, k, r, c) = px[k] * 2.0 - 1.0;
            }
        return out;
    }
    if (style == "sketch") {
        // white background, dark strokes at luma gradients
        auto px = [&](int r, int c) {
            r = std::min(std::max(r, 0), h - 1);
            c = std::min(std::max(c, 0), w - 1);
            return luma01(image, r, c);
        };
        double maxg = 1e-8;
        Tensor mag({h, w});
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) {
                const double dx = px(r, c + 1) - px(r, c - 1);
                const double dy = px(r + 1, c) - px(r - 1, c);
                mag.at(0, 0, r, c) = std::sqrt(dx * dx + dy * dy);
                maxg = std::max(maxg, mag.at(0, 0, r, c));
            }
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) {
                const double v = 1.0 - std::min(1.0, mag.at(0, 0, r, c) / maxg * 2.0);
                for (int k = 0; k < 3; ++k) out.at(0, k, r, c) = v * 2.0 - 1.0;
            }
        return out;
    }
    throw std::invalid_argument("unknown style: " + style);
}

Tensor render_scene(const DatasetSpec& spec, std::uint64_t seed, int index) {
    spec.validate();
    RandomStream rng(hash_combine(hash_combine(seed, 0xda7aULL), static_cast<std::uint64_t>(index)));
    Tensor img = render_supersampled(spec, rng);
    return apply_style(img, spec.style);
}

void generate_toy_source_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir, int count,
                                 std::uint64_t seed) {
    spec.validate();
    RSSA_CHECK(count >= 1, "dataset count must be >= 1");
    std::filesystem::create_directories(out_dir);
    for (int i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "img_%05d.png", i);
        save_png(render_scene(spec, seed, i), out_dir / name);
    }
}

TargetDataset TargetDataset::load(const std::filesystem::path& dir, int resolution) {
    TargetDataset ds;
    std::vector<std::filesystem::path> files;
    if (!std::filesystem::is_directory(dir)) throw std::runtime_error("dataset directory not found: " + dir.string());
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto ext = e.path().extension().string();
        if (ext == ".png" || ext == ".PNG") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    RSSA_CHECK(!files.empty(), "dataset directory has no png files: " + dir.string());
    for (const auto& f : files) {
        Tensor img = load_png(f);
        const int h = img.size(1), w = img.size(2);
        if (h != resolution || w != resolution) {
            const int side = std::min(h, w);
            img = center_crop(img, side, side);
            img = resize_image(img, resolution, resolution);
        }
        ds.images.push_back(std::move(img));
        ds.files.push_back(f.filename().string());
    }
    return ds;
}

}  // namespace rssa
