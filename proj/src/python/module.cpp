#include "rssa/compression.hpp"
#include "rssa/generator.hpp"
#include "rssa/scs.hpp"
#include "rssa/structural.hpp"
#include "rssa/train.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;

namespace {

rssa::Tensor tensor_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    std::vector<int> shape;
    for (py::ssize_t i = 0; i < arr.ndim(); ++i) shape.push_back(static_cast<int>(arr.shape(i)));
    std::vector<double> data(arr.data(), arr.data() + arr.size());
    return rssa::Tensor(std::move(shape), std::move(data));
}

py::array_t<double> array_from_tensor(const rssa::Tensor& t) {
    std::vector<py::ssize_t> shape;
    for (int i = 0; i < t.rank(); ++i) shape.push_back(t.size(i));
    py::array_t<double> out(shape);
    std::copy(t.data(), t.data() + t.numel(), out.mutable_data());
    return out;
}

std::vector<rssa::FeatureMapStack> stacks_from_lists(const std::vector<std::vector<py::array_t<double>>>& lists) {
    std::vector<rssa::FeatureMapStack> out;
    for (const auto& stack : lists) {
        rssa::FeatureMapStack s;
        for (const auto& m : stack) s.maps.push_back(tensor_from_array(m));
        out.push_back(std::move(s));
    }
    return out;
}

rssa::StructuralLossConfig structural_config(double alpha, double beta, int output_resolution) {
    rssa::StructuralLossConfig cfg;
    cfg.alpha = alpha;
    cfg.beta = beta;
    cfg.output_resolution = output_resolution;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_rssa, m) {
    m.doc() = "few-shot generator adaption with spatial structural alignment (C++ core)";

    m.def(
        "sample_latent",
        [](int count, std::uint64_t seed, int dim) {
            auto codes = rssa::sample_latent(count, seed, dim);
            py::array_t<double> out({static_cast<py::ssize_t>(count), static_cast<py::ssize_t>(dim)});
            for (int i = 0; i < count; ++i)
                std::copy(codes[i].data(), codes[i].data() + dim, out.mutable_data() + i * dim);
            return out;
        },
        py::arg("count"), py::arg("seed"), py::arg("dim") = 64);

    m.def(
        "self_correlation",
        [](const py::array_t<double>& fmap) {
            return array_from_tensor(rssa::self_correlation(tensor_from_array(fmap)).m);
        },
        py::arg("feature_map"), "cosine self-correlation matrix [P,P] of a [C,H,W] map");

    m.def(
        "mutual_correlation",
        [](const py::array_t<double>& fj, const py::array_t<double>& fk, int delta) {
            return array_from_tensor(
                rssa::mutual_correlation(tensor_from_array(fj), tensor_from_array(fk), delta).probs);
        },
        py::arg("f_j"), py::arg("f_k"), py::arg("delta"));

    m.def(
        "scc_loss",
        [](const std::vector<py::array_t<double>>& src, const std::vector<py::array_t<double>>& tgt, double alpha,
           double beta, int output_resolution) {
            rssa::FeatureMapStack s, t;
            for (const auto& x : src) s.maps.push_back(tensor_from_array(x));
            for (const auto& x : tgt) t.maps.push_back(tensor_from_array(x));
            return rssa::scc_loss(s, t, structural_config(alpha, beta, output_resolution));
        },
        py::arg("source"), py::arg("target"), py::arg("alpha") = 1.0, py::arg("beta") = 1.0,
        py::arg("output_resolution") = 32);

    m.def(
        "dcc_loss",
        [](const std::vector<std::vector<py::array_t<double>>>& src,
           const std::vector<std::vector<py::array_t<double>>>& tgt, double alpha, double beta,
           int output_resolution) {
            return rssa::dcc_loss(stacks_from_lists(src), stacks_from_lists(tgt),
                                  structural_config(alpha, beta, output_resolution));
        },
        py::arg("source"), py::arg("target"), py::arg("alpha") = 1.0, py::arg("beta") = 1.0,
        py::arg("output_resolution") = 32);

    m.def(
        "project_code",
        [](const py::array_t<double>& w, const py::array_t<double>& basis_columns, double alpha, double lam) {
            rssa::Tensor wt = tensor_from_array(w);
            rssa::Tensor bt = tensor_from_array(basis_columns);  // [d, n]
            rssa::InvertedCodeSet codes;
            const int d = bt.size(0), n = bt.size(1);
            for (int i = 0; i < n; ++i) {
                rssa::StyleCodeStack stack;
                rssa::Tensor col({d});
                for (int j = 0; j < d; ++j) col[j] = bt[static_cast<std::int64_t>(j) * n + i];
                stack.codes.push_back(col);
                codes.codes.push_back(stack);
                codes.final_error.push_back(0.0);
                codes.diverged.push_back(false);
            }
            rssa::SubspaceBasis basis = rssa::build_subspace(codes, lam);
            return array_from_tensor(rssa::project_code(wt, basis.layers[0], alpha));
        },
        py::arg("w"), py::arg("basis_columns"), py::arg("alpha"), py::arg("lam") = 1e-6,
        "least-squares projection onto span(columns), rescaled and blended by alpha");

    m.def("resample_schedule", [](int layers) { return rssa::resample_schedule(layers).alpha; }, py::arg("layers"));

    m.def(
        "edge_map",
        [](const py::array_t<double>& image) {
            return array_from_tensor(rssa::edge_map(tensor_from_array(image), rssa::EdgeDetector::sobel()));
        },
        py::arg("image"), "gradient-magnitude edge map of a [3,H,W] image in [-1,1]");

    m.def(
        "dice",
        [](const py::array_t<double>& a, const py::array_t<double>& b) {
            return rssa::dice(tensor_from_array(a), tensor_from_array(b));
        },
        py::arg("a"), py::arg("b"));

    py::class_<rssa::ScsReport>(m, "ScsReport")
        .def_readonly("scores", &rssa::ScsReport::scores)
        .def_readonly("mean", &rssa::ScsReport::mean)
        .def_readonly("samples", &rssa::ScsReport::samples)
        .def_readonly("detector", &rssa::ScsReport::detector)
        .def_readonly("seed", &rssa::ScsReport::seed)
        .def_readonly("projection", &rssa::ScsReport::projection);

    m.def(
        "scs_from_checkpoints",
        [](const std::string& source_ckpt, const std::string& adapted_ckpt, int samples, std::uint64_t seed,
           bool projection) {
            rssa::SourceModel src = rssa::load_source_checkpoint(source_ckpt);
            rssa::AdaptedCheckpoint tgt = rssa::load_adapted_checkpoint(adapted_ckpt);
            const rssa::ProjectionContext* proj = (projection && tgt.projection) ? &*tgt.projection : nullptr;
            return rssa::scs_score(src.g, tgt.g_t, samples, seed, rssa::EdgeDetector::sobel(), proj);
        },
        py::arg("source_checkpoint"), py::arg("adapted_checkpoint"), py::arg("samples") = 500, py::arg("seed") = 0,
        py::arg("projection") = true);
}
