#include "rssa/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rssa {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

std::int64_t shape_numel(const std::vector<int>& s) {
    std::int64_t n = 1;
    for (int d : s) n *= d;
    return n;
}

// Pad a shape on the left with 1s to rank 4 and compute element strides.
struct Bcast4 {
    std::int64_t dim[4];
    std::int64_t stride[4];
};

Bcast4 make_bcast(const std::vector<int>& shape, const std::vector<int>& out) {
    Bcast4 r{};
    const int off = 4 - static_cast<int>(shape.size());
    std::int64_t s = 1;
    std::int64_t strides[4] = {0, 0, 0, 0};
    for (int i = static_cast<int>(shape.size()) - 1; i >= 0; --i) {
        strides[i + off] = s;
        s *= shape[i];
    }
    const int ooff = 4 - static_cast<int>(out.size());
    for (int i = 0; i < 4; ++i) {
        int od = (i >= ooff) ? out[i - ooff] : 1;
        int sd = (i >= off && (i - off) < static_cast<int>(shape.size())) ? shape[i - off] : 1;
        r.dim[i] = od;
        r.stride[i] = (sd == od) ? strides[i] : 0;
        if (sd != od && sd != 1) tensor_fail("broadcast mismatch");
    }
    return r;
}

template <class F>
Tensor bcast_binary(const Tensor& a, const Tensor& b, F f) {
    if (a.same_shape(b)) {
        Tensor out(a.shape());
        const double* pa = a.data();
        const double* pb = b.data();
        double* po = out.data();
        const std::int64_t n = a.numel();
        for (std::int64_t i = 0; i < n; ++i) po[i] = f(pa[i], pb[i]);
        return out;
    }
    std::vector<int> os = broadcast_shape(a.shape(), b.shape());
    Tensor out(os);
    Bcast4 ba = make_bcast(a.shape(), os);
    Bcast4 bb = make_bcast(b.shape(), os);
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    std::int64_t idx = 0;
    for (std::int64_t i0 = 0; i0 < ba.dim[0]; ++i0)
        for (std::int64_t i1 = 0; i1 < ba.dim[1]; ++i1)
            for (std::int64_t i2 = 0; i2 < ba.dim[2]; ++i2) {
                const double* ra = pa + i0 * ba.stride[0] + i1 * ba.stride[1] + i2 * ba.stride[2];
                const double* rb = pb + i0 * bb.stride[0] + i1 * bb.stride[1] + i2 * bb.stride[2];
                for (std::int64_t i3 = 0; i3 < ba.dim[3]; ++i3)
                    po[idx++] = f(ra[i3 * ba.stride[3]], rb[i3 * bb.stride[3]]);
            }
    return out;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    for (int d : shape_) RSSA_CHECK(d > 0, "tensor dims must be positive");
    RSSA_CHECK(shape_.size() <= 4, "tensor rank > 4");
    data_.assign(static_cast<std::size_t>(shape_numel(shape_)), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    RSSA_CHECK(shape_.size() <= 4, "tensor rank > 4");
    RSSA_CHECK(static_cast<std::int64_t>(data_.size()) == shape_numel(shape_), "tensor data/shape size mismatch");
}

Tensor Tensor::full(std::vector<int> shape, double v) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
}

std::int64_t Tensor::numel() const { return static_cast<std::int64_t>(data_.size()); }

double& Tensor::at(int n, int c, int h, int w) {
    const int r = rank();
    std::int64_t idx = 0;
    int coords[4] = {n, c, h, w};
    for (int i = 0; i < r; ++i) idx = idx * shape_[i] + coords[4 - r + i];
    return data_[static_cast<std::size_t>(idx)];
}

double Tensor::at(int n, int c, int h, int w) const { return const_cast<Tensor*>(this)->at(n, c, h, w); }

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

double Tensor::item() const {
    RSSA_CHECK(numel() == 1, "item() on non-scalar tensor");
    return data_[0];
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
    os << "]";
    return os.str();
}

void tensor_fail(const std::string& msg) { throw std::invalid_argument("rssa: " + msg); }

std::vector<int> broadcast_shape(const std::vector<int>& a, const std::vector<int>& b) {
    const int r = std::max(a.size(), b.size());
    std::vector<int> out(r, 1);
    for (int i = 0; i < r; ++i) {
        int da = (i >= r - static_cast<int>(a.size())) ? a[i - (r - a.size())] : 1;
        int db = (i >= r - static_cast<int>(b.size())) ? b[i - (r - b.size())] : 1;
        if (da != db && da != 1 && db != 1) tensor_fail("incompatible broadcast shapes");
        out[i] = std::max(da, db);
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) { return bcast_binary(a, b, [](double x, double y) { return x + y; }); }
Tensor sub(const Tensor& a, const Tensor& b) { return bcast_binary(a, b, [](double x, double y) { return x - y; }); }
Tensor mul(const Tensor& a, const Tensor& b) { return bcast_binary(a, b, [](double x, double y) { return x * y; }); }
Tensor div(const Tensor& a, const Tensor& b) { return bcast_binary(a, b, [](double x, double y) { return x / y; }); }

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor scale(const Tensor& a, double c) {
    Tensor out(a.shape());
    const std::int64_t n = a.numel();
    for (std::int64_t i = 0; i < n; ++i) out[i] = a[i] * c;
    return out;
}

Tensor add_scalar(const Tensor& a, double c) {
    Tensor out(a.shape());
    const std::int64_t n = a.numel();
    for (std::int64_t i = 0; i < n; ++i) out[i] = a[i] + c;
    return out;
}

Tensor map_unary(const Tensor& a, double (*f)(double)) {
    Tensor out(a.shape());
    const std::int64_t n = a.numel();
    for (std::int64_t i = 0; i < n; ++i) out[i] = f(a[i]);
    return out;
}

Tensor sum_to(const Tensor& a, const std::vector<int>& shape) {
    if (a.shape() == shape) return a;
    Tensor out(shape);
    Bcast4 bo = make_bcast(shape, a.shape());  // out broadcast over a's index space
    const double* pa = a.data();
    double* po = out.data();
    Bcast4 ba = make_bcast(a.shape(), a.shape());
    std::int64_t idx = 0;
    for (std::int64_t i0 = 0; i0 < ba.dim[0]; ++i0)
        for (std::int64_t i1 = 0; i1 < ba.dim[1]; ++i1)
            for (std::int64_t i2 = 0; i2 < ba.dim[2]; ++i2) {
                double* ro = po + i0 * bo.stride[0] + i1 * bo.stride[1] + i2 * bo.stride[2];
                for (std::int64_t i3 = 0; i3 < ba.dim[3]; ++i3) ro[i3 * bo.stride[3]] += pa[idx++];
            }
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    RSSA_CHECK(a.rank() == 2 && b.rank() == 2, "matmul expects rank-2 tensors");
    RSSA_CHECK(a.size(1) == b.size(0), "matmul inner dim mismatch");
    Tensor out({a.size(0), b.size(1)});
    ConstMatMap ma(a.data(), a.size(0), a.size(1));
    ConstMatMap mb(b.data(), b.size(0), b.size(1));
    MatMap mo(out.data(), out.size(0), out.size(1));
    mo.noalias() = ma * mb;
    return out;
}

Tensor transpose2d(const Tensor& a) {
    RSSA_CHECK(a.rank() == 2, "transpose2d expects rank-2");
    Tensor out({a.size(1), a.size(0)});
    ConstMatMap ma(a.data(), a.size(0), a.size(1));
    MatMap mo(out.data(), out.size(0), out.size(1));
    mo = ma.transpose();
    return out;
}

Tensor reshape(const Tensor& a, std::vector<int> shape) {
    RSSA_CHECK(shape_numel(shape) == a.numel(), "reshape numel mismatch");
    Tensor out = a;
    return Tensor(std::move(shape), std::vector<double>(out.data(), out.data() + out.numel()));
}

Tensor slice(const Tensor& a, const std::vector<int>& start, const std::vector<int>& size) {
    RSSA_CHECK(static_cast<int>(start.size()) == a.rank() && start.size() == size.size(), "slice rank mismatch");
    for (int i = 0; i < a.rank(); ++i)
        RSSA_CHECK(start[i] >= 0 && size[i] >= 1 && start[i] + size[i] <= a.size(i), "slice out of range");
    Tensor out(size);
    // generic rank<=4 copy
    int r = a.rank();
    auto src_shape = a.shape();
    std::int64_t sstr[4] = {1, 1, 1, 1};
    for (int i = r - 2; i >= 0; --i) sstr[i] = sstr[i + 1] * src_shape[i + 1];
    int d[4] = {1, 1, 1, 1};
    int s0[4] = {0, 0, 0, 0};
    for (int i = 0; i < r; ++i) {
        d[4 - r + i] = size[i];
        s0[4 - r + i] = start[i];
    }
    std::int64_t str[4] = {0, 0, 0, 0};
    for (int i = 0; i < r; ++i) str[4 - r + i] = sstr[i];
    const double* pa = a.data();
    double* po = out.data();
    std::int64_t idx = 0;
    for (int i0 = 0; i0 < d[0]; ++i0)
        for (int i1 = 0; i1 < d[1]; ++i1)
            for (int i2 = 0; i2 < d[2]; ++i2)
                for (int i3 = 0; i3 < d[3]; ++i3)
                    po[idx++] = pa[(i0 + s0[0]) * str[0] + (i1 + s0[1]) * str[1] + (i2 + s0[2]) * str[2] +
                                   (i3 + s0[3]) * str[3]];
    return out;
}

Tensor embed_slice(const Tensor& a, const std::vector<int>& shape, const std::vector<int>& start) {
    Tensor out(shape);
    int r = out.rank();
    RSSA_CHECK(a.rank() == r && static_cast<int>(start.size()) == r, "embed_slice rank mismatch");
    std::int64_t ostr[4] = {1, 1, 1, 1};
    for (int i = r - 2; i >= 0; --i) ostr[i] = ostr[i + 1] * shape[i + 1];
    int d[4] = {1, 1, 1, 1};
    int s0[4] = {0, 0, 0, 0};
    std::int64_t str[4] = {0, 0, 0, 0};
    for (int i = 0; i < r; ++i) {
        d[4 - r + i] = a.size(i);
        s0[4 - r + i] = start[i];
        str[4 - r + i] = ostr[i];
    }
    const double* pa = a.data();
    double* po = out.data();
    std::int64_t idx = 0;
    for (int i0 = 0; i0 < d[0]; ++i0)
        for (int i1 = 0; i1 < d[1]; ++i1)
            for (int i2 = 0; i2 < d[2]; ++i2)
                for (int i3 = 0; i3 < d[3]; ++i3)
                    po[(i0 + s0[0]) * str[0] + (i1 + s0[1]) * str[1] + (i2 + s0[2]) * str[2] + (i3 + s0[3]) * str[3]] =
                        pa[idx++];
    return out;
}

namespace {

// im2col for one sample: x [C,H,W] -> cols [C*KH*KW, OH*OW], zero padding.
void im2col(const double* x, int C, int H, int W, int KH, int KW, int pad, int OH, int OW, double* cols) {
    for (int c = 0; c < C; ++c) {
        for (int kh = 0; kh < KH; ++kh) {
            for (int kw = 0; kw < KW; ++kw) {
                double* row = cols + ((static_cast<std::int64_t>(c) * KH + kh) * KW + kw) * OH * OW;
                for (int oh = 0; oh < OH; ++oh) {
                    const int ih = oh - pad + kh;
                    if (ih < 0 || ih >= H) {
                        std::fill(row + oh * OW, row + (oh + 1) * OW, 0.0);
                        continue;
                    }
                    const double* src = x + (static_cast<std::int64_t>(c) * H + ih) * W;
                    for (int ow = 0; ow < OW; ++ow) {
                        const int iw = ow - pad + kw;
                        row[oh * OW + ow] = (iw < 0 || iw >= W) ? 0.0 : src[iw];
                    }
                }
            }
        }
    }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, int pad) {
    RSSA_CHECK(x.rank() == 4 && w.rank() == 4, "conv2d expects NCHW input and OIHW weight");
    const int N = x.size(0), C = x.size(1), H = x.size(2), W = x.size(3);
    const int OC = w.size(0), KH = w.size(2), KW = w.size(3);
    RSSA_CHECK(w.size(1) == C, "conv2d channel mismatch");
    const int OH = H + 2 * pad - KH + 1;
    const int OW = W + 2 * pad - KW + 1;
    RSSA_CHECK(OH >= 1 && OW >= 1, "conv2d output size must be positive");
    Tensor out({N, OC, OH, OW});
    const int K = C * KH * KW;
    std::vector<double> cols(static_cast<std::size_t>(K) * OH * OW);
    ConstMatMap wm(w.data(), OC, K);
    for (int n = 0; n < N; ++n) {
        im2col(x.data() + static_cast<std::int64_t>(n) * C * H * W, C, H, W, KH, KW, pad, OH, OW, cols.data());
        ConstMatMap cm(cols.data(), K, OH * OW);
        MatMap om(out.data() + static_cast<std::int64_t>(n) * OC * OH * OW, OC, OH * OW);
        om.noalias() = wm * cm;
    }
    return out;
}

Tensor conv2d_input_grad(const Tensor& gy, const Tensor& w, int pad, int h, int w_in) {
    RSSA_CHECK(gy.rank() == 4 && w.rank() == 4, "conv2d_input_grad expects rank-4");
    const int N = gy.size(0), OC = gy.size(1), OH = gy.size(2), OW = gy.size(3);
    const int IC = w.size(1), KH = w.size(2), KW = w.size(3);
    RSSA_CHECK(w.size(0) == OC, "conv2d_input_grad channel mismatch");
    // full correlation with flipped kernels, transposed in/out channels
    Tensor wf({IC, OC, KH, KW});
    for (int oc = 0; oc < OC; ++oc)
        for (int ic = 0; ic < IC; ++ic)
            for (int kh = 0; kh < KH; ++kh)
                for (int kw = 0; kw < KW; ++kw)
                    wf.at(ic, oc, KH - 1 - kh, KW - 1 - kw) = w.at(oc, ic, kh, kw);
    const int fpad = KH - 1 - pad;
    Tensor dx = conv2d(gy, wf, fpad);
    RSSA_CHECK(dx.size(2) == h && dx.size(3) == w_in, "conv2d_input_grad size mismatch");
    return dx;
}

Tensor conv2d_weight_grad(const Tensor& x, const Tensor& gy, int pad, int kh, int kw) {
    const int N = x.size(0), C = x.size(1), H = x.size(2), W = x.size(3);
    const int OC = gy.size(1), OH = gy.size(2), OW = gy.size(3);
    RSSA_CHECK(gy.size(0) == N, "conv2d_weight_grad batch mismatch");
    Tensor dw({OC, C, kh, kw});
    const int K = C * kh * kw;
    std::vector<double> cols(static_cast<std::size_t>(K) * OH * OW);
    MatMap dwm(dw.data(), OC, K);
    dwm.setZero();
    for (int n = 0; n < N; ++n) {
        im2col(x.data() + static_cast<std::int64_t>(n) * C * H * W, C, H, W, kh, kw, pad, OH, OW, cols.data());
        ConstMatMap cm(cols.data(), K, OH * OW);
        ConstMatMap gm(gy.data() + static_cast<std::int64_t>(n) * OC * OH * OW, OC, OH * OW);
        dwm.noalias() += gm * cm.transpose();
    }
    return dw;
}

Tensor sum_pool2(const Tensor& x) {
    RSSA_CHECK(x.rank() == 4, "sum_pool2 expects NCHW");
    const int N = x.size(0), C = x.size(1), H = x.size(2), W = x.size(3);
    RSSA_CHECK(H % 2 == 0 && W % 2 == 0, "sum_pool2 needs even spatial dims");
    Tensor out({N, C, H / 2, W / 2});
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
            for (int h = 0; h < H / 2; ++h)
                for (int w = 0; w < W / 2; ++w)
                    out.at(n, c, h, w) = x.at(n, c, 2 * h, 2 * w) + x.at(n, c, 2 * h + 1, 2 * w) +
                                         x.at(n, c, 2 * h, 2 * w + 1) + x.at(n, c, 2 * h + 1, 2 * w + 1);
    return out;
}

Tensor up2(const Tensor& x) {
    RSSA_CHECK(x.rank() == 4, "up2 expects NCHW");
    const int N = x.size(0), C = x.size(1), H = x.size(2), W = x.size(3);
    Tensor out({N, C, H * 2, W * 2});
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
            for (int h = 0; h < 2 * H; ++h)
                for (int w = 0; w < 2 * W; ++w) out.at(n, c, h, w) = x.at(n, c, h / 2, w / 2);
    return out;
}

double dot_all(const Tensor& a, const Tensor& b) {
    RSSA_CHECK(a.numel() == b.numel(), "dot_all size mismatch");
    double s = 0;
    for (std::int64_t i = 0; i < a.numel(); ++i) s += a[i] * b[i];
    return s;
}

double sum_all(const Tensor& a) {
    double s = 0;
    for (std::int64_t i = 0; i < a.numel(); ++i) s += a[i];
    return s;
}

double max_abs(const Tensor& a) {
    double m = 0;
    for (std::int64_t i = 0; i < a.numel(); ++i) m = std::max(m, std::fabs(a[i]));
    return m;
}

}  // namespace rssa
