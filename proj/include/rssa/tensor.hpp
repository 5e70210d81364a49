#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rssa {

// Dense row-major tensor of doubles, rank 0..4. Shape {} is a scalar with
// one element. Value semantics; copies are real copies.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);
    Tensor(std::vector<int> shape, std::vector<double> data);

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, double v);
    static Tensor ones(std::vector<int> shape) { return full(std::move(shape), 1.0); }
    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    int rank() const { return static_cast<int>(shape_.size()); }
    int size(int axis) const { return shape_.at(axis); }
    std::int64_t numel() const;
    const std::vector<int>& shape() const { return shape_; }
    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

    // 4-d accessor (n,c,h,w); lower-rank tensors use the trailing axes.
    double& at(int n, int c, int h, int w);
    double at(int n, int c, int h, int w) const;

    bool all_finite() const;
    double item() const;

    std::string shape_str() const;

  private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

[[noreturn]] void tensor_fail(const std::string& msg);

#define RSSA_CHECK(cond, msg)                  \
    do {                                       \
        if (!(cond)) ::rssa::tensor_fail(msg); \
    } while (0)

// ---- raw (graph-free) tensor math used by the autograd primitives ----

std::vector<int> broadcast_shape(const std::vector<int>& a, const std::vector<int>& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);
Tensor map_unary(const Tensor& a, double (*f)(double));

// Sum entries so the result has `shape`, which must be broadcast-compatible
// with a.shape() (each target axis equals the source axis or 1).
Tensor sum_to(const Tensor& a, const std::vector<int>& shape);

Tensor matmul(const Tensor& a, const Tensor& b);     // [m,k]x[k,n]
Tensor transpose2d(const Tensor& a);                 // [m,n]->[n,m]
Tensor reshape(const Tensor& a, std::vector<int> shape);
Tensor slice(const Tensor& a, const std::vector<int>& start, const std::vector<int>& size);
// Adjoint of slice: place `a` into a zero tensor of `shape` at `start`.
Tensor embed_slice(const Tensor& a, const std::vector<int>& shape, const std::vector<int>& start);

// Convolutions, stride 1, square zero padding, NCHW / OIHW layouts.
Tensor conv2d(const Tensor& x, const Tensor& w, int pad);
Tensor conv2d_input_grad(const Tensor& gy, const Tensor& w, int pad, int h, int w_in);
Tensor conv2d_weight_grad(const Tensor& x, const Tensor& gy, int pad, int kh, int kw);

Tensor sum_pool2(const Tensor& x);  // [N,C,H,W] -> [N,C,H/2,W/2], block sums
Tensor up2(const Tensor& x);        // adjoint of sum_pool2 (2x nearest repeat)

double dot_all(const Tensor& a, const Tensor& b);
double sum_all(const Tensor& a);
double max_abs(const Tensor& a);

}  // namespace rssa
