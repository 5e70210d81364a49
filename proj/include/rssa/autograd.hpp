#pragma once

#include "rssa/tensor.hpp"

#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

namespace rssa::ag {

class Node;
using Var = std::shared_ptr<Node>;

// VJP: given the node's parents, the node itself and the incoming gradient,
// return one gradient Var per parent (nullptr for parents without gradient).
// VJPs are written in terms of the ops below, so running backward with
// recording enabled yields a differentiable gradient graph (double backprop).
using VjpFn = std::function<std::vector<Var>(const std::vector<Var>&, const Var&, const Var&)>;

class Node {
  public:
    Tensor value;
    std::vector<Var> parents;
    VjpFn vjp;  // empty for leaves
    bool requires_grad = false;
    std::int64_t id = 0;

    const std::vector<int>& shape() const { return value.shape(); }
};

// Whether newly created ops record parents/VJPs. Backward with
// create_graph=false runs its VJPs with recording off.
bool grad_enabled();

class NoGradGuard {
  public:
    NoGradGuard();
    ~NoGradGuard();

  private:
    bool prev_;
};

class GradModeGuard {
  public:
    explicit GradModeGuard(bool enabled);
    ~GradModeGuard();

  private:
    bool prev_;
};

Var constant(Tensor t);
Var param(Tensor t);  // leaf with requires_grad
Var make_op(Tensor value, std::vector<Var> parents, VjpFn vjp);

using GradMap = std::unordered_map<const Node*, Var>;

// Reverse-mode sweep from a scalar root. Returns gradients for every
// reachable node that requires grad. With create_graph=true the returned
// gradients are themselves differentiable.
GradMap backward(const Var& root, bool create_graph = false);

const Var& grad_of(const GradMap& grads, const Var& v);

// ---- ops ----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var neg(const Var& a);
Var scale(const Var& a, double c);
Var add_scalar(const Var& a, double c);

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var reshape(const Var& a, std::vector<int> shape);
Var slice(const Var& a, std::vector<int> start, std::vector<int> size);
Var sum_to(const Var& a, std::vector<int> shape);
Var sum_all(const Var& a);   // -> shape [1]
Var mean_all(const Var& a);  // -> shape [1]

Var conv2d(const Var& x, const Var& w, int pad);
Var conv2d_input_grad(const Var& gy, const Var& w, int pad, int h, int w_in);
Var conv2d_weight_grad(const Var& x, const Var& gy, int pad, int kh, int kw);
Var sum_pool2(const Var& x);
Var up2(const Var& x);
Var avg_pool2(const Var& x);

Var lrelu(const Var& x, double slope);
Var tanh_(const Var& x);
Var sigmoid_(const Var& x);
Var softplus_(const Var& x);
Var exp_(const Var& x);
Var log_(const Var& x);
Var sqrt_(const Var& x);
Var square(const Var& x);
Var abs_(const Var& x);
Var clamp(const Var& x, double lo, double hi);
Var clamp_min(const Var& x, double c);
// Huber penalty, quadratic inside |x|<=beta (x^2/(2*beta)), linear outside.
Var huber(const Var& x, double beta);

// Row-wise softmax over entries where mask!=0; masked-out entries are 0.
Var masked_row_softmax(const Var& logits, const Tensor& mask);

double scalar(const Var& v);
Var detach(const Var& v);

}  // namespace rssa::ag
