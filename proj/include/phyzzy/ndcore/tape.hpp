#pragma once

#include <functional>
#include <vector>

#include "phyzzy/ndcore/tensor.hpp"

namespace phyzzy::ndcore {

// Reverse-mode recorder. Every operation appends one node holding the
// closure that routes the output gradient back to its inputs; nodes are in
// execution order, so running them in reverse is a valid reverse topological
// order. backward() consumes the recorded nodes.
class Tape {
 public:
  // elementwise
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor div(const Tensor& a, const Tensor& b);
  Tensor add_scalar(const Tensor& a, double c);
  Tensor mul_scalar(const Tensor& a, double c);
  Tensor log(const Tensor& a);
  Tensor exp(const Tensor& a);
  Tensor sqrt(const Tensor& a);
  Tensor sigmoid(const Tensor& a);
  Tensor leaky_relu(const Tensor& a, double slope = 0.01);
  Tensor clamp(const Tensor& a, double lo, double hi);

  // structure
  // [m,k]x[k,n] -> [m,n]; [m,k]x[k] -> [m]
  Tensor matmul(const Tensor& a, const Tensor& b);
  // x [c_in, len], w [c_out, c_in, k], bias [c_out] -> [c_out, len_out]
  Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& bias,
                std::size_t stride);
  Tensor concat(const std::vector<Tensor>& parts);      // rank-1 inputs
  Tensor slice(const Tensor& a, std::size_t start, std::size_t len);
  Tensor tile_cyclic(const Tensor& a, std::size_t length);
  Tensor row_mean(const Tensor& a);                     // [r,c] -> [r]

  // reductions to a scalar
  Tensor sum(const Tensor& a);
  Tensor mean(const Tensor& a);
  Tensor product(const Tensor& a);

  // d(loss)/d(leaf) for every requires_grad leaf; loss must be scalar.
  void backward(const Tensor& loss);
  void reset();
  std::size_t node_count() const { return nodes_.size(); }

  bool grad_enabled() const { return grad_enabled_; }

  // forward-only scope: operations inside compute values but record nothing
  class NoGradGuard {
   public:
    explicit NoGradGuard(Tape& tape) : tape_(tape), prev_(tape.grad_enabled_) {
      tape_.grad_enabled_ = false;
    }
    ~NoGradGuard() { tape_.grad_enabled_ = prev_; }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

   private:
    Tape& tape_;
    bool prev_;
  };

 private:
  friend class NoGradGuard;
  struct Node {
    const char* op;
    std::function<void()> backward;
  };
  std::vector<Node> nodes_;
  bool grad_enabled_ = true;

  Tensor make_output(Shape shape, const Tensor& a);
  Tensor make_output(Shape shape, const Tensor& a, const Tensor& b);
  Tensor make_output(Shape shape, const Tensor& a, const Tensor& b,
                     const Tensor& c);
  void record(const char* op, std::function<void()> fn);
};

}  // namespace phyzzy::ndcore
