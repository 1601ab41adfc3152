#include "phyzzy/ndcore/tensor.hpp"

#include <sstream>
#include <stdexcept>

namespace phyzzy::ndcore {

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ",";
    out << shape[i];
  }
  out << "]";
  return out.str();
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

static void check_shape(const Shape& shape) {
  if (shape.empty()) throw std::invalid_argument("tensor: empty shape");
  for (std::size_t d : shape) {
    if (d == 0) {
      throw std::invalid_argument("tensor: zero extent in shape " +
                                  shape_str(shape));
    }
  }
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  check_shape(shape);
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  t.impl_->values.assign(shape_numel(shape), value);
  t.impl_->shape = std::move(shape);
  t.impl_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::from_values(Shape shape, std::vector<double> values,
                           bool requires_grad) {
  check_shape(shape);
  if (shape_numel(shape) != values.size()) {
    throw std::invalid_argument("tensor: " + std::to_string(values.size()) +
                                " values do not fill shape " +
                                shape_str(shape));
  }
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  t.impl_->shape = std::move(shape);
  t.impl_->values = std::move(values);
  t.impl_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_values({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return impl_->shape; }

std::size_t Tensor::size() const { return impl_->values.size(); }

std::size_t Tensor::rank() const { return impl_->shape.size(); }

bool Tensor::requires_grad() const { return impl_->requires_grad; }

std::span<const double> Tensor::values() const { return impl_->values; }

std::span<double> Tensor::mutable_values() { return impl_->values; }

double Tensor::scalar_value() const {
  if (size() != 1) {
    throw std::invalid_argument("tensor: scalar_value on shape " +
                                shape_str(shape()));
  }
  return impl_->values[0];
}

bool Tensor::has_grad() const { return !impl_->grad.empty(); }

std::span<const double> Tensor::grad() const { return impl_->grad; }

std::span<double> Tensor::grad_buffer() const {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->values.size(), 0.0);
  return impl_->grad;
}

void Tensor::zero_grad() const {
  impl_->grad.assign(impl_->values.size(), 0.0);
}

}  // namespace phyzzy::ndcore
