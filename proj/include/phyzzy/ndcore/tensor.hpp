#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace phyzzy::ndcore {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

// Dense 64-bit tensor handle with shared storage. Values are written once by
// the producing operation; the gradient buffer is allocated lazily during
// backward. Parameters are the only tensors mutated in place (by the
// optimizer), which is safe because training runs are single-threaded.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_values(Shape shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t size() const;
  std::size_t rank() const;
  bool requires_grad() const;

  std::span<const double> values() const;
  std::span<double> mutable_values();
  double scalar_value() const;

  // The gradient buffer is scratch space shared through the handle, so the
  // accessors stay usable on const handles captured inside tape closures.
  bool has_grad() const;
  std::span<const double> grad() const;
  // allocates a zeroed buffer on first use
  std::span<double> grad_buffer() const;
  void zero_grad() const;

  bool same_storage(const Tensor& other) const {
    return impl_ == other.impl_;
  }

 private:
  struct Impl {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Impl> impl_;
};

}  // namespace phyzzy::ndcore
