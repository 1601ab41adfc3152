#pragma once

#include <cstddef>
#include <vector>

#include "phyzzy/ndcore/tensor.hpp"

namespace phyzzy::ndcore {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam over a fixed parameter set. Moment buffers match the
// parameter shapes; parameters are updated in place from their grad buffers.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig config);

  void step();
  void zero_grad();
  std::size_t step_count() const { return step_count_; }
  const AdamConfig& config() const { return config_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
  AdamConfig config_;
  std::size_t step_count_ = 0;
};

}  // namespace phyzzy::ndcore
