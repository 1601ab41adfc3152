#include "phyzzy/eval/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace phyzzy::eval {

namespace {

void check_inputs(const char* op, std::span<const double> truth,
                  std::span<const double> predicted) {
  if (truth.empty()) {
    throw std::invalid_argument(std::string(op) + ": empty input");
  }
  if (truth.size() != predicted.size()) {
    throw std::invalid_argument(std::string(op) + ": length mismatch " +
                                std::to_string(truth.size()) + " vs " +
                                std::to_string(predicted.size()));
  }
}

}  // namespace

double mae(std::span<const double> truth, std::span<const double> predicted) {
  check_inputs("mae", truth, predicted);
  double acc = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    acc += std::abs(truth[i] - predicted[i]);
  }
  return acc / static_cast<double>(truth.size());
}

double mse(std::span<const double> truth, std::span<const double> predicted) {
  check_inputs("mse", truth, predicted);
  double acc = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double diff = truth[i] - predicted[i];
    acc += diff * diff;
  }
  return acc / static_cast<double>(truth.size());
}

}  // namespace phyzzy::eval
