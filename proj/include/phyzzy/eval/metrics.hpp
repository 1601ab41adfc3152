#pragma once

#include <span>

namespace phyzzy::eval {

// mean absolute difference; equal non-empty lengths required
double mae(std::span<const double> truth, std::span<const double> predicted);

// mean squared difference
double mse(std::span<const double> truth, std::span<const double> predicted);

}  // namespace phyzzy::eval
