#include "phyzzy/fuzzy/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phyzzy::fuzzy {

using ndcore::Tape;
using ndcore::Tensor;

std::size_t FuzzyPartition::implication_width() const {
  return std::max(std::max(j, k), std::max(l, m));
}

void FuzzyPartition::validate() const {
  if (j == 0 || k == 0 || l == 0 || m == 0) {
    throw std::invalid_argument("fuzzy partition: all four segments must be "
                                "non-empty");
  }
}

TruthVector::TruthVector(Tape& tape, const Tensor& raw)
    : tensor_(tape.clamp(raw, kTruthEpsilon, 1.0 - kTruthEpsilon)) {
  if (raw.rank() != 1) {
    throw std::invalid_argument("truth vector: rank-1 tensor required, got " +
                                ndcore::shape_str(raw.shape()));
  }
}

Tensor tile_to(Tape& tape, const Tensor& v, std::size_t length) {
  if (v.size() == length) return v;
  return tape.tile_cyclic(v, length);
}

Tensor t_norm(Tape& tape, const Tensor& a, const Tensor& b) {
  const std::size_t n = std::max(a.size(), b.size());
  return tape.mul(tile_to(tape, a, n), tile_to(tape, b, n));
}

Tensor t_conorm(Tape& tape, const Tensor& c, const Tensor& d) {
  const std::size_t n = std::max(c.size(), d.size());
  const Tensor ct = tile_to(tape, c, n);
  const Tensor dt = tile_to(tape, d, n);
  return tape.sub(tape.add(ct, dt), tape.mul(ct, dt));
}

Tensor reichenbach(Tape& tape, const Tensor& t, const Tensor& s) {
  if (t.size() != s.size()) {
    throw std::invalid_argument("reichenbach: lengths differ, " +
                                ndcore::shape_str(t.shape()) + " vs " +
                                ndcore::shape_str(s.shape()) +
                                "; tile before applying");
  }
  return tape.add_scalar(tape.sub(tape.mul(t, s), t), 1.0);
}

Tensor sigmoidal_sharpen(Tape& tape, const Tensor& reichenbach_value) {
  static const double kScaleUp = 1.0 + std::exp(4.5);
  static const double kScaleDown = 1.0 / (std::exp(4.5) - 1.0);
  const Tensor centered =
      tape.mul_scalar(tape.add_scalar(reichenbach_value, -0.5), 9.0);
  const Tensor squashed = tape.sigmoid(centered);
  return tape.mul_scalar(
      tape.add_scalar(tape.mul_scalar(squashed, kScaleUp), -1.0), kScaleDown);
}

Tensor sigmoidal_implication(Tape& tape, const Tensor& t, const Tensor& s) {
  return sigmoidal_sharpen(tape, reichenbach(tape, t, s));
}

Tensor product_aggregate(Tape& tape, const Tensor& i) {
  return tape.product(i);
}

}  // namespace phyzzy::fuzzy
