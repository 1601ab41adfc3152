#pragma once

#include <cstddef>

#include "phyzzy/ndcore/tape.hpp"
#include "phyzzy/ndcore/tensor.hpp"

namespace phyzzy::fuzzy {

// Truth degrees coming out of a saturating network head are clamped this far
// from 0 and 1 so downstream log/product gradients stay finite.
inline constexpr double kTruthEpsilon = 1e-7;

// Sizes of the four truth-vector segments a, b, c, d cut from the generator
// head; the implication width is the longest of the four.
struct FuzzyPartition {
  std::size_t j = 8;
  std::size_t k = 8;
  std::size_t l = 8;
  std::size_t m = 16;

  std::size_t head_width() const { return j + k + l + m; }
  std::size_t implication_width() const;
  void validate() const;
};

// Rank-1 tensor of truth degrees; construction clamps into
// [kTruthEpsilon, 1 - kTruthEpsilon].
class TruthVector {
 public:
  TruthVector(ndcore::Tape& tape, const ndcore::Tensor& raw);
  const ndcore::Tensor& tensor() const { return tensor_; }
  std::size_t length() const { return tensor_.size(); }

 private:
  ndcore::Tensor tensor_;
};

// cyclic repetition of a rank-1 tensor up to the requested length
ndcore::Tensor tile_to(ndcore::Tape& tape, const ndcore::Tensor& v,
                       std::size_t length);

// product conjunction; shorter input is cyclically tiled to the longer
ndcore::Tensor t_norm(ndcore::Tape& tape, const ndcore::Tensor& a,
                      const ndcore::Tensor& b);

// probabilistic-sum disjunction c + d - c*d, with the same tiling rule
ndcore::Tensor t_conorm(ndcore::Tape& tape, const ndcore::Tensor& c,
                        const ndcore::Tensor& d);

// 1 - T + T*S; equal lengths required (tile beforehand)
ndcore::Tensor reichenbach(ndcore::Tape& tape, const ndcore::Tensor& t,
                           const ndcore::Tensor& s);

// sharpened implication obtained by pushing the Reichenbach value through a
// steepness-9 sigmoid rescaled to fix the endpoints 0, 1/2 and 1
ndcore::Tensor sigmoidal_implication(ndcore::Tape& tape,
                                     const ndcore::Tensor& t,
                                     const ndcore::Tensor& s);

// the endpoint-preserving sigmoid map itself, applied to a raw Reichenbach
// value
ndcore::Tensor sigmoidal_sharpen(ndcore::Tape& tape,
                                 const ndcore::Tensor& reichenbach_value);

// product of all entries (symmetric aggregation; order-independent)
ndcore::Tensor product_aggregate(ndcore::Tape& tape, const ndcore::Tensor& i);

}  // namespace phyzzy::fuzzy
