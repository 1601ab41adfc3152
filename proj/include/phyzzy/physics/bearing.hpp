#pragma once

#include <filesystem>
#include <string>

#include "phyzzy/ndcore/tape.hpp"
#include "phyzzy/ndcore/tensor.hpp"

namespace phyzzy::physics {

struct BearingGeometry {
  double pitch_diameter_m = 0.0;
  double ball_diameter_m = 0.0;
  double shaft_hz = 0.0;
  double sampling_hz = 0.0;
  double fault_depth_m = 0.0;

  void validate() const;
};

struct SpallGrowthConfig {
  double growth_rate = 0.001;     // per timestamp
  double sp_at_failure = 600.0;   // samples defining the failure width
  double t_max = 6324.0;          // normalization constant in timestamps

  void validate() const;
};

// raceway spall width for a given entry-to-impact sample count
double spall_width(const BearingGeometry& geom, double sp);

// numerical floor keeping the width logarithm finite for healthy windows;
// one tenth of the single-sample width, far below any detected fault
double spall_floor(const BearingGeometry& geom);

// remaining life from exponential spall growth, normalized into [0,1].
// weight is the fuzzy confidence multiplying the failure width.
double rul_exponential(double spall_width_m, double weight,
                       const BearingGeometry& geom,
                       const SpallGrowthConfig& config);

// same computation expressed through tape primitives so the weight keeps its
// gradient path inside the generator's backward pass
ndcore::Tensor rul_exponential(ndcore::Tape& tape,
                               const ndcore::Tensor& weight,
                               double spall_width_m,
                               const BearingGeometry& geom,
                               const SpallGrowthConfig& config);

struct PhysicsConfig {
  BearingGeometry geometry;
  SpallGrowthConfig growth;
};

// plain key=value file; keys: pitch_diameter_m, ball_diameter_m, shaft_hz,
// sampling_hz, fault_depth_m, growth_rate, sp_at_failure, t_max
PhysicsConfig load_physics_config(const std::filesystem::path& path);
void save_physics_config(const std::filesystem::path& path,
                         const PhysicsConfig& config);

}  // namespace phyzzy::physics
