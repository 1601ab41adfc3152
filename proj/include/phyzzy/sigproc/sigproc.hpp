#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "phyzzy/sigproc/vmd.hpp"

namespace phyzzy::sigproc {

// cumulative trapezoid integration; v[0] = 0
std::vector<double> cumtrapz(std::span<const double> samples, double dt);

// velocity as a quartic in time scaled by the dimensionless speed factor:
//   v(t) = psi * (p1 psi^4 t^4 + p2 psi^3 t^3 + p3 psi^2 t^2 + p4 psi t + p5)
// acceleration_at is its exact symbolic derivative.
struct VelocityModel {
  std::array<double, 5> p{0.0, 0.0, 0.0, 0.0, 0.0};
  double psi = 2.0;
  double residual_rms = 0.0;
  bool degenerate = false;

  double velocity_at(double t) const;
  double acceleration_at(double t) const;
};

// least squares over the first window_len samples, solved with a
// rank-revealing decomposition
VelocityModel fit_velocity_model(std::span<const double> velocity, double dt,
                                 double psi, std::size_t window_len);

struct EntryResult {
  bool found = false;
  std::size_t entry_index = 0;
  double entry_time = 0.0;
  double t_min = 0.0;   // location of the acceleration minimum
  double a_min = 0.0;
  double k = 0.0;       // fitted velocity at t_min
  std::string reason;
};

// Grid search (pitch dt/10) for the interior local minimum of the fitted
// acceleration; the entry time is t_min + k*psi/a_min, rounded to the
// nearest sample.
EntryResult find_entry(const VelocityModel& model, std::size_t window_len,
                       double dt);

struct ImpactResult {
  bool found = false;
  std::size_t impact_index = 0;
  std::string reason;
};

// First sample after the entry whose twice-differenced, squared raw value
// reaches 5% of the maximum over the analysis window.
ImpactResult find_impact(std::span<const double> raw, std::size_t entry_index,
                         std::size_t analysis_len);

struct ExtractConfig {
  DenoiseConfig denoise;
  std::size_t analysis_window = 600;
  double psi = 2.0;
};

struct SpallObservation {
  bool valid = false;
  std::size_t entry_index = 0;
  std::size_t impact_index = 0;
  std::size_t sp = 0;
  std::string reason;      // failing stage when invalid
  bool vmd_converged = true;
};

// denoise -> integrate -> fit -> entry on the smoothed branch, impact on the
// raw branch; never throws for signal-content failures, returns an invalid
// observation naming the stage instead
SpallObservation extract_sp(const SignalWindow& window,
                            const ExtractConfig& config);

}  // namespace phyzzy::sigproc
