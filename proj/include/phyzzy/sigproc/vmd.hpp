#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace phyzzy::sigproc {

struct SignalWindow {
  std::vector<double> samples;  // acceleration in g
  double sampling_hz = 0.0;
  std::string channel;

  double dt() const { return 1.0 / sampling_hz; }
  void validate() const;
};

struct VmdConfig {
  std::size_t num_modes = 3;
  double alpha = 2000.0;          // bandwidth penalty
  double tolerance = 1e-7;        // relative mode change per sweep
  std::size_t max_iterations = 500;
  double tau = 0.0;               // dual ascent rate; 0 tolerates noise

  void validate() const;
};

struct VmdResult {
  // band-limited modes in ascending center-frequency order, each the same
  // length as the input
  std::vector<std::vector<double>> modes;
  std::vector<double> center_frequencies_hz;
  bool converged = false;
  std::size_t iterations = 0;
};

// Alternating frequency-domain updates: each mode is refiltered around its
// current center frequency, each center frequency moves to the power-weighted
// mean frequency of its mode. The signal is mirror-extended before the
// transform and the interior is returned.
VmdResult vmd(const SignalWindow& window, const VmdConfig& config);

struct DenoiseConfig {
  VmdConfig vmd;
  std::size_t keep_lowest_modes = 2;
  // modes carrying less than this fraction of the total mode energy are
  // ignored when picking the lowest-frequency subset; near-empty modes can
  // drift to an arbitrary center frequency and would displace real content
  double min_mode_energy_rel = 0.02;
};

struct DenoiseResult {
  SignalWindow window;
  bool converged = true;
};

// reconstruction from the lowest-frequency modes only
DenoiseResult denoise(const SignalWindow& window, const DenoiseConfig& config);

}  // namespace phyzzy::sigproc
