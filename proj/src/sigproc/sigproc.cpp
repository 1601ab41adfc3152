#include "phyzzy/sigproc/sigproc.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phyzzy::sigproc {

std::vector<double> cumtrapz(std::span<const double> samples, double dt) {
  if (samples.size() < 2) {
    throw std::invalid_argument("cumtrapz: need at least two samples");
  }
  std::vector<double> integral(samples.size());
  integral[0] = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    integral[i] = integral[i - 1] + dt * 0.5 * (samples[i - 1] + samples[i]);
  }
  return integral;
}

double VelocityModel::velocity_at(double t) const {
  const double s = psi;
  return s * (p[0] * s * s * s * s * t * t * t * t +
              p[1] * s * s * s * t * t * t + p[2] * s * s * t * t +
              p[3] * s * t + p[4]);
}

double VelocityModel::acceleration_at(double t) const {
  const double s = psi;
  return s * (4.0 * p[0] * s * s * s * s * t * t * t +
              3.0 * p[1] * s * s * s * t * t + 2.0 * p[2] * s * s * t +
              p[3] * s);
}

VelocityModel fit_velocity_model(std::span<const double> velocity, double dt,
                                 double psi, std::size_t window_len) {
  if (window_len > velocity.size()) {
    throw std::invalid_argument(
        "fit_velocity_model: window_len " + std::to_string(window_len) +
        " exceeds series length " + std::to_string(velocity.size()));
  }
  if (window_len < 5) {
    throw std::invalid_argument(
        "fit_velocity_model: need at least five samples");
  }
  const auto n = static_cast<Eigen::Index>(window_len);
  Eigen::MatrixXd design(n, 5);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double s = psi;
    design(i, 0) = s * s * s * s * s * t * t * t * t;
    design(i, 1) = s * s * s * s * t * t * t;
    design(i, 2) = s * s * s * t * t;
    design(i, 3) = s * s * t;
    design(i, 4) = s;
    target(i) = velocity[static_cast<std::size_t>(i)];
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::VectorXd coefficients = qr.solve(target);
  VelocityModel model;
  model.psi = psi;
  for (int i = 0; i < 5; ++i) model.p[static_cast<std::size_t>(i)] = coefficients(i);
  model.degenerate = qr.rank() < 5;
  model.residual_rms = std::sqrt((design * coefficients - target).squaredNorm() /
                                 static_cast<double>(n));
  return model;
}

EntryResult find_entry(const VelocityModel& model, std::size_t window_len,
                       double dt) {
  EntryResult result;
  if (window_len < 2 || !(dt > 0.0)) {
    result.reason = "entry: degenerate analysis window";
    return result;
  }
  // dense grid, ten points per sample, endpoints excluded
  const std::size_t grid_n = window_len * 10;
  bool have_min = false;
  double best_t = 0.0;
  double best_a = 0.0;
  const double pitch = dt / 10.0;
  double prev = model.acceleration_at(0.0);
  double curr = model.acceleration_at(pitch);
  for (std::size_t i = 1; i + 1 < grid_n; ++i) {
    const double next = model.acceleration_at(static_cast<double>(i + 1) * pitch);
    if (curr < prev && curr < next) {
      if (!have_min || curr < best_a) {
        have_min = true;
        best_a = curr;
        best_t = static_cast<double>(i) * pitch;
      }
    }
    prev = curr;
    curr = next;
  }
  if (!have_min) {
    result.reason = "entry: no interior local minimum of fitted acceleration";
    return result;
  }
  if (std::abs(best_a) < 1e-12) {
    result.reason = "entry: acceleration minimum below resolution";
    return result;
  }
  result.t_min = best_t;
  result.a_min = best_a;
  result.k = model.velocity_at(best_t);
  result.entry_time = best_t + result.k * model.psi / best_a;
  if (!(result.entry_time >= 0.0) ||
      !(result.entry_time < static_cast<double>(window_len) * dt)) {
    result.reason = "entry: outside analysis window";
    return result;
  }
  const auto index = static_cast<std::size_t>(
      std::llround(result.entry_time / dt));
  if (index >= window_len) {
    result.reason = "entry: rounds past analysis window";
    return result;
  }
  result.entry_index = index;
  result.found = true;
  return result;
}

ImpactResult find_impact(std::span<const double> raw, std::size_t entry_index,
                         std::size_t analysis_len) {
  ImpactResult result;
  const std::size_t n = std::min(raw.size(), analysis_len);
  if (n < 3) {
    result.reason = "impact: analysis window too short";
    return result;
  }
  if (entry_index >= n) {
    result.reason = "impact: entry outside analysis window";
    return result;
  }
  // second central difference, squared; ends carry no curvature estimate
  std::vector<double> curvature_sq(n, 0.0);
  double peak = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double d = raw[i + 1] - 2.0 * raw[i] + raw[i - 1];
    curvature_sq[i] = d * d;
    peak = std::max(peak, curvature_sq[i]);
  }
  if (!(peak > 0.0)) {
    result.reason = "impact: flat signal in analysis window";
    return result;
  }
  const double threshold = 0.05 * peak;
  for (std::size_t i = entry_index + 1; i < n; ++i) {
    if (curvature_sq[i] >= threshold) {
      result.found = true;
      result.impact_index = i;
      return result;
    }
  }
  result.reason = "impact: no sample reaches threshold after entry";
  return result;
}

SpallObservation extract_sp(const SignalWindow& window,
                            const ExtractConfig& config) {
  SpallObservation obs;
  if (window.samples.size() < 16) {
    obs.reason = "denoise: window shorter than 16 samples";
    return obs;
  }
  const std::size_t analysis =
      std::min(config.analysis_window, window.samples.size());

  DenoiseResult smooth;
  try {
    smooth = denoise(window, config.denoise);
  } catch (const std::exception& e) {
    obs.reason = std::string("denoise: ") + e.what();
    return obs;
  }
  obs.vmd_converged = smooth.converged;

  const std::vector<double> velocity =
      cumtrapz(smooth.window.samples, window.dt());
  const VelocityModel model =
      fit_velocity_model(velocity, window.dt(), config.psi, analysis);
  if (model.degenerate) {
    obs.reason = "fit: rank-deficient velocity model";
    return obs;
  }

  const EntryResult entry = find_entry(model, analysis, window.dt());
  if (!entry.found) {
    obs.reason = entry.reason;
    return obs;
  }
  const ImpactResult impact =
      find_impact(window.samples, entry.entry_index, analysis);
  if (!impact.found) {
    obs.reason = impact.reason;
    return obs;
  }
  obs.valid = true;
  obs.entry_index = entry.entry_index;
  obs.impact_index = impact.impact_index;
  obs.sp = impact.impact_index - entry.entry_index;
  return obs;
}

}  // namespace phyzzy::sigproc
