#include "phyzzy/sigproc/vmd.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace phyzzy::sigproc {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    buffer_ = static_cast<fftw_complex*>(
        fftw_malloc(sizeof(fftw_complex) * n));
    std::lock_guard<std::mutex> lock(planner_mutex());
    forward_ = fftw_plan_dft_1d(static_cast<int>(n), buffer_, buffer_,
                                FFTW_FORWARD, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_1d(static_cast<int>(n), buffer_, buffer_,
                                FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  ~FftPlan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(buffer_);
  }

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::vector<std::complex<double>> forward(const std::vector<double>& x) {
    for (std::size_t i = 0; i < n_; ++i) {
      buffer_[i][0] = x[i];
      buffer_[i][1] = 0.0;
    }
    fftw_execute(forward_);
    return take();
  }

  // unnormalized inverse; caller divides by n
  std::vector<std::complex<double>> inverse(
      const std::vector<std::complex<double>>& spectrum) {
    for (std::size_t i = 0; i < n_; ++i) {
      buffer_[i][0] = spectrum[i].real();
      buffer_[i][1] = spectrum[i].imag();
    }
    fftw_execute(inverse_);
    return take();
  }

 private:
  std::vector<std::complex<double>> take() {
    std::vector<std::complex<double>> out(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      out[i] = {buffer_[i][0], buffer_[i][1]};
    }
    return out;
  }

  std::size_t n_;
  fftw_complex* buffer_;
  fftw_plan forward_;
  fftw_plan inverse_;
};

}  // namespace

void SignalWindow::validate() const {
  if (samples.empty()) {
    throw std::invalid_argument("signal window: empty sample buffer");
  }
  if (!(sampling_hz > 0.0)) {
    throw std::invalid_argument("signal window: non-positive sampling rate");
  }
}

void VmdConfig::validate() const {
  if (num_modes == 0) throw std::invalid_argument("vmd: num_modes must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("vmd: alpha must be positive");
  if (!(tolerance > 0.0)) {
    throw std::invalid_argument("vmd: tolerance must be positive");
  }
  if (max_iterations == 0) {
    throw std::invalid_argument("vmd: max_iterations must be >= 1");
  }
  if (tau < 0.0) throw std::invalid_argument("vmd: tau must be non-negative");
}

VmdResult vmd(const SignalWindow& window, const VmdConfig& config) {
  window.validate();
  config.validate();
  const std::size_t t = window.samples.size();
  if (t < 16) {
    throw std::invalid_argument("vmd: window length " + std::to_string(t) +
                                " below minimum 16");
  }

  // mirror-extend by half the window on each side
  const std::size_t left = t / 2;
  const std::size_t right = t - left;
  const std::size_t n = t + left + right;  // == 2t
  std::vector<double> extended(n);
  for (std::size_t i = 0; i < left; ++i) extended[i] = window.samples[left - 1 - i];
  std::copy(window.samples.begin(), window.samples.end(),
            extended.begin() + left);
  for (std::size_t i = 0; i < right; ++i) {
    extended[left + t + i] = window.samples[t - 1 - i];
  }

  FftPlan plan(n);
  const std::vector<std::complex<double>> f_hat = plan.forward(extended);

  // work on the analytic (non-negative frequency) half; bin b carries
  // normalized frequency b/n for b <= n/2
  const std::size_t half = n / 2;
  const std::size_t k_modes = config.num_modes;
  std::vector<std::vector<std::complex<double>>> u_hat(
      k_modes, std::vector<std::complex<double>>(half + 1, {0.0, 0.0}));
  std::vector<std::vector<std::complex<double>>> u_prev = u_hat;
  std::vector<double> omega(k_modes);
  for (std::size_t k = 0; k < k_modes; ++k) {
    omega[k] = 0.5 * static_cast<double>(k) / static_cast<double>(k_modes);
  }
  std::vector<std::complex<double>> lambda_hat(half + 1, {0.0, 0.0});
  std::vector<std::complex<double>> sum_modes(half + 1, {0.0, 0.0});

  bool converged = false;
  std::size_t iteration = 0;
  while (iteration < config.max_iterations && !converged) {
    ++iteration;
    for (std::size_t k = 0; k < k_modes; ++k) {
      // sum_modes tracks the sum over all modes in their current state;
      // subtracting the mode being refit leaves "everyone else"
      double weighted = 0.0;
      double power = 0.0;
      for (std::size_t b = 0; b <= half; ++b) {
        const double freq = static_cast<double>(b) / static_cast<double>(n);
        const double gap = freq - omega[k];
        const std::complex<double> numerator =
            f_hat[b] - sum_modes[b] + u_hat[k][b] + 0.5 * lambda_hat[b];
        const std::complex<double> updated =
            numerator / (1.0 + 2.0 * config.alpha * gap * gap);
        sum_modes[b] += updated - u_hat[k][b];
        u_hat[k][b] = updated;
        const double mag2 = std::norm(updated);
        weighted += freq * mag2;
        power += mag2;
      }
      if (power > 0.0) omega[k] = weighted / power;
    }
    if (config.tau > 0.0) {
      for (std::size_t b = 0; b <= half; ++b) {
        lambda_hat[b] += config.tau * (f_hat[b] - sum_modes[b]);
      }
    }
    double change = 0.0;
    for (std::size_t k = 0; k < k_modes; ++k) {
      double diff = 0.0;
      double base = 0.0;
      for (std::size_t b = 0; b <= half; ++b) {
        diff += std::norm(u_hat[k][b] - u_prev[k][b]);
        base += std::norm(u_prev[k][b]);
      }
      change += diff / (base + 1e-30);
    }
    u_prev = u_hat;
    converged = change < config.tolerance;
  }

  // sort by center frequency, then synthesize each mode
  std::vector<std::size_t> order(k_modes);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&omega](std::size_t a, std::size_t b) {
    return omega[a] < omega[b];
  });

  VmdResult result;
  result.converged = converged;
  result.iterations = iteration;
  result.modes.reserve(k_modes);
  result.center_frequencies_hz.reserve(k_modes);
  std::vector<std::complex<double>> spectrum(n);
  for (std::size_t idx : order) {
    std::fill(spectrum.begin(), spectrum.end(), std::complex<double>(0.0));
    // analytic half back to a hermitian full spectrum
    spectrum[0] = u_hat[idx][0];
    for (std::size_t b = 1; b < half; ++b) {
      spectrum[b] = u_hat[idx][b];
      spectrum[n - b] = std::conj(u_hat[idx][b]);
    }
    spectrum[half] = std::complex<double>(u_hat[idx][half].real(), 0.0);
    const std::vector<std::complex<double>> synth = plan.inverse(spectrum);
    std::vector<double> mode(t);
    for (std::size_t i = 0; i < t; ++i) {
      mode[i] = synth[left + i].real() / static_cast<double>(n);
    }
    result.modes.push_back(std::move(mode));
    result.center_frequencies_hz.push_back(omega[idx] * window.sampling_hz);
  }
  return result;
}

DenoiseResult denoise(const SignalWindow& window, const DenoiseConfig& config) {
  VmdResult decomposition = vmd(window, config.vmd);
  std::vector<double> energy(decomposition.modes.size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < decomposition.modes.size(); ++k) {
    for (double v : decomposition.modes[k]) energy[k] += v * v;
    total += energy[k];
  }

  // The kept set is a frequency band, not a mode count: take the lowest
  // keep_lowest_modes significant modes, then everything below the gap that
  // separates them from the first dropped significant mode. Near-empty modes
  // drift to arbitrary frequencies, so they neither claim a slot nor set the
  // cutoff, but inside the kept band their (real) content is retained.
  std::vector<std::size_t> significant;
  for (std::size_t k = 0; k < decomposition.modes.size(); ++k) {
    if (total > 0.0 && energy[k] >= config.min_mode_energy_rel * total) {
      significant.push_back(k);
    }
  }
  double cutoff_hz = std::numeric_limits<double>::infinity();
  if (significant.size() > config.keep_lowest_modes &&
      config.keep_lowest_modes > 0) {
    const std::size_t last_kept = significant[config.keep_lowest_modes - 1];
    const std::size_t first_dropped = significant[config.keep_lowest_modes];
    cutoff_hz = 0.5 * (decomposition.center_frequencies_hz[last_kept] +
                       decomposition.center_frequencies_hz[first_dropped]);
  }
  if (config.keep_lowest_modes == 0) cutoff_hz = 0.0;

  DenoiseResult result;
  result.converged = decomposition.converged;
  result.window.sampling_hz = window.sampling_hz;
  result.window.channel = window.channel;
  result.window.samples.assign(window.samples.size(), 0.0);
  for (std::size_t k = 0; k < decomposition.modes.size(); ++k) {
    if (decomposition.center_frequencies_hz[k] >= cutoff_hz) continue;
    for (std::size_t i = 0; i < result.window.samples.size(); ++i) {
      result.window.samples[i] += decomposition.modes[k][i];
    }
  }
  return result;
}

}  // namespace phyzzy::sigproc
