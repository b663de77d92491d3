#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "seiqr/dynamics.hpp"

namespace seiqr {

/// Weibull density of the delay between infectiousness onset and case report,
/// truncated at `max_delay` days.
struct DelayKernel {
  double shape = 1.73;
  double scale = 9.85;
  double max_delay = 45.0;

  /// Quadrature weights for s_j = j*h, j = 0..max_delay/h: the flux is taken
  /// piecewise linear between nodes and each panel is integrated exactly
  /// against the density, so the weights sum to the kernel's mass on [0, max_delay].
  std::vector<double> weights(double step) const;
};

/// Throws std::invalid_argument for s < 0.
double delay_density(double s, const DelayKernel& kernel);

/// Floor applied to expected counts before they enter the likelihood.
inline constexpr double kMinExpectedCases = 1e-8;

struct ExpectedCases {
  std::string region;
  Date first;
  std::vector<double> mu;
};

/// Convolution of the onset flux k2*(E2+E2d) with the delay kernel at grid index
/// `index`. Grid points before the start of the series contribute nothing.
template <class T>
T delayed_onsets(std::span<const T> onset_flux, std::size_t index, std::span<const double> kernel_weights) {
  T acc(0.0);
  const std::size_t m = std::min(index + 1, kernel_weights.size());
  for (std::size_t j = 0; j < m; ++j) acc += kernel_weights[j] * onset_flux[index - j];
  return acc;
}

/// Expected reported cases at time `r` (days since the trajectory's model start).
/// Throws std::out_of_range when the trajectory does not reach `r`.
double expected_cases(const Trajectory& traj, double r, double psi, const DelayKernel& kernel, double k2);

/// Log of the NB2 probability mass with mean `mu` and dispersion `phi`.
/// Throws std::invalid_argument for mu <= 0 or phi <= 0.
double nb2_log_pmf(std::int64_t count, double mu, double phi);

/// Gamma-Poisson draw from NB2(mu, phi).
std::int64_t sample_nb2(double mu, double phi, std::mt19937_64& rng);

}  // namespace seiqr
