#include "seiqr/observation.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace seiqr {

double delay_density(double s, const DelayKernel& kernel) {
  if (s < 0.0) throw std::invalid_argument("delay must be non-negative");
  if (s > kernel.max_delay) return 0.0;
  const double k = kernel.shape;
  const double z = s / kernel.scale;
  if (z == 0.0) return k < 1.0 ? INFINITY : (k == 1.0 ? 1.0 / kernel.scale : 0.0);
  return (k / kernel.scale) * std::pow(z, k - 1.0) * std::exp(-std::pow(z, k));
}

std::vector<double> DelayKernel::weights(double step) const {
  const double m = max_delay / step;
  const auto n = static_cast<std::size_t>(std::round(m));
  if (!(step > 0.0) || std::abs(m - static_cast<double>(n)) > 1e-6) {
    throw std::invalid_argument("maximum delay must be a multiple of the grid step");
  }
  // Survival function and first partial moment of the Weibull delay.
  const auto survival = [&](double s) { return std::exp(-std::pow(s / scale, shape)); };
  const auto moment = [&](double s) {
    return scale * boost::math::tgamma_lower(1.0 + 1.0 / shape, std::pow(s / scale, shape));
  };
  // The onset flux is linear between grid nodes; each panel's hat functions
  // are integrated exactly against the density.
  std::vector<double> w(n + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = static_cast<double>(j) * step;
    const double b = static_cast<double>(j + 1) * step;
    const double m0 = survival(a) - survival(b);
    const double m1 = moment(b) - moment(a);
    w[j] += (b * m0 - m1) / step;
    w[j + 1] += (m1 - a * m0) / step;
  }
  return w;
}

double expected_cases(const Trajectory& traj, double r, double psi, const DelayKernel& kernel, double k2) {
  const std::size_t index = traj.index_of(r);
  std::vector<double> flux(index + 1);
  for (std::size_t k = 0; k <= index; ++k) {
    flux[k] = k2 * (traj.states[k][comp::E2] + traj.states[k][comp::E2d]);
  }
  const auto w = kernel.weights(traj.step);
  return psi * delayed_onsets<double>(flux, index, w);
}

double nb2_log_pmf(std::int64_t count, double mu, double phi) {
  if (!(mu > 0.0) || !(phi > 0.0)) throw std::invalid_argument("NB2 requires mu > 0 and phi > 0");
  if (count < 0) return -INFINITY;
  const double c = static_cast<double>(count);
  const double log_binom = std::lgamma(c + phi) - std::lgamma(c + 1.0) - std::lgamma(phi);
  const double tail = c == 0.0 ? 0.0 : c * (std::log(mu) - std::log(mu + phi));
  return log_binom + tail - phi * std::log1p(mu / phi);
}

std::int64_t sample_nb2(double mu, double phi, std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(phi, mu / phi);
  const double rate = gamma(rng);
  if (!(rate > 0.0)) return 0;
  std::poisson_distribution<std::int64_t> poisson(rate);
  return poisson(rng);
}

}  // namespace seiqr
