#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "seiqr/observation.hpp"

using namespace seiqr;

namespace {

// Composite Simpson rule on [a, b] with n (even) panels.
template <class F>
double simpson(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

// Trajectory whose E2 + E2d follows `onset(t)` and other compartments are zero.
template <class F>
Trajectory synthetic(double t_end, double step, F&& onset) {
  Trajectory traj;
  traj.t0 = 0.0;
  traj.step = step;
  const auto n = static_cast<std::size_t>(std::llround(t_end / step));
  for (std::size_t k = 0; k <= n; ++k) {
    CompartmentState x{};
    const double v = onset(static_cast<double>(k) * step);
    x[comp::E2] = 0.75 * v;
    x[comp::E2d] = 0.25 * v;
    traj.states.push_back(x);
  }
  return traj;
}

}  // namespace

TEST_CASE("Weibull delay density") {
  const DelayKernel kernel;
  CHECK(delay_density(0.0, kernel) == 0.0);
  CHECK(delay_density(45.5, kernel) == 0.0);
  CHECK_THROWS_AS(delay_density(-0.1, kernel), std::invalid_argument);
  for (double s = 0.0; s <= 45.0; s += 0.5) CHECK(delay_density(s, kernel) >= 0.0);

  // substitution s = u^2 removes the s^0.73 behaviour at the origin
  const double mass = simpson([&](double u) { return 2.0 * u * delay_density(u * u, kernel); }, 0.0,
                              std::sqrt(45.0), 200000);
  CHECK(std::abs(mass - 1.0) < 1e-5);
  const double mean = simpson([&](double u) { return 2.0 * u * u * u * delay_density(u * u, kernel); }, 0.0,
                              std::sqrt(45.0), 200000);
  CHECK(std::abs(mean - 8.8) <= 0.1);
  const double second = simpson([&](double u) { return 2.0 * std::pow(u, 5) * delay_density(u * u, kernel); }, 0.0,
                                std::sqrt(45.0), 200000);
  CHECK(std::sqrt(second - mean * mean) == doctest::Approx(5.2).epsilon(0.01));
}

TEST_CASE("quadrature weights carry the kernel mass and mean") {
  const DelayKernel kernel;
  const double exact_mass = 1.0 - std::exp(-std::pow(45.0 / 9.85, 1.73));
  for (double step : {0.1, 0.25, 0.5, 1.0}) {
    const auto w = kernel.weights(step);
    CHECK(w.size() == static_cast<std::size_t>(std::llround(45.0 / step)) + 1);
    const double mass = std::accumulate(w.begin(), w.end(), 0.0);
    CHECK(std::abs(mass - 1.0) < 1e-5);
    CHECK(mass == doctest::Approx(exact_mass).epsilon(1e-12));
    double mean = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) mean += w[j] * static_cast<double>(j) * step;
    CHECK(std::abs(mean - 8.8) <= 0.1);
    for (double x : w) CHECK(x >= 0.0);
  }
  CHECK_THROWS_AS(kernel.weights(0.7), std::invalid_argument);
}

TEST_CASE("expected cases from a trajectory") {
  const DelayKernel kernel;
  const auto none = synthetic(120.0, 0.1, [](double) { return 0.0; });
  CHECK(expected_cases(none, 100.0, 0.5, kernel, 1.0) == 0.0);

  const double c = 1234.0;
  const auto flat = synthetic(120.0, 0.1, [&](double) { return c; });
  CHECK(expected_cases(flat, 100.0, 1.0, kernel, 1.0) == doctest::Approx(c).epsilon(1e-4));

  const auto smooth = synthetic(120.0, 0.1, [](double t) { return 50.0 * std::exp(0.03 * t); });
  const auto doubled = synthetic(120.0, 0.1, [](double t) { return 100.0 * std::exp(0.03 * t); });
  const double mu = expected_cases(smooth, 100.0, 0.3, kernel, 1.0);
  CHECK(expected_cases(doubled, 100.0, 0.3, kernel, 1.0) == doctest::Approx(2.0 * mu).epsilon(1e-14));
  CHECK(expected_cases(smooth, 100.0, 0.6, kernel, 1.0) > mu);

  // refining the grid from 0.5 to 0.1 days changes mu by less than 0.1%
  const auto coarse = synthetic(120.0, 0.5, [](double t) { return 50.0 * std::exp(0.03 * t); });
  const double mu_coarse = expected_cases(coarse, 100.0, 0.3, kernel, 1.0);
  CHECK(std::abs(mu_coarse - mu) / mu < 1e-3);

  // oracle: fine Simpson quadrature of the same integral
  const double oracle = 0.3 * simpson([](double u) {
    const double s = u * u;
    return 2.0 * u * 50.0 * std::exp(0.03 * (100.0 - s)) * delay_density(s, DelayKernel{});
  }, 0.0, std::sqrt(45.0), 200000);
  CHECK(mu == doctest::Approx(oracle).epsilon(1e-4));

  CHECK_THROWS(expected_cases(flat, 130.0, 1.0, kernel, 1.0));
}

TEST_CASE("history before the model start contributes nothing") {
  const DelayKernel kernel;
  const auto flat = synthetic(60.0, 0.1, [](double) { return 1.0; });
  const auto w = kernel.weights(0.1);
  double partial = 0.0;
  for (std::size_t j = 0; j <= 100; ++j) partial += w[j];
  CHECK(expected_cases(flat, 10.0, 1.0, kernel, 1.0) == doctest::Approx(partial).epsilon(1e-12));
}

TEST_CASE("NB2 log mass") {
  const double mu = 3.0;
  const double phi = 2.0;
  CHECK(nb2_log_pmf(0, mu, phi) == doctest::Approx(phi * (std::log(phi) - std::log(mu + phi))).epsilon(1e-14));
  double total = 0.0;
  for (int c = 0; c <= 500; ++c) total += std::exp(nb2_log_pmf(c, mu, phi));
  CHECK(std::abs(total - 1.0) < 1e-8);

  for (int c = 0; c <= 20; ++c) {
    const double poisson = c * std::log(5.0) - 5.0 - std::lgamma(c + 1.0);
    CHECK(std::abs(nb2_log_pmf(c, 5.0, 1e8) - poisson) < 1e-4);
  }
  CHECK_THROWS_AS(nb2_log_pmf(1, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(nb2_log_pmf(1, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("NB2 draws have variance mu + mu^2/phi") {
  std::mt19937_64 rng(99);
  const std::pair<double, double> cases[] = {{3.0, 2.0}, {40.0, 8.0}, {200.0, 0.7}};
  for (const auto& [mu, phi] : cases) {
    const int n = 1'000'000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = static_cast<double>(sample_nb2(mu, phi, rng));
      sum += x;
      sq += x * x;
    }
    const double mean = sum / n;
    const double var = (sq - n * mean * mean) / (n - 1);
    const double expected = mu + mu * mu / phi;
    CHECK(std::abs(mean - mu) < 5.0 * std::sqrt(expected / n));
    CHECK(var == doctest::Approx(expected).epsilon(0.02));
  }
}
