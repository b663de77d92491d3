#include "seiqr/dynamics.hpp"

#include <numeric>

namespace seiqr {

void FixedParams::check() const {
  const std::array<std::pair<const char*, double>, 6> rates{
      {{"k1", k1}, {"k2", k2}, {"D", D}, {"q", q}, {"ur", ur}, {"ud", ud}}};
  for (const auto& [name, value] : rates) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw std::invalid_argument(std::string("fixed parameter ") + name + " must be positive");
    }
  }
}

std::size_t Trajectory::index_of(double t) const {
  const double k = (t - t0) / step;
  const double r = std::round(k);
  if (std::abs(k - r) > 1e-6 || r < 0.0 || r >= static_cast<double>(states.size())) {
    throw std::out_of_range("time " + std::to_string(t) + " is not a grid point of the trajectory");
  }
  return static_cast<std::size_t>(r);
}

CompartmentState derivatives(const CompartmentState& state, double t, double beta, const PhaseValues& values,
                             const DistancingSchedule& sched, const FixedParams& fixed, double N) {
  if (!std::isfinite(t) || !std::isfinite(beta) || !(N > 0.0)) {
    throw IntegrationError("non-finite time, beta or population in derivative evaluation");
  }
  for (double v : state) {
    if (!std::isfinite(v)) throw IntegrationError("non-finite compartment value; numerical blow-up upstream");
  }
  const double f_t = contact_fraction(t, values, sched);
  CompartmentState dx{};
  seiqr_rhs(state, beta, f_t, fixed, N, dx);
  return dx;
}

std::size_t grid_intervals(double t0, double t1, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("integration step must be positive");
  if (!(t1 > t0)) throw std::invalid_argument("integration requires t0 < t1");
  const double k = (t1 - t0) / step;
  const double r = std::round(k);
  if (std::abs(k - r) > 1e-6) {
    throw std::invalid_argument("integration span is not a multiple of the step");
  }
  return static_cast<std::size_t>(r);
}

void check_grid(double t0, double t1, double step, std::span<const double> breakpoints) {
  grid_intervals(t0, t1, step);
  for (double b : breakpoints) {
    if (b <= t0 || b >= t1) continue;
    const double k = (b - t0) / step;
    if (std::abs(k - std::round(k)) > 1e-6) {
      throw std::invalid_argument("schedule breakpoint at day " + std::to_string(b) +
                                  " is not on the integration grid");
    }
  }
}

Trajectory integrate(const CompartmentState& init, double t0, double t1, double beta, const PhaseValues& values,
                     const DistancingSchedule& sched, const FixedParams& fixed, double N, double step) {
  const auto breakpoints = sched.breakpoint_offsets();
  check_grid(t0, t1, step, breakpoints);
  Trajectory traj;
  traj.t0 = t0;
  traj.step = step;
  traj.states.reserve(grid_intervals(t0, t1, step) + 1);
  integrate_observed<double>(init, t0, t1, beta, std::span<const double>(values.f), breakpoints, fixed, N, step,
                             [&](std::size_t, const CompartmentState& x) { traj.states.push_back(x); });
  return traj;
}

CompartmentState InitialCondition::provincial_state() const {
  using namespace comp;
  CompartmentState x{};
  const double regular = seeded * (1.0 - seeded_distanced_fraction);
  const double distanced = seeded * seeded_distanced_fraction;
  x[S] = population - seeded;
  x[E1] = regular * seed_split[0];
  x[E2] = regular * seed_split[1];
  x[I] = regular * seed_split[2];
  x[E1d] = distanced * seed_split[0];
  x[E2d] = distanced * seed_split[1];
  x[Id] = distanced * seed_split[2];
  return x;
}

CompartmentState initialize_region(const CompartmentState& provincial, const RegionConfig& region) {
  if (!(region.population_ratio > 0.0) || region.population_ratio > 1.0) {
    throw std::invalid_argument("population ratio of region '" + region.name + "' must lie in (0, 1]");
  }
  CompartmentState x = provincial;
  for (double& v : x) v *= region.population_ratio;
  return x;
}

double prevalence(const CompartmentState& s) {
  using namespace comp;
  return s[E1] + s[E2] + s[I] + s[Q] + s[E1d] + s[E2d] + s[Id] + s[Qd];
}

double total(const CompartmentState& s) { return std::accumulate(s.begin(), s.end(), 0.0); }

}  // namespace seiqr
