#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "seiqr/dual.hpp"
#include "seiqr/schedules.hpp"

namespace seiqr {

/// Compartment indices. The first six are the non-distanced population, the
/// last six their physically distancing counterparts.
namespace comp {
enum Index : std::size_t { S, E1, E2, I, Q, R, Sd, E1d, E2d, Id, Qd, Rd, kCount };
}  // namespace comp

inline constexpr std::size_t kCompartments = comp::kCount;

template <class T>
using BasicCompartments = std::array<T, kCompartments>;

/// Occupancy of the 12 compartments of one region at one time, in persons.
using CompartmentState = BasicCompartments<double>;

/// Numerical failure inside the integrator (non-finite values, negative undershoot).
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rates that are held fixed during inference.
struct FixedParams {
  double k1 = 0.2;   // E1 -> E2, 1/days
  double k2 = 1.0;   // E2 -> I, 1/days
  double D = 5.0;    // mean infectious period, days
  double q = 0.05;   // quarantine rate, 1/days
  double ur = 0.1;   // return to normal behaviour, 1/days
  double ud = 0.02;  // start distancing, 1/days

  /// Asymptotic fraction of the population practising distancing.
  double distancing_fraction() const { return ud / (ur + ud); }

  /// D + 1/k2, the factor linking beta and the basic reproduction number.
  double r0_factor() const { return D + 1.0 / k2; }

  /// Throws std::invalid_argument unless every rate is strictly positive.
  void check() const;
};

struct RegionConfig {
  std::string name;
  double population = 0.0;
  double population_ratio = 0.0;
};

/// Dense output of one integration on a uniform grid.
struct Trajectory {
  double t0 = 0.0;
  double step = 0.0;
  std::vector<CompartmentState> states;
  RegionConfig region;

  std::size_t size() const { return states.size(); }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * step; }
  /// Grid index of time `t`; throws std::out_of_range when `t` is off-grid or outside.
  std::size_t index_of(double t) const;
};

namespace detail {

// Rows of the ODE system given the two infection fluxes. `get(i)` reads
// compartment i and `put(i, v)` writes its derivative; shared by the value
// and the sensitivity passes.
template <class Get, class Put>
inline void seiqr_rows(Get&& get, Put&& put, double infection, double infection_d, const FixedParams& p) {
  using namespace comp;
  const double inv_d = 1.0 / p.D;
  const double ud = p.ud;
  const double ur = p.ur;
  put(S, -infection - ud * get(S) + ur * get(Sd));
  put(E1, infection - (p.k1 + ud) * get(E1) + ur * get(E1d));
  put(E2, p.k1 * get(E1) - (p.k2 + ud) * get(E2) + ur * get(E2d));
  put(I, p.k2 * get(E2) - (p.q + inv_d + ud) * get(I) + ur * get(Id));
  put(Q, p.q * get(I) - (inv_d + ud) * get(Q) + ur * get(Qd));
  put(R, inv_d * (get(I) + get(Q)) - ud * get(R) + ur * get(Rd));

  put(Sd, -infection_d + ud * get(S) - ur * get(Sd));
  put(E1d, infection_d - (p.k1 + ur) * get(E1d) + ud * get(E1));
  put(E2d, p.k1 * get(E1d) - (p.k2 + ur) * get(E2d) + ud * get(E2));
  put(Id, p.k2 * get(E2d) - (p.q + inv_d + ur) * get(Id) + ud * get(I));
  put(Qd, p.q * get(Id) - (inv_d + ur) * get(Qd) + ud * get(Q));
  put(Rd, inv_d * (get(Id) + get(Qd)) + ud * get(R) - ur * get(Rd));
}

}  // namespace detail

/// Right-hand side of the regional ODE system evaluated with contact
/// fraction `f_t` (already evaluated at the current time).
inline void seiqr_rhs(const CompartmentState& x, double beta, double f_t, const FixedParams& p, double N,
                      CompartmentState& dx) {
  using namespace comp;
  const double force = beta * (x[I] + x[E2] + f_t * (x[Id] + x[E2d])) / N;
  detail::seiqr_rows([&](int i) { return x[i]; }, [&](int i, double v) { dx[i] = v; }, force * x[S],
                     f_t * force * x[Sd], p);
}

/// Same system for dual numbers. The infection terms are the only nonlinear
/// part, so the sensitivities reuse the linear rows direction by direction.
template <std::size_t M>
void seiqr_rhs(const BasicCompartments<Dual<M>>& x, const Dual<M>& beta, const Dual<M>& f_t, const FixedParams& p,
               double N, BasicCompartments<Dual<M>>& dx) {
  using namespace comp;
  const double inv_n = 1.0 / N;
  const double f = f_t.val;
  const double distanced = x[Id].val + x[E2d].val;
  const double pressure = x[I].val + x[E2].val + f * distanced;
  const double force = beta.val * pressure * inv_n;
  detail::seiqr_rows([&](int i) { return x[i].val; }, [&](int i, double v) { dx[i].val = v; }, force * x[S].val,
                     f * force * x[Sd].val, p);
  for (std::size_t k = 0; k < M; ++k) {
    const double d_pressure =
        x[I].d[k] + x[E2].d[k] + f_t.d[k] * distanced + f * (x[Id].d[k] + x[E2d].d[k]);
    const double d_force = (beta.d[k] * pressure + beta.val * d_pressure) * inv_n;
    const double d_inf = d_force * x[S].val + force * x[S].d[k];
    const double d_inf_d = (f_t.d[k] * force + f * d_force) * x[Sd].val + f * force * x[Sd].d[k];
    detail::seiqr_rows([&](int i) { return x[i].d[k]; }, [&](int i, double v) { dx[i].d[k] = v; }, d_inf, d_inf_d,
                       p);
  }
}

/// Time derivative of the compartments at `t` days since model start.
/// Throws IntegrationError for non-finite input.
CompartmentState derivatives(const CompartmentState& state, double t, double beta, const PhaseValues& values,
                             const DistancingSchedule& sched, const FixedParams& fixed, double N);

/// Checks that `step` is positive and every breakpoint within (t0, t1) lies on the grid t0 + k*step.
void check_grid(double t0, double t1, double step, std::span<const double> breakpoints);

/// Number of grid intervals between t0 and t1 for `step` (t1 - t0 must be a multiple of step).
std::size_t grid_intervals(double t0, double t1, double step);

/// Classical fixed-step RK4 from t0 to t1. `observe(k, state)` is called for
/// every grid point k = 0..n, including the initial state.
///
/// Breakpoints are required to lie on the grid, so no step straddles a kink of
/// the contact fraction. A compartment below -1e-9 N aborts the integration.
template <class T, class Observer>
void integrate_observed(const BasicCompartments<T>& init, double t0, double t1, const T& beta,
                        std::span<const T> f_values, std::span<const double> breakpoints,
                        const FixedParams& fixed, double N, double step, Observer&& observe) {
  const std::size_t n = grid_intervals(t0, t1, step);
  const double floor = -1e-9 * N;
  BasicCompartments<T> x = init;
  BasicCompartments<T> k1, k2, k3, k4, tmp;
  observe(std::size_t{0}, x);
  const double half = 0.5 * step;
  const double sixth = step / 6.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) * step;
    const T f_start = contact_fraction<T>(t, f_values, breakpoints);
    const T f_mid = contact_fraction<T>(t + half, f_values, breakpoints);
    const T f_end = contact_fraction<T>(t + step, f_values, breakpoints);

    seiqr_rhs(x, beta, f_start, fixed, N, k1);
    for (std::size_t i = 0; i < kCompartments; ++i) tmp[i] = x[i] + half * k1[i];
    seiqr_rhs(tmp, beta, f_mid, fixed, N, k2);
    for (std::size_t i = 0; i < kCompartments; ++i) tmp[i] = x[i] + half * k2[i];
    seiqr_rhs(tmp, beta, f_mid, fixed, N, k3);
    for (std::size_t i = 0; i < kCompartments; ++i) tmp[i] = x[i] + step * k3[i];
    seiqr_rhs(tmp, beta, f_end, fixed, N, k4);
    for (std::size_t i = 0; i < kCompartments; ++i) {
      x[i] += sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    }

    for (std::size_t i = 0; i < kCompartments; ++i) {
      const double v = value_of(x[i]);
      if (!(v >= floor)) {
        if (!std::isfinite(v)) {
          throw IntegrationError("integration produced a non-finite value at t=" + std::to_string(t + step));
        }
        throw IntegrationError("integration instability; reduce step (compartment " + std::to_string(i) +
                               " = " + std::to_string(v) + " at t=" + std::to_string(t + step) + ")");
      }
    }
    observe(k + 1, x);
  }
}

/// Integrates one region and returns the full trajectory.
Trajectory integrate(const CompartmentState& init, double t0, double t1, double beta, const PhaseValues& values,
                     const DistancingSchedule& sched, const FixedParams& fixed, double N, double step);

/// Initial condition of the province-wide model.
struct InitialCondition {
  double population = 5'100'000.0;
  double seeded = 8.0;
  std::array<double, 3> seed_split{0.4, 0.1, 0.5};  // E1, E2, I
  double seeded_distanced_fraction = 1.0 / 6.0;

  CompartmentState provincial_state() const;
};

/// Regional initial state: every provincial compartment scaled by the region's population ratio.
CompartmentState initialize_region(const CompartmentState& provincial, const RegionConfig& region);

/// Active cases: exposed, infectious and quarantined in both branches.
double prevalence(const CompartmentState& state);

double total(const CompartmentState& state);

}  // namespace seiqr
