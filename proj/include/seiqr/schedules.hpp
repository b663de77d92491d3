#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "seiqr/calendar.hpp"
#include "seiqr/dual.hpp"

namespace seiqr {

/// Raised when a testing fraction is requested before the observation window.
class OutOfWindowError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// One linear transition of the contact fraction: the plateau of phase j ends
/// at `plateau_end` and the plateau of phase j+1 starts at `next_start`.
struct Transition {
  Date plateau_end;
  Date next_start;
};

/// Change points of the piecewise contact-reduction function. Phase 1 has
/// f = 1; phase j+1 (j = 1..transitions.size()) takes the estimated value f_{j+1}.
struct DistancingSchedule {
  Date model_start;
  Date observation_start;
  std::vector<Transition> transitions;

  std::size_t phase_count() const { return transitions.size(); }

  /// Transition boundaries as days since model_start, flattened in time order.
  std::vector<double> breakpoint_offsets() const;

  /// The British Columbia 2020 change points (six transitions, one week each).
  static DistancingSchedule bc_2020();
};

/// Closed date interval [first, last].
struct DateRange {
  Date first;
  Date last;
};

/// Step function of the testing fraction over contiguous date segments. The
/// last segment extends indefinitely to the right so forecasts stay defined.
struct TestingSchedule {
  std::vector<DateRange> segments;

  std::size_t segment_count() const { return segments.size(); }

  /// Index of the segment containing `r`. Throws OutOfWindowError before the first segment.
  std::size_t segment_of(Date r) const;

  static TestingSchedule bc_2020();
};

/// Estimated phase values for one region.
struct PhaseValues {
  std::vector<double> f;    // f_2 .. f_{n+1}
  std::vector<double> psi;  // psi_1 .. psi_m
};

/// Contact fraction at `t` days since model start.
///
/// `breakpoints` holds the transition boundaries as produced by
/// DistancingSchedule::breakpoint_offsets(). Returns 1 before the first
/// transition, the plateau value on each plateau and the linear interpolant
/// within transition windows. Templated on the scalar type of the phase values
/// so sensitivities propagate through it.
template <class T>
T contact_fraction(double t, std::span<const T> f, std::span<const double> breakpoints) {
  const std::size_t n = breakpoints.size() / 2;
  T previous(1.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double t_end = breakpoints[2 * j];
    if (t < t_end) return previous;
    const double t_next = breakpoints[2 * j + 1];
    if (t < t_next) {
      const double w = (t_next - t) / (t_next - t_end);
      return f[j] + (previous - f[j]) * w;
    }
    previous = f[j];
  }
  return previous;
}

inline double contact_fraction(double t, const PhaseValues& values, const DistancingSchedule& sched) {
  const auto offsets = sched.breakpoint_offsets();
  return contact_fraction<double>(t, std::span<const double>(values.f), offsets);
}

/// Testing fraction on calendar day `r`.
double testing_fraction(Date r, const PhaseValues& values, const TestingSchedule& sched);

/// Schedule consistency report; an empty list means the schedule is valid.
std::vector<std::string> validate(const DistancingSchedule& sched);
std::vector<std::string> validate(const TestingSchedule& sched);

}  // namespace seiqr
