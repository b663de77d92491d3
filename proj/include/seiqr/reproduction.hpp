#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "seiqr/dynamics.hpp"
#include "seiqr/model.hpp"
#include "seiqr/sampler.hpp"

namespace seiqr {

/// Basic reproduction number without distancing or quarantine: beta * (D + 1/k2).
double r0_basic(double beta, const FixedParams& fixed);

/// Regionalized reproduction number for contact fraction `f`, with the
/// distancing fraction e taken from `fixed`.
double r0_regional(double beta, double f, const FixedParams& fixed);

/// Posterior mean and central interval.
struct IntervalSummary {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Type-7 (linear interpolation) empirical quantile of `values` (need not be sorted).
double quantile(std::vector<double> values, double prob);

IntervalSummary summarize_interval(const std::vector<double>& values, double lower_prob = 0.025,
                                   double upper_prob = 0.975);

struct R0Row {
  std::string label;
  std::vector<IntervalSummary> phases;  // one per estimated phase (f2..)
};

/// Table of regional reproduction numbers per phase: one row per region, a
/// population-weighted average row and, when supplied, a province-wide row.
struct R0Summary {
  std::vector<std::string> phase_names;
  std::vector<R0Row> rows;
  bool has_provincial = false;
};

/// Per draw and phase, R0 of each region and their population-weighted average.
/// `region_names` gives the parameter prefixes in `draws`; the shared "r0b"
/// column is used when present, otherwise "<region>.r0b".
R0Summary r0_table(const PosteriorDraws& draws, const std::vector<RegionConfig>& regions, std::size_t phases,
                   const FixedParams& fixed, const PosteriorDraws* provincial = nullptr,
                   const std::string& provincial_region = "province");

struct R0Day {
  Date date;
  IntervalSummary r0;
};

/// Daily posterior summary of R0(t) for one region.
std::vector<R0Day> r0_timeseries(const PosteriorDraws& draws, const DistancingSchedule& sched,
                                 const std::string& region, const FixedParams& fixed, Date first, Date last);

}  // namespace seiqr
