#include "seiqr/reproduction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace seiqr {

double r0_basic(double beta, const FixedParams& fixed) { return beta * fixed.r0_factor(); }

double r0_regional(double beta, double f, const FixedParams& fixed) {
  const double e = fixed.distancing_fraction();
  const double k1 = fixed.k1;
  const double k2 = fixed.k2;
  const double removal = 1.0 / fixed.D + fixed.q;
  const double stages = (e * k1 + 1.0) * (e * k2 + 1.0);
  const double mixed = e * f + 1.0 - e;
  const double mixed2 = mixed * mixed;

  const double t1 = std::pow(e, 4) * (1.0 - e) * (1.0 - f) * (1.0 - f) * k1 * k2 / ((e * removal + 1.0) * stages);
  const double t2 = mixed2 / removal;
  const double t3 = e * k1 * mixed2 / (k2 * stages);
  const double t4 = e * mixed2 / stages;
  const double t5 = mixed2 / (k2 * stages);
  const double t6 = e * e * k1 * (e * f * f + 1.0 - e) / stages;
  return beta * (t1 + t2 + t3 + t4 + t5 + t6);
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

IntervalSummary summarize_interval(const std::vector<double>& values, double lower_prob, double upper_prob) {
  IntervalSummary s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.lower = quantile(values, lower_prob);
  s.upper = quantile(values, upper_prob);
  return s;
}

namespace {

std::size_t r0b_column(const PosteriorDraws& draws, const std::string& region) {
  const auto shared = std::find(draws.names.begin(), draws.names.end(), "r0b");
  if (shared != draws.names.end()) return static_cast<std::size_t>(shared - draws.names.begin());
  return draws.index_of(region + ".r0b");
}

// R0 per draw for one region and phase.
std::vector<double> r0_draws(const PosteriorDraws& draws, const std::string& region, std::size_t phase,
                             const FixedParams& fixed) {
  const std::size_t r0b = r0b_column(draws, region);
  const std::size_t f = draws.index_of(region + ".f" + std::to_string(phase + 2));
  std::vector<double> out;
  out.reserve(draws.draw_count());
  for (std::size_t c = 0; c < draws.chains; ++c) {
    for (std::size_t i = 0; i < draws.iterations; ++i) {
      const double beta = draws.at(c, i, r0b) / fixed.r0_factor();
      out.push_back(r0_regional(beta, draws.at(c, i, f), fixed));
    }
  }
  return out;
}

}  // namespace

R0Summary r0_table(const PosteriorDraws& draws, const std::vector<RegionConfig>& regions, std::size_t phases,
                   const FixedParams& fixed, const PosteriorDraws* provincial, const std::string& provincial_region) {
  R0Summary table;
  for (std::size_t j = 0; j < phases; ++j) table.phase_names.push_back("f" + std::to_string(j + 2));
  double weight_total = 0.0;
  for (const auto& r : regions) weight_total += r.population_ratio;
  if (!(weight_total > 0.0)) throw std::invalid_argument("population ratios must be positive");

  std::vector<R0Row> rows(regions.size());
  R0Row average{"weighted_average", {}};
  for (std::size_t j = 0; j < phases; ++j) {
    std::vector<double> weighted(draws.draw_count(), 0.0);
    for (std::size_t i = 0; i < regions.size(); ++i) {
      const auto values = r0_draws(draws, regions[i].name, j, fixed);
      rows[i].label = regions[i].name;
      rows[i].phases.push_back(summarize_interval(values));
      const double w = regions[i].population_ratio / weight_total;
      for (std::size_t k = 0; k < values.size(); ++k) weighted[k] += w * values[k];
    }
    average.phases.push_back(summarize_interval(weighted));
  }
  table.rows = std::move(rows);
  table.rows.push_back(std::move(average));
  if (provincial != nullptr) {
    R0Row prov{provincial_region, {}};
    for (std::size_t j = 0; j < phases; ++j) {
      prov.phases.push_back(summarize_interval(r0_draws(*provincial, provincial_region, j, fixed)));
    }
    table.rows.push_back(std::move(prov));
    table.has_provincial = true;
  }
  return table;
}

std::vector<R0Day> r0_timeseries(const PosteriorDraws& draws, const DistancingSchedule& sched,
                                 const std::string& region, const FixedParams& fixed, Date first, Date last) {
  const std::size_t r0b = r0b_column(draws, region);
  const std::size_t phases = sched.phase_count();
  std::vector<std::size_t> f_cols;
  for (std::size_t j = 0; j < phases; ++j) f_cols.push_back(draws.index_of(region + ".f" + std::to_string(j + 2)));
  const auto breakpoints = sched.breakpoint_offsets();

  std::vector<R0Day> out;
  std::vector<double> f(phases);
  for (Date d = first; d <= last; d = add_days(d, 1)) {
    const double t = static_cast<double>(days_between(sched.model_start, d));
    std::vector<double> values;
    values.reserve(draws.draw_count());
    for (std::size_t c = 0; c < draws.chains; ++c) {
      for (std::size_t i = 0; i < draws.iterations; ++i) {
        for (std::size_t j = 0; j < phases; ++j) f[j] = draws.at(c, i, f_cols[j]);
        const double f_t = contact_fraction<double>(t, std::span<const double>(f), breakpoints);
        values.push_back(r0_regional(draws.at(c, i, r0b) / fixed.r0_factor(), f_t, fixed));
      }
    }
    out.push_back({d, summarize_interval(values)});
  }
  return out;
}

}  // namespace seiqr
