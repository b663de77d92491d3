#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "seiqr/config.hpp"
#include "seiqr/ingest.hpp"
#include "seiqr/posterior.hpp"
#include "seiqr/reproduction.hpp"
#include "seiqr/sampler.hpp"

namespace seiqr {

/// Exposes a Posterior to the sampler.
class PosteriorTarget final : public LogDensity {
 public:
  explicit PosteriorTarget(const Posterior& posterior) : posterior_(posterior) {}
  std::size_t dimension() const override { return posterior_.dimension(); }
  double log_density(std::span<const double> x) const override { return posterior_.log_posterior(x); }
  double log_density_gradient(std::span<const double> x, std::span<double> grad) const override {
    return posterior_.log_posterior_gradient(x, grad);
  }

 private:
  const Posterior& posterior_;
};

/// Case series in the fit window [observation start, fit end], shaped for
/// `mode` (summed to one provincial series in provincial mode). Every
/// configured region must be present and cover the window end.
std::vector<CaseSeries> fit_data(const RunConfig& cfg, FitMode mode, const std::vector<CaseSeries>& data);

/// Draws of the constrained parameters of one model, sampled with HMC.
PosteriorDraws sample_posterior(const ModelContext& ctx, const std::vector<CaseSeries>& data,
                                const SamplerConfig& sampler);

struct FitResult {
  FitMode mode = FitMode::hierarchical;
  PosteriorDraws draws;
  Diagnostics diagnostics;
  double seconds = 0.0;

  bool converged(double rhat_limit = 1.05) const { return diagnostics.max_rhat() < rhat_limit; }
};

/// Fits the configured mode. Per-region mode runs one independent fit per
/// region (same master seed) and joins the columns as "<region>.r0b", ...
FitResult fit(const RunConfig& cfg, FitMode mode, const std::vector<CaseSeries>& data);

/// Constrained parameters of draw (chain, iter) for a context whose layout matches the draw columns.
ParamSet draw_params(const ParameterLayout& layout, const PosteriorDraws& draws, std::size_t chain, std::size_t iter);

/// Per-date summary of a posterior quantity.
struct BandRow {
  Date date{};
  double mean = 0.0;
  double q05 = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double q95 = 0.0;
};

struct BandSeries {
  std::string region;
  std::string quantity;
  std::vector<BandRow> rows;
};

/// Summarizes samples[day][draw] for consecutive dates from `first`.
BandSeries make_band(const std::string& region, const std::string& quantity, Date first,
                     const std::vector<std::vector<double>>& samples);

/// Prevalence, expected reported cases and posterior-predictive counts of one region.
struct RegionBands {
  std::string region;
  BandSeries prevalence;
  BandSeries expected_cases;
  BandSeries predictive_cases;
};

/// Trajectory bands for every region of `ctx` over [first, last], using at
/// most `max_draws` evenly spaced draws. Predictive counts add negative-binomial
/// noise drawn from a stream seeded by `seed`.
std::vector<RegionBands> posterior_bands(const ModelContext& ctx, const PosteriorDraws& draws, Date first, Date last,
                                         std::size_t max_draws, std::uint64_t seed);

/// Bands from the observation start through `horizon_end`, continuing the
/// ODE past the fit window under the last phase's contact fraction. In
/// provincial mode the result additionally holds one scaled copy per
/// configured region (population share of the provincial bands).
std::vector<RegionBands> forecast(const RunConfig& cfg, FitMode mode, const PosteriorDraws& draws, Date fit_end,
                                  Date horizon_end);

/// Scales every band of `bands` by `factor` and relabels it.
RegionBands scale_bands(const RegionBands& bands, const std::string& region, double factor);

/// Kernel density estimate of one parameter on an evenly spaced grid.
struct DensityTable {
  std::string parameter;
  std::vector<double> grid;
  std::vector<double> density;
};

DensityTable density_table(const std::string& parameter, const std::vector<double>& samples, std::size_t points);

/// Fraction of observed counts inside the 5-95% band of `band` (matched by date).
double band_coverage(const BandSeries& band, const CaseSeries& observed);

/// Fraction of `truth` values inside the 5-95% band on dates after `after`.
double held_out_coverage(const BandSeries& band, const std::vector<double>& truth, Date truth_first, Date after);

// Files ----------------------------------------------------------------------

void write_draws(const std::string& path, const PosteriorDraws& draws);
PosteriorDraws read_draws(const std::string& path);

void write_diagnostics(const std::string& path, const Diagnostics& diag);
void write_band(std::ostream& out, const BandSeries& band, const CaseSeries* observed = nullptr,
                Date fit_end = Date::max());
void write_band(const std::string& path, const BandSeries& band, const CaseSeries* observed = nullptr,
                Date fit_end = Date::max());
/// One file holding prevalence, expected and predictive bands, flagged as held out after `fit_end`.
void write_forecast(const std::string& path, const RegionBands& bands, Date fit_end);
void write_densities(const std::string& path, const std::vector<DensityTable>& tables);
void write_r0_table(std::ostream& out, const R0Summary& table);
void write_r0_table(const std::string& path, const R0Summary& table);

/// Run summary: posterior means and 90% intervals, diagnostics, runtime.
nlohmann::json fit_summary(const RunConfig& cfg, const FitResult& result);

}  // namespace seiqr
