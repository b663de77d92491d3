#include "seiqr/simstudy.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "seiqr/reproduction.hpp"

namespace seiqr {

ParamSet bc_2020_truth() {
  ParamSet p;
  p.r0b = {3.0};
  const double f[5][6] = {{0.33, 0.72, 0.66, 0.46, 0.79, 0.49},
                          {0.42, 0.59, 0.63, 0.63, 0.75, 0.52},
                          {0.20, 0.95, 0.52, 0.68, 0.79, 0.62},
                          {0.16, 0.79, 0.62, 0.45, 0.99, 0.49},
                          {0.32, 0.66, 0.67, 0.39, 0.87, 0.64}};
  const double psi[5][4] = {{0.39, 0.42, 0.38, 0.66},
                            {0.11, 0.22, 0.26, 0.60},
                            {0.02, 0.15, 0.24, 0.70},
                            {0.06, 0.10, 0.27, 0.54},
                            {0.07, 0.07, 0.22, 0.44}};
  const double phi[5] = {8.0, 11.0, 3.0, 8.0, 5.0};
  for (int i = 0; i < 5; ++i) {
    RegionParams rp;
    rp.f.assign(std::begin(f[i]), std::end(f[i]));
    rp.psi.assign(std::begin(psi[i]), std::end(psi[i]));
    rp.phi = phi[i];
    p.regions.push_back(std::move(rp));
  }
  return p;
}

ParamSet select_regions(const ParamSet& truth, const std::vector<std::string>& all_names,
                        const std::vector<std::string>& keep) {
  ParamSet out;
  for (const auto& name : keep) {
    const auto it = std::find(all_names.begin(), all_names.end(), name);
    if (it == all_names.end()) throw std::invalid_argument("unknown region '" + name + "'");
    const auto idx = static_cast<std::size_t>(it - all_names.begin());
    out.regions.push_back(truth.regions.at(idx));
    if (truth.r0b.size() > 1) out.r0b.push_back(truth.r0b.at(idx));
  }
  if (truth.r0b.size() == 1) out.r0b = truth.r0b;
  return out;
}

std::vector<CaseSeries> simulate_cases(const SimScenario& scenario) {
  const ModelContext& ctx = scenario.context;
  if (scenario.last < scenario.first) throw std::invalid_argument("simulation window is empty");
  std::vector<CaseSeries> out;
  for (std::size_t i = 0; i < ctx.region_count(); ++i) {
    const Trajectory traj = simulate_region(ctx, scenario.truth, i, ctx.time_of(scenario.last));
    const RegionParams& rp = scenario.truth.regions.at(i);
    const auto mu = expected_case_path(ctx, rp, traj, scenario.first, scenario.last);
    std::mt19937_64 rng(chain_seed(scenario.seed, i));
    CaseSeries series{ctx.regions[i].name, scenario.first, {}};
    series.counts.reserve(mu.size());
    for (double m : mu) series.counts.push_back(sample_nb2(std::max(m, kMinExpectedCases), rp.phi, rng));
    out.push_back(std::move(series));
  }
  return out;
}

RecoveryReport recovery_report(const ParameterLayout& layout, const ParamSet& truth, const PosteriorDraws& draws) {
  const auto names = layout.names();
  const auto values = layout.flatten(truth);
  RecoveryReport report;
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto samples = draws.parameter(draws.index_of(names[k]));
    const IntervalSummary s = summarize_interval(samples, 0.05, 0.95);
    RecoveryEntry e{names[k], values[k], s.mean, s.lower, s.upper, false};
    e.covered = e.truth >= e.lower && e.truth <= e.upper;
    if (e.covered) ++report.covered;
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace seiqr
