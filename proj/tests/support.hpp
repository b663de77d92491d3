#pragma once

#include <string>
#include <vector>

#include "seiqr/config.hpp"
#include "seiqr/model.hpp"
#include "seiqr/simstudy.hpp"

namespace testing {

inline seiqr::RunConfig reduced_config(std::vector<std::string> names, double step = 0.5) {
  seiqr::RunConfig cfg = seiqr::RunConfig::defaults();
  std::vector<seiqr::RegionConfig> keep;
  for (const auto& r : cfg.regions) {
    for (const auto& n : names) {
      if (r.name == n) keep.push_back(r);
    }
  }
  cfg.regions = keep;
  cfg.step = step;
  return cfg;
}

inline seiqr::ModelContext context_for(const std::vector<std::string>& names, double step = 0.5, bool share = true) {
  const auto cfg = reduced_config(names, step);
  return seiqr::build_context(cfg, cfg.regions, share);
}

// Simulated counts from the recovery-study truth for the context's regions.
inline std::vector<seiqr::CaseSeries> simulated(const seiqr::ModelContext& ctx, const std::string& last,
                                                std::uint64_t seed = 11) {
  std::vector<std::string> all;
  for (const auto& r : seiqr::bc_health_authorities()) all.push_back(r.name);
  std::vector<std::string> keep;
  for (const auto& r : ctx.regions) keep.push_back(r.name);
  seiqr::ParamSet truth = seiqr::select_regions(seiqr::bc_2020_truth(), all, keep);
  if (!ctx.share_r0b) truth.r0b.assign(keep.size(), truth.r0b[0]);
  seiqr::SimScenario sc{ctx, truth, ctx.distancing.observation_start, seiqr::parse_date(last), seed};
  return seiqr::simulate_cases(sc);
}

}  // namespace testing
