#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seiqr/model.hpp"
#include "seiqr/sampler.hpp"

namespace seiqr {

enum class FitMode { hierarchical, per_region, provincial };

FitMode parse_mode(const std::string& text);
std::string to_string(FitMode mode);

/// Settings of the `simulate` command. Without an explicit truth the
/// recovery-study values are used for regions that have them.
struct SimulationConfig {
  Date first{};
  Date last{};
  std::uint64_t seed = 20201231;
  std::optional<ParamSet> truth;
};

/// One run: model pieces, sampler, fit window and output options.
struct RunConfig {
  FitMode mode = FitMode::hierarchical;
  double provincial_population = 5'100'000.0;
  std::string provincial_name = "province";
  std::vector<RegionConfig> regions;
  InitialCondition initial;
  DistancingSchedule distancing;
  TestingSchedule testing;
  FixedParams fixed;
  DelayKernel kernel;
  PriorSpec priors;
  SamplerConfig sampler;
  double step = 0.1;
  Date fit_end{};
  Date forecast_end{};
  SimulationConfig simulation;
  std::size_t max_draws = 1000;      // draws used for trajectory bands
  std::size_t density_points = 128;  // grid size of density tables

  /// British Columbia 2020 setup with the five health authorities.
  static RunConfig defaults();
};

/// Health-authority populations with ratios relative to `provincial`.
std::vector<RegionConfig> bc_health_authorities(double provincial = 5'100'000.0);

nlohmann::json to_json(const RunConfig& cfg);
/// Missing keys keep their default values.
RunConfig config_from_json(const nlohmann::json& j);

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& cfg, const std::string& path);

/// Every problem found; empty when the configuration is usable.
std::vector<std::string> validate(const RunConfig& cfg);

/// Model context for the configured regions (or the single provincial
/// region in provincial mode). Regions share R0b only in hierarchical mode.
ModelContext build_context(const RunConfig& cfg, FitMode mode);
/// Context of the named regions only.
ModelContext build_context(const RunConfig& cfg, const std::vector<RegionConfig>& regions, bool share_r0b);

/// Simulation truth aligned with cfg.regions (shared R0b).
ParamSet simulation_truth(const RunConfig& cfg);

}  // namespace seiqr
