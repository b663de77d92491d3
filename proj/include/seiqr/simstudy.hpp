#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seiqr/model.hpp"
#include "seiqr/sampler.hpp"

namespace seiqr {

/// Known parameters from which synthetic case counts are generated.
struct SimScenario {
  ModelContext context;
  ParamSet truth;
  Date first{};
  Date last{};
  std::uint64_t seed = 1;
};

/// Parameter values of the 2020 recovery experiment for the five BC health
/// authorities (coastal, fraser, interior, island, northern), R0b = 3.
ParamSet bc_2020_truth();

/// Restricts a five-region truth to the named regions (in the given order).
ParamSet select_regions(const ParamSet& truth, const std::vector<std::string>& all_names,
                        const std::vector<std::string>& keep);

/// Synthetic daily counts for every region of the scenario on [first, last].
/// Each count is a gamma-Poisson draw around the floored expected count;
/// region k uses its own stream derived from the scenario seed.
std::vector<CaseSeries> simulate_cases(const SimScenario& scenario);

struct RecoveryEntry {
  std::string name;
  double truth = 0.0;
  double mean = 0.0;
  double lower = 0.0;  // 5% quantile
  double upper = 0.0;  // 95% quantile
  bool covered = false;
};

struct RecoveryReport {
  std::vector<RecoveryEntry> entries;
  std::size_t covered = 0;
};

/// Coverage of the true values by the 90% central credible intervals.
RecoveryReport recovery_report(const ParameterLayout& layout, const ParamSet& truth, const PosteriorDraws& draws);

}  // namespace seiqr
