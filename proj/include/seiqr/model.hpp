#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seiqr/dynamics.hpp"
#include "seiqr/observation.hpp"
#include "seiqr/schedules.hpp"

namespace seiqr {

/// Daily reported case counts of one region, contiguous from `first`.
struct CaseSeries {
  std::string region;
  Date first{};
  std::vector<std::int64_t> counts;

  std::size_t size() const { return counts.size(); }
  bool empty() const { return counts.empty(); }
  Date date(std::size_t k) const { return add_days(first, static_cast<int>(k)); }
  Date last() const { return add_days(first, static_cast<int>(counts.size()) - 1); }
};

struct BetaPrior {
  double a = 1.0;
  double b = 1.0;

  double log_density(double x) const;
  double mode() const { return (a - 1.0) / (a + b - 2.0); }
  double mean() const { return a / (a + b); }
};

struct LogNormalPrior {
  double mu = 0.0;
  double sigma = 1.0;

  double log_density(double x) const;
};

/// Prior distributions. The dispersion prior is a chi-square on 1/phi.
struct PriorSpec {
  LogNormalPrior r0b;
  std::vector<BetaPrior> f;
  std::vector<BetaPrior> psi;
  double inverse_phi_df = 1.0;

  /// Density of phi implied by the chi-square on 1/phi, including the 1/phi^2 change of variables.
  double phi_log_density(double phi) const;

  static PriorSpec bc_2020();
};

/// Constrained parameters of one region.
struct RegionParams {
  std::vector<double> f;
  std::vector<double> psi;
  double phi = 1.0;

  PhaseValues phases() const { return PhaseValues{f, psi}; }
};

/// Full constrained parameter vector. `r0b` holds one shared value in
/// hierarchical mode and one value per region otherwise.
struct ParamSet {
  std::vector<double> r0b;
  std::vector<RegionParams> regions;

  double r0b_of(std::size_t region) const { return r0b.size() == 1 ? r0b[0] : r0b.at(region); }
  double beta(std::size_t region, const FixedParams& fixed) const {
    return r0b_of(region) / fixed.r0_factor();
  }
};

/// Everything the likelihood needs besides the parameters and the data.
struct ModelContext {
  DistancingSchedule distancing;
  TestingSchedule testing;
  FixedParams fixed;
  DelayKernel kernel;
  std::vector<RegionConfig> regions;
  std::vector<CompartmentState> initial_states;
  PriorSpec priors;
  double step = 0.1;
  bool share_r0b = true;

  std::size_t region_count() const { return regions.size(); }
  std::size_t phase_count() const { return distancing.phase_count(); }
  std::size_t testing_count() const { return testing.segment_count(); }

  /// Day offset of `d` from the model start.
  double time_of(Date d) const { return static_cast<double>(days_between(distancing.model_start, d)); }

  std::optional<std::size_t> region_index(const std::string& name) const;

  /// Throws std::invalid_argument when the pieces are inconsistent.
  void check() const;
};

/// Mapping between the flat parameter vector and named parameters.
///
/// Hierarchical order: [r0b, region 1 block, region 2 block, ...] with each
/// block [f2..f(n+1), psi1..psim, phi]. Non-hierarchical mode prefixes every
/// region block with its own r0b.
class ParameterLayout {
 public:
  ParameterLayout() = default;
  ParameterLayout(std::vector<std::string> region_names, std::size_t phases, std::size_t testing, bool share_r0b);
  explicit ParameterLayout(const ModelContext& ctx);

  std::size_t dimension() const;
  std::size_t region_count() const { return region_names_.size(); }
  std::size_t phase_count() const { return phases_; }
  std::size_t testing_count() const { return testing_; }
  bool share_r0b() const { return share_r0b_; }
  const std::vector<std::string>& region_names() const { return region_names_; }

  std::size_t r0b_index(std::size_t region) const;
  std::size_t f_index(std::size_t region, std::size_t j) const { return block(region) + j; }
  std::size_t psi_index(std::size_t region, std::size_t k) const { return block(region) + phases_ + k; }
  std::size_t phi_index(std::size_t region) const { return block(region) + phases_ + testing_; }

  /// Column names such as "r0b", "fraser.f3", "interior.psi2", "north.phi".
  std::vector<std::string> names() const;

  /// Flat constrained vector <-> ParamSet.
  std::vector<double> flatten(const ParamSet& p) const;
  ParamSet unflatten(std::span<const double> values) const;

 private:
  std::size_t block(std::size_t region) const;
  std::size_t block_size() const { return phases_ + testing_ + 1; }

  std::vector<std::string> region_names_;
  std::size_t phases_ = 0;
  std::size_t testing_ = 0;
  bool share_r0b_ = true;
};

/// Latent trajectory of one region from the model start to `t_end` days.
Trajectory simulate_region(const ModelContext& ctx, const ParamSet& p, std::size_t region, double t_end);

/// Expected reported cases for each calendar day in [first, last] given a
/// trajectory that reaches `last`. Values are not floored.
std::vector<double> expected_case_path(const ModelContext& ctx, const RegionParams& rp, const Trajectory& traj,
                                       Date first, Date last);

}  // namespace seiqr
