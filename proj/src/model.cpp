#include "seiqr/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace seiqr {

double BetaPrior::log_density(double x) const {
  if (!(x > 0.0 && x < 1.0)) return -INFINITY;
  const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  return log_norm + (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x);
}

double LogNormalPrior::log_density(double x) const {
  if (!(x > 0.0)) return -INFINITY;
  const double z = (std::log(x) - mu) / sigma;
  return -0.5 * z * z - std::log(x * sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double PriorSpec::phi_log_density(double phi) const {
  if (!(phi > 0.0)) return -INFINITY;
  const double x = 1.0 / phi;
  const double half = 0.5 * inverse_phi_df;
  const double chi2 = (half - 1.0) * std::log(x) - 0.5 * x - half * std::numbers::ln2 - std::lgamma(half);
  return chi2 - 2.0 * std::log(phi);
}

PriorSpec PriorSpec::bc_2020() {
  PriorSpec p;
  p.r0b = {std::log(2.6), 0.2};
  p.f = {{1.393, 1.590}, {1.500, 1.500}, {1.590, 1.393}, {1.655, 1.281}, {1.694, 1.174}, {1.590, 1.393}};
  p.psi = {{1.217, 2.951}, {1.509, 3.036}, {1.870, 3.030}, {2.263, 2.894}};
  p.inverse_phi_df = 1.0;
  return p;
}

std::optional<std::size_t> ModelContext::region_index(const std::string& name) const {
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (regions[i].name == name) return i;
  }
  return std::nullopt;
}

void ModelContext::check() const {
  fixed.check();
  if (regions.empty()) throw std::invalid_argument("model has no regions");
  if (initial_states.size() != regions.size()) {
    throw std::invalid_argument("one initial state per region is required");
  }
  for (const auto& r : regions) {
    if (!(r.population > 0.0)) throw std::invalid_argument("region '" + r.name + "' needs a positive population");
  }
  if (priors.f.size() != phase_count()) {
    throw std::invalid_argument("contact-fraction prior count does not match the distancing schedule");
  }
  if (priors.psi.size() != testing_count()) {
    throw std::invalid_argument("testing-fraction prior count does not match the testing schedule");
  }
  if (!(step > 0.0)) throw std::invalid_argument("integration step must be positive");
  auto issues = validate(distancing);
  auto more = validate(testing);
  issues.insert(issues.end(), more.begin(), more.end());
  if (!issues.empty()) throw std::invalid_argument("invalid schedule: " + issues.front());
}

ParameterLayout::ParameterLayout(std::vector<std::string> region_names, std::size_t phases, std::size_t testing,
                                 bool share_r0b)
    : region_names_(std::move(region_names)), phases_(phases), testing_(testing), share_r0b_(share_r0b) {}

ParameterLayout::ParameterLayout(const ModelContext& ctx)
    : phases_(ctx.phase_count()), testing_(ctx.testing_count()), share_r0b_(ctx.share_r0b) {
  for (const auto& r : ctx.regions) region_names_.push_back(r.name);
}

std::size_t ParameterLayout::dimension() const {
  const std::size_t n = region_names_.size();
  return (share_r0b_ ? 1 : n) + n * block_size();
}

std::size_t ParameterLayout::block(std::size_t region) const {
  if (share_r0b_) return 1 + region * block_size();
  return region * (block_size() + 1) + 1;
}

std::size_t ParameterLayout::r0b_index(std::size_t region) const {
  return share_r0b_ ? 0 : block(region) - 1;
}

std::vector<std::string> ParameterLayout::names() const {
  std::vector<std::string> out(dimension());
  for (std::size_t i = 0; i < region_names_.size(); ++i) {
    const std::string& r = region_names_[i];
    out[r0b_index(i)] = share_r0b_ ? "r0b" : r + ".r0b";
    for (std::size_t j = 0; j < phases_; ++j) out[f_index(i, j)] = r + ".f" + std::to_string(j + 2);
    for (std::size_t k = 0; k < testing_; ++k) out[psi_index(i, k)] = r + ".psi" + std::to_string(k + 1);
    out[phi_index(i)] = r + ".phi";
  }
  return out;
}

std::vector<double> ParameterLayout::flatten(const ParamSet& p) const {
  std::vector<double> out(dimension());
  for (std::size_t i = 0; i < region_names_.size(); ++i) {
    const RegionParams& rp = p.regions.at(i);
    out[r0b_index(i)] = p.r0b_of(i);
    for (std::size_t j = 0; j < phases_; ++j) out[f_index(i, j)] = rp.f.at(j);
    for (std::size_t k = 0; k < testing_; ++k) out[psi_index(i, k)] = rp.psi.at(k);
    out[phi_index(i)] = rp.phi;
  }
  return out;
}

ParamSet ParameterLayout::unflatten(std::span<const double> values) const {
  if (values.size() != dimension()) throw std::invalid_argument("parameter vector has the wrong dimension");
  ParamSet p;
  const std::size_t n = region_names_.size();
  p.r0b.resize(share_r0b_ ? 1 : n);
  p.regions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.r0b[share_r0b_ ? 0 : i] = values[r0b_index(i)];
    RegionParams& rp = p.regions[i];
    rp.f.resize(phases_);
    rp.psi.resize(testing_);
    for (std::size_t j = 0; j < phases_; ++j) rp.f[j] = values[f_index(i, j)];
    for (std::size_t k = 0; k < testing_; ++k) rp.psi[k] = values[psi_index(i, k)];
    rp.phi = values[phi_index(i)];
  }
  return p;
}

Trajectory simulate_region(const ModelContext& ctx, const ParamSet& p, std::size_t region, double t_end) {
  const RegionConfig& rc = ctx.regions.at(region);
  Trajectory traj = integrate(ctx.initial_states.at(region), 0.0, t_end, p.beta(region, ctx.fixed),
                              p.regions.at(region).phases(), ctx.distancing, ctx.fixed, rc.population, ctx.step);
  traj.region = rc;
  return traj;
}

std::vector<double> expected_case_path(const ModelContext& ctx, const RegionParams& rp, const Trajectory& traj,
                                       Date first, Date last) {
  const auto weights = ctx.kernel.weights(traj.step);
  std::vector<double> flux(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    flux[k] = ctx.fixed.k2 * (traj.states[k][comp::E2] + traj.states[k][comp::E2d]);
  }
  std::vector<double> out;
  for (Date d = first; d <= last; d = add_days(d, 1)) {
    const std::size_t index = traj.index_of(ctx.time_of(d));
    const double psi = rp.psi.at(ctx.testing.segment_of(d));
    out.push_back(psi * delayed_onsets<double>(flux, index, weights));
  }
  return out;
}

}  // namespace seiqr
