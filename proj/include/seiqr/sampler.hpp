#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace seiqr {

/// Log density with gradient on an unconstrained space. Implementations must
/// be callable concurrently from several chains.
class LogDensity {
 public:
  virtual ~LogDensity() = default;
  virtual std::size_t dimension() const = 0;
  /// Returns -infinity outside the support.
  virtual double log_density(std::span<const double> x) const = 0;
  /// Returns the log density and writes its gradient. May throw; the sampler
  /// treats exceptions and non-finite results as divergences.
  virtual double log_density_gradient(std::span<const double> x, std::span<double> grad) const = 0;
};

class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SamplerConfig {
  std::size_t chains = 4;
  std::size_t warmup_iters = 1000;
  std::size_t sampling_iters = 1000;
  double target_accept = 0.8;
  std::size_t max_leapfrog = 64;
  std::uint64_t seed = 20200301;
  bool parallel_chains = true;
  std::size_t max_init_attempts = 100;

  /// Throws std::invalid_argument when counts are zero or target_accept is outside (0, 1).
  void check() const;
};

/// Seed of chain `chain`, derived from the master seed by a fixed offset.
std::uint64_t chain_seed(std::uint64_t master, std::size_t chain);

/// Post-warmup draws of all chains.
struct PosteriorDraws {
  std::vector<std::string> names;
  std::size_t chains = 0;
  std::size_t iterations = 0;
  std::vector<double> values;          // [chain][iteration][parameter]
  std::vector<double> accept_stat;     // [chain][iteration]
  std::vector<std::uint8_t> divergent; // [chain][iteration]
  std::vector<double> step_size;       // [chain][iteration]
  std::vector<std::uint32_t> leapfrog_steps;
  std::vector<std::uint64_t> chain_seeds;

  std::size_t dimension() const { return names.size(); }
  std::size_t draw_count() const { return chains * iterations; }
  double at(std::size_t chain, std::size_t iter, std::size_t param) const {
    return values[(chain * iterations + iter) * dimension() + param];
  }
  std::span<const double> draw(std::size_t chain, std::size_t iter) const {
    return {values.data() + (chain * iterations + iter) * dimension(), dimension()};
  }
  /// Every draw of one parameter, chains concatenated.
  std::vector<double> parameter(std::size_t param) const;
  std::size_t divergences() const;
  /// Index of the parameter called `name`; throws std::out_of_range when absent.
  std::size_t index_of(const std::string& name) const;
};

/// Position, momentum and the cached log density/gradient at the position.
struct PhasePoint {
  std::vector<double> q;
  std::vector<double> p;
  std::vector<double> grad;
  double log_density = -std::numeric_limits<double>::infinity();
};

/// Evaluates log density and gradient at z.q into z; false when not finite.
bool evaluate(const LogDensity& target, PhasePoint& z);

/// `n_steps` leapfrog steps with a diagonal inverse metric. Returns false if a
/// non-finite value appears along the path (a divergence).
bool leapfrog(PhasePoint& z, double step, std::size_t n_steps, const LogDensity& target,
              std::span<const double> inv_metric);

/// Potential plus kinetic energy.
double hamiltonian(const PhasePoint& z, std::span<const double> inv_metric);

/// Maps an unconstrained point to its stored representation (e.g. constrained parameters).
using DrawTransform = std::function<void(std::span<const double> unconstrained, std::span<double> out)>;

/// Initial points: one prior draw per chain, redrawn until the target is finite.
std::vector<std::vector<double>> initialize_chains(
    const SamplerConfig& cfg, const LogDensity& target,
    const std::function<std::vector<double>(std::mt19937_64&)>& prior_draw);

/// Hamiltonian Monte Carlo with jittered path length, dual-averaging step
/// size adaptation and a diagonal metric estimated during warmup.
PosteriorDraws hmc_run(const LogDensity& target, const SamplerConfig& cfg,
                       const std::vector<std::vector<double>>& inits, std::vector<std::string> names = {},
                       const DrawTransform& transform = {});

struct ParameterDiagnostics {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double rhat = 1.0;      // rank-normalized split R-hat
  double ess_bulk = 0.0;  // rank-normalized bulk effective sample size
  bool degenerate = false;
  std::vector<double> chain_means;
  std::vector<double> chain_sds;
};

struct Diagnostics {
  std::vector<ParameterDiagnostics> parameters;
  std::size_t divergences = 0;
  std::size_t total_draws = 0;

  double max_rhat() const;
  double min_ess() const;
};

/// Split R-hat and bulk ESS of every parameter. Requires >= 2 chains and >= 4 draws per chain.
Diagnostics diagnose(const PosteriorDraws& draws);

/// Split R-hat of a set of equally long chains.
double split_rhat(const std::vector<std::vector<double>>& chains, bool* degenerate = nullptr);
/// Bulk effective sample size of a set of equally long chains.
double ess_bulk(const std::vector<std::vector<double>>& chains, bool* degenerate = nullptr);

}  // namespace seiqr
