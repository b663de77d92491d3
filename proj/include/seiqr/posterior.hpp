#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "seiqr/model.hpp"

namespace seiqr {

/// Raised when a gradient coordinate is not finite.
class GradientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Joint posterior of the regional model on the unconstrained scale.
///
/// Unconstrained coordinates are log R0b, logit f, logit psi and log phi.
/// Gradients are exact for the discretized model: the RK4 recursion and the
/// trapezoid convolution are differentiated in forward mode, so they agree
/// with finite differences of log_posterior up to rounding.
///
/// Instances are immutable after construction and safe to evaluate from
/// several threads at once.
class Posterior {
 public:
  /// `data` is matched to regions by name; regions without a series contribute no likelihood.
  Posterior(ModelContext ctx, const std::vector<CaseSeries>& data);

  const ModelContext& context() const { return ctx_; }
  const ParameterLayout& layout() const { return layout_; }
  std::size_t dimension() const { return layout_.dimension(); }

  ParamSet constrain(std::span<const double> u) const;
  std::vector<double> unconstrain(const ParamSet& p) const;

  /// Sum of prior log densities; -infinity outside the support.
  double log_prior(const ParamSet& p) const;
  /// Negative-binomial log likelihood summed over regions and observed days.
  /// Integration failures propagate as IntegrationError.
  double log_likelihood(const ParamSet& p) const;
  /// log_prior + log_likelihood + log |d constrain / du|; -infinity when not finite.
  double log_posterior(std::span<const double> u) const;
  /// Returns log_posterior(u) and writes its gradient. Throws GradientError
  /// naming the coordinate when a component is not finite.
  double log_posterior_gradient(std::span<const double> u, std::span<double> grad) const;

  /// Independent prior draw on the unconstrained scale.
  std::vector<double> sample_prior(std::mt19937_64& rng) const;

  std::size_t observation_count() const;

  struct Observation {
    std::size_t grid_index;
    std::size_t segment;
    std::int64_t count;
  };
  struct RegionData {
    std::vector<Observation> observations;
    double t_end = 0.0;
  };

 private:
  ModelContext ctx_;
  ParameterLayout layout_;
  std::vector<double> breakpoints_;
  std::vector<double> kernel_weights_;
  std::vector<RegionData> region_data_;
};

/// Log |d constrain / du| for the unconstrained vector `u`.
double log_jacobian(const ParameterLayout& layout, std::span<const double> u);

double logistic(double u);
double logit(double x);

}  // namespace seiqr
