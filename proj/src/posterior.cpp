#include "seiqr/posterior.hpp"

#include <array>
#include <cmath>
#include <string>
#include <utility>

#include <boost/math/special_functions/digamma.hpp>

namespace seiqr {

double logistic(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double logit(double x) { return std::log(x) - std::log1p(-x); }

namespace {

constexpr std::size_t kMaxPhases = 12;

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

struct RegionGradient {
  double beta = 0.0;
  std::vector<double> f;
  std::vector<double> psi;
  double phi = 0.0;
};

template <class T>
std::vector<T> onset_flux(const ModelContext& ctx, std::size_t region, const T& beta, std::span<const T> f,
                          std::span<const double> breakpoints, double t_end) {
  BasicCompartments<T> init;
  for (std::size_t i = 0; i < kCompartments; ++i) init[i] = T(ctx.initial_states[region][i]);
  std::vector<T> flux(grid_intervals(0.0, t_end, ctx.step) + 1);
  const double k2 = ctx.fixed.k2;
  integrate_observed<T>(init, 0.0, t_end, beta, f, breakpoints, ctx.fixed, ctx.regions[region].population, ctx.step,
                        [&](std::size_t k, const BasicCompartments<T>& x) {
                          flux[k] = k2 * (x[comp::E2] + x[comp::E2d]);
                        });
  return flux;
}

double region_log_likelihood(const ModelContext& ctx, std::size_t region, const Posterior::RegionData& rd,
                             double beta, const RegionParams& rp, std::span<const double> breakpoints,
                             std::span<const double> weights) {
  if (rd.observations.empty()) return 0.0;
  const auto flux = onset_flux<double>(ctx, region, beta, std::span<const double>(rp.f), breakpoints, rd.t_end);
  double ll = 0.0;
  for (const auto& obs : rd.observations) {
    const double mu = rp.psi[obs.segment] * delayed_onsets<double>(flux, obs.grid_index, weights);
    ll += nb2_log_pmf(obs.count, std::max(mu, kMinExpectedCases), rp.phi);
  }
  return ll;
}

template <std::size_t Phases>
double region_log_likelihood_gradient(const ModelContext& ctx, std::size_t region, const Posterior::RegionData& rd,
                                      double beta, const RegionParams& rp, std::span<const double> breakpoints,
                                      std::span<const double> weights, RegionGradient& g) {
  using D = Dual<Phases + 1>;
  if (rd.observations.empty()) return 0.0;
  const D beta_d = D::variable(beta, 0);
  std::array<D, Phases> f_d;
  for (std::size_t j = 0; j < Phases; ++j) f_d[j] = D::variable(rp.f[j], j + 1);
  const auto flux = onset_flux<D>(ctx, region, beta_d, std::span<const D>(f_d), breakpoints, rd.t_end);

  const double phi = rp.phi;
  const double digamma_phi = boost::math::digamma(phi);
  double ll = 0.0;
  for (const auto& obs : rd.observations) {
    const D conv = delayed_onsets<D>(flux, obs.grid_index, weights);
    const double psi = rp.psi[obs.segment];
    double mu = psi * conv.val;
    const bool floored = mu < kMinExpectedCases;
    if (floored) mu = kMinExpectedCases;
    const double c = static_cast<double>(obs.count);
    ll += nb2_log_pmf(obs.count, mu, phi);

    if (!floored) {
      const double dmu = c / mu - (c + phi) / (mu + phi);
      g.beta += dmu * psi * conv.d[0];
      for (std::size_t j = 0; j < Phases; ++j) g.f[j] += dmu * psi * conv.d[j + 1];
      g.psi[obs.segment] += dmu * conv.val;
    }
    const double digamma_diff = obs.count == 0 ? 0.0 : boost::math::digamma(c + phi) - digamma_phi;
    g.phi += digamma_diff - std::log1p(mu / phi) + (mu - c) / (mu + phi);
  }
  return ll;
}

using GradientFn = double (*)(const ModelContext&, std::size_t, const Posterior::RegionData&, double,
                              const RegionParams&, std::span<const double>, std::span<const double>,
                              RegionGradient&);

template <std::size_t... Is>
constexpr std::array<GradientFn, sizeof...(Is)> make_gradient_table(std::index_sequence<Is...>) {
  return {&region_log_likelihood_gradient<Is>...};
}

constexpr auto kGradientTable = make_gradient_table(std::make_index_sequence<kMaxPhases + 1>{});

}  // namespace

Posterior::Posterior(ModelContext ctx, const std::vector<CaseSeries>& data)
    : ctx_(std::move(ctx)), layout_(ctx_) {
  ctx_.check();
  if (ctx_.phase_count() > kMaxPhases) {
    throw std::invalid_argument("at most " + std::to_string(kMaxPhases) + " distancing phases are supported");
  }
  breakpoints_ = ctx_.distancing.breakpoint_offsets();
  kernel_weights_ = ctx_.kernel.weights(ctx_.step);
  region_data_.resize(ctx_.region_count());
  for (const auto& series : data) {
    const auto region = ctx_.region_index(series.region);
    if (!region) throw std::invalid_argument("data refer to unknown region '" + series.region + "'");
    RegionData& rd = region_data_[*region];
    if (!rd.observations.empty()) throw std::invalid_argument("duplicate series for region '" + series.region + "'");
    for (std::size_t k = 0; k < series.size(); ++k) {
      const Date d = series.date(k);
      const double t = ctx_.time_of(d);
      if (t <= 0.0) throw std::invalid_argument("observation on " + format_date(d) + " precedes the model start");
      const std::size_t segment = ctx_.testing.segment_of(d);
      const auto index = static_cast<std::size_t>(std::llround(t / ctx_.step));
      rd.observations.push_back({index, segment, series.counts[k]});
      rd.t_end = std::max(rd.t_end, t);
    }
    if (!rd.observations.empty()) check_grid(0.0, rd.t_end, ctx_.step, breakpoints_);
  }
}

std::size_t Posterior::observation_count() const {
  std::size_t n = 0;
  for (const auto& rd : region_data_) n += rd.observations.size();
  return n;
}

ParamSet Posterior::constrain(std::span<const double> u) const {
  if (u.size() != dimension()) throw std::invalid_argument("unconstrained vector has the wrong dimension");
  std::vector<double> values(u.begin(), u.end());
  for (std::size_t i = 0; i < layout_.region_count(); ++i) {
    values[layout_.r0b_index(i)] = std::exp(u[layout_.r0b_index(i)]);
    for (std::size_t j = 0; j < layout_.phase_count(); ++j) {
      values[layout_.f_index(i, j)] = logistic(u[layout_.f_index(i, j)]);
    }
    for (std::size_t k = 0; k < layout_.testing_count(); ++k) {
      values[layout_.psi_index(i, k)] = logistic(u[layout_.psi_index(i, k)]);
    }
    values[layout_.phi_index(i)] = std::exp(u[layout_.phi_index(i)]);
  }
  return layout_.unflatten(values);
}

std::vector<double> Posterior::unconstrain(const ParamSet& p) const {
  std::vector<double> u = layout_.flatten(p);
  for (std::size_t i = 0; i < layout_.region_count(); ++i) {
    u[layout_.r0b_index(i)] = std::log(p.r0b_of(i));
    for (std::size_t j = 0; j < layout_.phase_count(); ++j) u[layout_.f_index(i, j)] = logit(p.regions[i].f[j]);
    for (std::size_t k = 0; k < layout_.testing_count(); ++k) {
      u[layout_.psi_index(i, k)] = logit(p.regions[i].psi[k]);
    }
    u[layout_.phi_index(i)] = std::log(p.regions[i].phi);
  }
  return u;
}

double log_jacobian(const ParameterLayout& layout, std::span<const double> u) {
  double lj = 0.0;
  const std::size_t shared = layout.share_r0b() ? 1 : layout.region_count();
  for (std::size_t i = 0; i < shared; ++i) lj += u[layout.r0b_index(i)];
  for (std::size_t i = 0; i < layout.region_count(); ++i) {
    auto logit_term = [&](double x) { return -softplus(-x) - softplus(x); };
    for (std::size_t j = 0; j < layout.phase_count(); ++j) lj += logit_term(u[layout.f_index(i, j)]);
    for (std::size_t k = 0; k < layout.testing_count(); ++k) lj += logit_term(u[layout.psi_index(i, k)]);
    lj += u[layout.phi_index(i)];
  }
  return lj;
}

double Posterior::log_prior(const ParamSet& p) const {
  const PriorSpec& pr = ctx_.priors;
  double lp = 0.0;
  for (double r : p.r0b) lp += pr.r0b.log_density(r);
  for (const auto& rp : p.regions) {
    for (std::size_t j = 0; j < rp.f.size(); ++j) lp += pr.f.at(j).log_density(rp.f[j]);
    for (std::size_t k = 0; k < rp.psi.size(); ++k) lp += pr.psi.at(k).log_density(rp.psi[k]);
    lp += pr.phi_log_density(rp.phi);
  }
  return std::isnan(lp) ? -INFINITY : lp;
}

double Posterior::log_likelihood(const ParamSet& p) const {
  double ll = 0.0;
  for (std::size_t i = 0; i < ctx_.region_count(); ++i) {
    ll += region_log_likelihood(ctx_, i, region_data_[i], p.beta(i, ctx_.fixed), p.regions.at(i), breakpoints_,
                                kernel_weights_);
  }
  return ll;
}

double Posterior::log_posterior(std::span<const double> u) const {
  for (double x : u) {
    if (!std::isfinite(x)) return -INFINITY;
  }
  const ParamSet p = constrain(u);
  const double lp = log_prior(p);
  if (!std::isfinite(lp)) return -INFINITY;
  double ll = 0.0;
  try {
    ll = log_likelihood(p);
  } catch (const IntegrationError&) {
    return -INFINITY;
  }
  const double total = lp + ll + log_jacobian(layout_, u);
  return std::isfinite(total) ? total : -INFINITY;
}

double Posterior::log_posterior_gradient(std::span<const double> u, std::span<double> grad) const {
  if (grad.size() != dimension()) throw std::invalid_argument("gradient buffer has the wrong dimension");
  const ParamSet p = constrain(u);
  const PriorSpec& pr = ctx_.priors;
  const std::size_t phases = layout_.phase_count();
  const std::size_t testing = layout_.testing_count();
  std::fill(grad.begin(), grad.end(), 0.0);

  double ll = 0.0;
  for (std::size_t i = 0; i < ctx_.region_count(); ++i) {
    RegionGradient g;
    g.f.assign(phases, 0.0);
    g.psi.assign(testing, 0.0);
    const RegionParams& rp = p.regions[i];
    const double beta = p.beta(i, ctx_.fixed);
    ll += kGradientTable[phases](ctx_, i, region_data_[i], beta, rp, breakpoints_, kernel_weights_, g);

    // d beta / d log R0b = beta
    grad[layout_.r0b_index(i)] += g.beta * beta;
    for (std::size_t j = 0; j < phases; ++j) {
      const double f = rp.f[j];
      grad[layout_.f_index(i, j)] = g.f[j] * f * (1.0 - f) + pr.f[j].a * (1.0 - f) - pr.f[j].b * f;
    }
    for (std::size_t k = 0; k < testing; ++k) {
      const double s = rp.psi[k];
      grad[layout_.psi_index(i, k)] = g.psi[k] * s * (1.0 - s) + pr.psi[k].a * (1.0 - s) - pr.psi[k].b * s;
    }
    grad[layout_.phi_index(i)] = g.phi * rp.phi - 0.5 * pr.inverse_phi_df + 0.5 / rp.phi;
  }
  const std::size_t shared = layout_.share_r0b() ? 1 : layout_.region_count();
  for (std::size_t i = 0; i < shared; ++i) {
    const std::size_t idx = layout_.r0b_index(i);
    grad[idx] -= (u[idx] - pr.r0b.mu) / (pr.r0b.sigma * pr.r0b.sigma);
  }

  const std::vector<std::string> names = layout_.names();
  for (std::size_t k = 0; k < grad.size(); ++k) {
    if (!std::isfinite(grad[k])) {
      throw GradientError("non-finite gradient in coordinate " + std::to_string(k) + " (" + names[k] + ")");
    }
  }
  const double total = log_prior(p) + ll + log_jacobian(layout_, u);
  return std::isfinite(total) ? total : -INFINITY;
}

std::vector<double> Posterior::sample_prior(std::mt19937_64& rng) const {
  const PriorSpec& pr = ctx_.priors;
  auto beta_draw = [&](const BetaPrior& b) {
    for (;;) {
      std::gamma_distribution<double> ga(b.a, 1.0);
      std::gamma_distribution<double> gb(b.b, 1.0);
      const double x = ga(rng);
      const double y = gb(rng);
      const double v = x / (x + y);
      if (v > 0.0 && v < 1.0) return logit(v);
    }
  };
  std::vector<double> u(dimension());
  std::normal_distribution<double> normal(pr.r0b.mu, pr.r0b.sigma);
  std::chi_squared_distribution<double> chi2(pr.inverse_phi_df);
  const std::size_t shared = layout_.share_r0b() ? 1 : layout_.region_count();
  for (std::size_t i = 0; i < shared; ++i) u[layout_.r0b_index(i)] = normal(rng);
  for (std::size_t i = 0; i < layout_.region_count(); ++i) {
    for (std::size_t j = 0; j < layout_.phase_count(); ++j) u[layout_.f_index(i, j)] = beta_draw(pr.f[j]);
    for (std::size_t k = 0; k < layout_.testing_count(); ++k) u[layout_.psi_index(i, k)] = beta_draw(pr.psi[k]);
    double x = 0.0;
    while (!(x > 0.0)) x = chi2(rng);
    u[layout_.phi_index(i)] = -std::log(x);
  }
  return u;
}

}  // namespace seiqr
