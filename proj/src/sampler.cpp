#include "seiqr/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include <boost/math/distributions/normal.hpp>

namespace seiqr {

void SamplerConfig::check() const {
  if (chains == 0 || warmup_iters == 0 || sampling_iters == 0 || max_leapfrog == 0) {
    throw std::invalid_argument("sampler counts must be positive");
  }
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw std::invalid_argument("target_accept must lie in (0, 1)");
  }
}

std::uint64_t chain_seed(std::uint64_t master, std::size_t chain) {
  // splitmix64 finalizer over a fixed per-chain offset
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(chain) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> PosteriorDraws::parameter(std::size_t param) const {
  std::vector<double> out;
  out.reserve(draw_count());
  for (std::size_t c = 0; c < chains; ++c) {
    for (std::size_t i = 0; i < iterations; ++i) out.push_back(at(c, i, param));
  }
  return out;
}

std::size_t PosteriorDraws::divergences() const {
  return static_cast<std::size_t>(std::count(divergent.begin(), divergent.end(), std::uint8_t{1}));
}

std::size_t PosteriorDraws::index_of(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("no parameter named '" + name + "' in draws");
  return static_cast<std::size_t>(it - names.begin());
}

bool evaluate(const LogDensity& target, PhasePoint& z) {
  z.grad.resize(z.q.size());
  try {
    z.log_density = target.log_density_gradient(z.q, z.grad);
  } catch (const std::exception&) {
    z.log_density = -INFINITY;
    return false;
  }
  if (!std::isfinite(z.log_density)) return false;
  return std::all_of(z.grad.begin(), z.grad.end(), [](double g) { return std::isfinite(g); });
}

bool leapfrog(PhasePoint& z, double step, std::size_t n_steps, const LogDensity& target,
              std::span<const double> inv_metric) {
  const std::size_t n = z.q.size();
  for (std::size_t s = 0; s < n_steps; ++s) {
    for (std::size_t i = 0; i < n; ++i) z.p[i] += 0.5 * step * z.grad[i];
    for (std::size_t i = 0; i < n; ++i) z.q[i] += step * inv_metric[i] * z.p[i];
    if (!evaluate(target, z)) return false;
    for (std::size_t i = 0; i < n; ++i) z.p[i] += 0.5 * step * z.grad[i];
  }
  return true;
}

double hamiltonian(const PhasePoint& z, std::span<const double> inv_metric) {
  double kinetic = 0.0;
  for (std::size_t i = 0; i < z.p.size(); ++i) kinetic += z.p[i] * z.p[i] * inv_metric[i];
  return -z.log_density + 0.5 * kinetic;
}

namespace {

constexpr double kDivergenceThreshold = 1000.0;

class DualAveraging {
 public:
  DualAveraging(double step, double delta) : delta_(delta) { restart(step); }

  void restart(double step) {
    mu_ = std::log(10.0 * step);
    s_bar_ = 0.0;
    x_bar_ = 0.0;
    counter_ = 0;
  }

  double update(double accept_prob) {
    ++counter_;
    const double c = static_cast<double>(counter_);
    const double eta = 1.0 / (c + kT0);
    s_bar_ = (1.0 - eta) * s_bar_ + eta * (delta_ - std::min(1.0, accept_prob));
    const double x = mu_ - s_bar_ * std::sqrt(c) / kGamma;
    const double x_eta = std::pow(c, -kKappa);
    x_bar_ = (1.0 - x_eta) * x_bar_ + x_eta * x;
    return std::exp(x);
  }

  double final_step() const { return std::exp(x_bar_); }

 private:
  static constexpr double kGamma = 0.05;
  static constexpr double kT0 = 10.0;
  static constexpr double kKappa = 0.75;
  double delta_;
  double mu_ = 0.0;
  double s_bar_ = 0.0;
  double x_bar_ = 0.0;
  std::size_t counter_ = 0;
};

// Running mean and variance.
class Welford {
 public:
  explicit Welford(std::size_t n) : mean_(n, 0.0), m2_(n, 0.0) {}
  void add(std::span<const double> x) {
    ++count_;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - mean_[i];
      mean_[i] += d / static_cast<double>(count_);
      m2_[i] += d * (x[i] - mean_[i]);
    }
  }
  void reset() {
    std::fill(mean_.begin(), mean_.end(), 0.0);
    std::fill(m2_.begin(), m2_.end(), 0.0);
    count_ = 0;
  }
  std::size_t count() const { return count_; }
  double variance(std::size_t i) const { return count_ > 1 ? m2_[i] / static_cast<double>(count_ - 1) : 1.0; }

 private:
  std::vector<double> mean_, m2_;
  std::size_t count_ = 0;
};

struct Chain {
  const LogDensity& target;
  const SamplerConfig& cfg;
  std::mt19937_64 rng;
  std::vector<double> inv_metric;
  PhasePoint z;

  void draw_momentum(PhasePoint& point) {
    std::normal_distribution<double> normal(0.0, 1.0);
    point.p.resize(point.q.size());
    for (std::size_t i = 0; i < point.p.size(); ++i) point.p[i] = normal(rng) / std::sqrt(inv_metric[i]);
  }

  struct Transition {
    double accept_prob;
    bool divergent;
  };

  Transition transition(double step, std::size_t n_steps) {
    draw_momentum(z);
    const double h0 = hamiltonian(z, inv_metric);
    PhasePoint proposal = z;
    const bool ok = leapfrog(proposal, step, n_steps, target, inv_metric);
    double delta = ok ? hamiltonian(proposal, inv_metric) - h0 : INFINITY;
    if (std::isnan(delta)) delta = INFINITY;
    const bool divergent = !(delta <= kDivergenceThreshold);
    const double accept_prob = divergent ? 0.0 : std::min(1.0, std::exp(-delta));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    if (unif(rng) < accept_prob) z = std::move(proposal);
    return {accept_prob, divergent};
  }

  // Doubles or halves the step until the one-step acceptance crosses 0.8.
  double reasonable_step(double step) {
    const double log_target = std::log(0.8);
    int direction = 0;
    for (int iter = 0; iter < 100; ++iter) {
      PhasePoint trial = z;
      draw_momentum(trial);
      const double h0 = hamiltonian(trial, inv_metric);
      const bool ok = leapfrog(trial, step, 1, target, inv_metric);
      double delta = ok ? h0 - hamiltonian(trial, inv_metric) : -INFINITY;
      if (std::isnan(delta)) delta = -INFINITY;
      if (direction == 0) direction = delta > log_target ? 1 : -1;
      if (direction == 1 && !(delta > log_target)) break;
      if (direction == -1 && !(delta < log_target)) break;
      step = direction == 1 ? 2.0 * step : 0.5 * step;
      if (step > 1e7) throw SamplerError("step size search diverged: the target looks improper");
      if (step < 1e-12) throw SamplerError("step size collapsed to zero during initialization");
    }
    return step;
  }
};

struct ChainOutput {
  std::vector<double> values;
  std::vector<double> accept;
  std::vector<std::uint8_t> divergent;
  std::vector<double> step;
  std::vector<std::uint32_t> leapfrog;
};

ChainOutput run_chain(const LogDensity& target, const SamplerConfig& cfg, const std::vector<double>& init,
                      std::uint64_t seed, std::size_t out_dim, const DrawTransform& transform) {
  const std::size_t dim = target.dimension();
  Chain chain{target, cfg, std::mt19937_64(seed), std::vector<double>(dim, 1.0), PhasePoint{}};
  chain.z.q = init;
  if (!evaluate(target, chain.z)) throw SamplerError("initial point has a non-finite log density or gradient");

  double step = chain.reasonable_step(1.0);
  DualAveraging adapter(step, cfg.target_accept);

  const std::size_t warmup = cfg.warmup_iters;
  const bool windowed = warmup >= 20;
  const std::size_t init_buffer = std::max<std::size_t>(1, warmup * 15 / 100);
  const std::size_t term_buffer = std::max<std::size_t>(1, warmup / 10);
  const std::size_t window_mid = warmup / 2;
  const std::size_t window_end = warmup - term_buffer;
  Welford window(dim);

  ChainOutput out;
  const std::size_t total = warmup + cfg.sampling_iters;
  out.values.reserve(cfg.sampling_iters * out_dim);
  std::uniform_int_distribution<std::size_t> path_length(1, cfg.max_leapfrog);
  std::vector<double> buffer(out_dim);

  for (std::size_t it = 0; it < total; ++it) {
    const std::size_t n_steps = path_length(chain.rng);
    const auto tr = chain.transition(step, n_steps);
    if (it < warmup) {
      step = adapter.update(tr.accept_prob);
      if (windowed && it >= init_buffer && it < window_end) window.add(chain.z.q);
      const bool close_window = windowed && (it + 1 == window_mid || it + 1 == window_end);
      if (close_window && window.count() > 2) {
        const double n = static_cast<double>(window.count());
        for (std::size_t i = 0; i < dim; ++i) {
          chain.inv_metric[i] = (n / (n + 5.0)) * window.variance(i) + 1e-3 * (5.0 / (n + 5.0));
        }
        window.reset();
        step = chain.reasonable_step(step);
        adapter.restart(step);
      }
      if (it + 1 == warmup) step = adapter.final_step();
      continue;
    }
    if (transform) {
      transform(chain.z.q, buffer);
    } else {
      std::copy(chain.z.q.begin(), chain.z.q.end(), buffer.begin());
    }
    out.values.insert(out.values.end(), buffer.begin(), buffer.end());
    out.accept.push_back(tr.accept_prob);
    out.divergent.push_back(tr.divergent ? 1 : 0);
    out.step.push_back(step);
    out.leapfrog.push_back(static_cast<std::uint32_t>(n_steps));
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> initialize_chains(
    const SamplerConfig& cfg, const LogDensity& target,
    const std::function<std::vector<double>(std::mt19937_64&)>& prior_draw) {
  std::vector<std::vector<double>> inits;
  std::vector<double> grad(target.dimension());
  for (std::size_t c = 0; c < cfg.chains; ++c) {
    std::mt19937_64 rng(chain_seed(cfg.seed, c) ^ 0x243F6A8885A308D3ULL);
    bool found = false;
    for (std::size_t attempt = 0; attempt < cfg.max_init_attempts && !found; ++attempt) {
      std::vector<double> u = prior_draw(rng);
      double lp = -INFINITY;
      try {
        lp = target.log_density_gradient(u, grad);
      } catch (const std::exception&) {
        continue;
      }
      if (std::isfinite(lp) && std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); })) {
        inits.push_back(std::move(u));
        found = true;
      }
    }
    if (!found) {
      throw SamplerError("could not find a finite initial point for chain " + std::to_string(c) + " after " +
                         std::to_string(cfg.max_init_attempts) + " prior draws");
    }
  }
  return inits;
}

PosteriorDraws hmc_run(const LogDensity& target, const SamplerConfig& cfg,
                       const std::vector<std::vector<double>>& inits, std::vector<std::string> names,
                       const DrawTransform& transform) {
  cfg.check();
  if (inits.size() != cfg.chains) throw std::invalid_argument("one initial point per chain is required");
  const std::size_t dim = target.dimension();
  if (names.empty()) {
    for (std::size_t i = 0; i < dim; ++i) names.push_back("x" + std::to_string(i + 1));
  }
  const std::size_t out_dim = names.size();
  if (!transform && out_dim != dim) throw std::invalid_argument("names do not match the target dimension");

  std::vector<ChainOutput> outputs(cfg.chains);
  std::vector<std::exception_ptr> errors(cfg.chains);
  std::vector<std::uint64_t> seeds(cfg.chains);
  for (std::size_t c = 0; c < cfg.chains; ++c) seeds[c] = chain_seed(cfg.seed, c);
  auto work = [&](std::size_t c) {
    try {
      outputs[c] = run_chain(target, cfg, inits[c], seeds[c], out_dim, transform);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  if (cfg.parallel_chains && cfg.chains > 1) {
    std::vector<std::jthread> threads;
    for (std::size_t c = 0; c < cfg.chains; ++c) threads.emplace_back(work, c);
  } else {
    for (std::size_t c = 0; c < cfg.chains; ++c) work(c);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  PosteriorDraws draws;
  draws.names = std::move(names);
  draws.chains = cfg.chains;
  draws.iterations = cfg.sampling_iters;
  draws.chain_seeds = seeds;
  for (auto& o : outputs) {
    draws.values.insert(draws.values.end(), o.values.begin(), o.values.end());
    draws.accept_stat.insert(draws.accept_stat.end(), o.accept.begin(), o.accept.end());
    draws.divergent.insert(draws.divergent.end(), o.divergent.begin(), o.divergent.end());
    draws.step_size.insert(draws.step_size.end(), o.step.begin(), o.step.end());
    draws.leapfrog_steps.insert(draws.leapfrog_steps.end(), o.leapfrog.begin(), o.leapfrog.end());
  }
  if (2 * draws.divergences() > draws.draw_count()) {
    throw SamplerError("more than half of the sampling transitions diverged (" +
                       std::to_string(draws.divergences()) + " of " + std::to_string(draws.draw_count()) +
                       "); raise target_accept to shrink the step size");
  }
  return draws;
}

// ---------------------------------------------------------------------------
// Diagnostics

namespace {

double mean_of(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); }

double variance_of(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

std::vector<std::vector<double>> split_chains(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    out.emplace_back(c.begin(), c.begin() + half);
    out.emplace_back(c.end() - half, c.end());
  }
  return out;
}

// Normal scores of the pooled ranks (average ranks for ties).
std::vector<std::vector<double>> rank_normalize(const std::vector<std::vector<double>>& chains) {
  std::vector<std::pair<double, std::size_t>> pooled;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (std::size_t i = 0; i < chains[c].size(); ++i) pooled.emplace_back(chains[c][i], c * chains[c].size() + i);
  }
  std::sort(pooled.begin(), pooled.end());
  const double s = static_cast<double>(pooled.size());
  std::vector<double> z(pooled.size());
  const boost::math::normal standard;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j + 1 < pooled.size() && pooled[j + 1].first == pooled[i].first) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    const double score = boost::math::quantile(standard, (rank - 0.375) / (s + 0.25));
    for (std::size_t k = i; k <= j; ++k) z[pooled[k].second] = score;
    i = j + 1;
  }
  std::vector<std::vector<double>> out(chains.size());
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const std::size_t n = chains[c].size();
    out[c].assign(z.begin() + c * n, z.begin() + (c + 1) * n);
  }
  return out;
}

double rhat_basic(const std::vector<std::vector<double>>& chains, bool* degenerate) {
  const std::size_t m = chains.size();
  const double n = static_cast<double>(chains.front().size());
  std::vector<double> means(m), vars(m);
  for (std::size_t c = 0; c < m; ++c) {
    means[c] = mean_of(chains[c]);
    vars[c] = variance_of(chains[c]);
  }
  const double w = mean_of(vars);
  const double b = n * variance_of(means);
  if (!(w > 0.0)) {
    if (degenerate) *degenerate = true;
    return b > 0.0 ? INFINITY : 1.0;
  }
  return std::sqrt(((n - 1.0) / n * w + b / n) / w);
}

double ess_basic(const std::vector<std::vector<double>>& chains, bool* degenerate) {
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size();
  std::vector<std::vector<double>> acov(m);
  std::vector<double> means(m), chain_var(m);
  for (std::size_t c = 0; c < m; ++c) means[c] = mean_of(chains[c]);
  // Autocovariances are computed lazily, lag by lag.
  auto acov_at = [&](std::size_t c, std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (chains[c][i] - means[c]) * (chains[c][i + lag] - means[c]);
    return s / static_cast<double>(n);
  };
  auto mean_acov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t c = 0; c < m; ++c) s += acov_at(c, lag);
    return s / static_cast<double>(m);
  };
  const double dn = static_cast<double>(n);
  for (std::size_t c = 0; c < m; ++c) chain_var[c] = acov_at(c, 0) * dn / (dn - 1.0);
  const double mean_var = mean_of(chain_var);
  double var_plus = mean_var * (dn - 1.0) / dn;
  if (m > 1) var_plus += variance_of(means);
  if (!(var_plus > 0.0)) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }

  std::vector<double> rho(n, 0.0);
  rho[0] = 1.0;
  double rho_even = 1.0;
  double rho_odd = 1.0 - (mean_var - mean_acov(1)) / var_plus;
  rho[1] = rho_odd;
  std::size_t t = 1;
  while (t + 5 < n && rho_even + rho_odd > 0.0) {
    rho_even = 1.0 - (mean_var - mean_acov(t + 1)) / var_plus;
    rho_odd = 1.0 - (mean_var - mean_acov(t + 2)) / var_plus;
    if (rho_even + rho_odd >= 0.0) {
      rho[t + 1] = rho_even;
      rho[t + 2] = rho_odd;
    }
    t += 2;
  }
  const std::size_t max_t = t;
  if (rho_even > 0.0 && max_t + 1 < n) rho[max_t + 1] = rho_even;
  // initial monotone sequence
  for (std::size_t k = 1; k + 2 <= max_t; k += 2) {
    if (rho[k + 1] + rho[k + 2] > rho[k - 1] + rho[k]) {
      rho[k + 1] = 0.5 * (rho[k - 1] + rho[k]);
      rho[k + 2] = rho[k + 1];
    }
  }
  double tau = -1.0;
  for (std::size_t k = 0; k <= max_t && k < n; ++k) tau += 2.0 * rho[k];
  if (max_t + 1 < n) tau += rho[max_t + 1];
  const double total = static_cast<double>(m * n);
  const double ess = total / std::max(tau, 1.0 / std::log10(total));
  return std::min(ess, total);
}

}  // namespace

double split_rhat(const std::vector<std::vector<double>>& chains, bool* degenerate) {
  if (degenerate) *degenerate = false;
  const auto split = split_chains(chains);
  bool constant = false;
  rhat_basic(split, &constant);
  if (constant) return rhat_basic(split, degenerate);
  return rhat_basic(rank_normalize(split), degenerate);
}

double ess_bulk(const std::vector<std::vector<double>>& chains, bool* degenerate) {
  if (degenerate) *degenerate = false;
  const auto split = split_chains(chains);
  bool constant = false;
  rhat_basic(split, &constant);
  if (constant) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  return ess_basic(rank_normalize(split), degenerate);
}

double Diagnostics::max_rhat() const {
  double m = 0.0;
  for (const auto& p : parameters) m = std::max(m, p.rhat);
  return m;
}

double Diagnostics::min_ess() const {
  double m = INFINITY;
  for (const auto& p : parameters) m = std::min(m, p.ess_bulk);
  return m;
}

Diagnostics diagnose(const PosteriorDraws& draws) {
  if (draws.chains < 2 || draws.iterations < 4) {
    throw std::invalid_argument("diagnostics need at least 2 chains with 4 draws each");
  }
  Diagnostics diag;
  diag.divergences = draws.divergences();
  diag.total_draws = draws.draw_count();
  for (std::size_t p = 0; p < draws.dimension(); ++p) {
    std::vector<std::vector<double>> chains(draws.chains);
    ParameterDiagnostics pd;
    pd.name = draws.names[p];
    for (std::size_t c = 0; c < draws.chains; ++c) {
      chains[c].reserve(draws.iterations);
      for (std::size_t i = 0; i < draws.iterations; ++i) chains[c].push_back(draws.at(c, i, p));
      pd.chain_means.push_back(mean_of(chains[c]));
      pd.chain_sds.push_back(std::sqrt(variance_of(chains[c])));
    }
    const auto all = draws.parameter(p);
    pd.mean = mean_of(all);
    pd.sd = std::sqrt(variance_of(all));
    bool deg_r = false;
    bool deg_e = false;
    pd.rhat = split_rhat(chains, &deg_r);
    pd.ess_bulk = ess_bulk(chains, &deg_e);
    pd.degenerate = deg_r || deg_e;
    diag.parameters.push_back(std::move(pd));
  }
  return diag;
}

}  // namespace seiqr
