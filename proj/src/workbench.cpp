#include "seiqr/workbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "seiqr/simstudy.hpp"

namespace seiqr {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

void require_layout(const ParameterLayout& layout, const PosteriorDraws& draws) {
  if (layout.names() != draws.names) {
    throw std::invalid_argument("draw columns do not match the model layout (was the fit run in another mode?)");
  }
}

}  // namespace

std::vector<CaseSeries> fit_data(const RunConfig& cfg, FitMode mode, const std::vector<CaseSeries>& data) {
  const Date first = cfg.distancing.observation_start;
  std::vector<CaseSeries> out;
  for (const auto& r : cfg.regions) {
    const auto it = std::find_if(data.begin(), data.end(), [&](const CaseSeries& s) { return s.region == r.name; });
    if (it == data.end()) throw std::invalid_argument("no case data for region '" + r.name + "'");
    if (it->empty() || it->last() < cfg.fit_end) {
      throw std::invalid_argument("case data for '" + r.name + "' end before the fit window end " +
                                  format_date(cfg.fit_end));
    }
    if (it->first > cfg.fit_end) {
      throw std::invalid_argument("case data for '" + r.name + "' start after the fit window end");
    }
    out.push_back(clip(*it, first, cfg.fit_end));
  }
  for (const auto& s : data) {
    const bool known = std::any_of(cfg.regions.begin(), cfg.regions.end(),
                                   [&](const RegionConfig& r) { return r.name == s.region; });
    if (!known) throw std::invalid_argument("case data refer to unconfigured region '" + s.region + "'");
  }
  if (mode == FitMode::provincial) return {aggregate_provincial(out, cfg.provincial_name)};
  return out;
}

PosteriorDraws sample_posterior(const ModelContext& ctx, const std::vector<CaseSeries>& data,
                                const SamplerConfig& sampler) {
  const Posterior posterior(ctx, data);
  const PosteriorTarget target(posterior);
  const auto inits =
      initialize_chains(sampler, target, [&](std::mt19937_64& rng) { return posterior.sample_prior(rng); });
  const ParameterLayout& layout = posterior.layout();
  const DrawTransform transform = [&](std::span<const double> u, std::span<double> out) {
    const auto flat = layout.flatten(posterior.constrain(u));
    std::copy(flat.begin(), flat.end(), out.begin());
  };
  return hmc_run(target, sampler, inits, layout.names(), transform);
}

namespace {

// Joins single-region fits column-wise; sampler statistics are averaged
// (divergence flags or-ed, leapfrog counts maximized).
PosteriorDraws join_region_fits(const std::vector<PosteriorDraws>& parts, const std::vector<RegionConfig>& regions) {
  PosteriorDraws out;
  out.chains = parts.front().chains;
  out.iterations = parts.front().iterations;
  out.chain_seeds = parts.front().chain_seeds;
  for (std::size_t r = 0; r < parts.size(); ++r) {
    for (const auto& name : parts[r].names) out.names.push_back(name == "r0b" ? regions[r].name + ".r0b" : name);
  }
  const std::size_t n = out.draw_count();
  out.values.reserve(n * out.names.size());
  out.accept_stat.assign(n, 0.0);
  out.divergent.assign(n, 0);
  out.step_size.assign(n, 0.0);
  out.leapfrog_steps.assign(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    for (const auto& p : parts) {
      const auto row = p.draw(k / out.iterations, k % out.iterations);
      out.values.insert(out.values.end(), row.begin(), row.end());
      out.accept_stat[k] += p.accept_stat[k] / static_cast<double>(parts.size());
      out.step_size[k] += p.step_size[k] / static_cast<double>(parts.size());
      out.divergent[k] = static_cast<std::uint8_t>(out.divergent[k] | p.divergent[k]);
      out.leapfrog_steps[k] = std::max(out.leapfrog_steps[k], p.leapfrog_steps[k]);
    }
  }
  return out;
}

}  // namespace

FitResult fit(const RunConfig& cfg, FitMode mode, const std::vector<CaseSeries>& data) {
  const auto start = std::chrono::steady_clock::now();
  const auto series = fit_data(cfg, mode, data);
  FitResult result;
  result.mode = mode;
  if (mode == FitMode::per_region) {
    std::vector<PosteriorDraws> parts;
    for (std::size_t i = 0; i < cfg.regions.size(); ++i) {
      const ModelContext ctx = build_context(cfg, {cfg.regions[i]}, true);
      parts.push_back(sample_posterior(ctx, {series[i]}, cfg.sampler));
    }
    result.draws = join_region_fits(parts, cfg.regions);
  } else {
    result.draws = sample_posterior(build_context(cfg, mode), series, cfg.sampler);
  }
  result.diagnostics = diagnose(result.draws);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

ParamSet draw_params(const ParameterLayout& layout, const PosteriorDraws& draws, std::size_t chain,
                     std::size_t iter) {
  return layout.unflatten(draws.draw(chain, iter));
}

BandSeries make_band(const std::string& region, const std::string& quantity, Date first,
                     const std::vector<std::vector<double>>& samples) {
  BandSeries band{region, quantity, {}};
  band.rows.reserve(samples.size());
  std::vector<double> sorted;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    sorted = samples[k];
    if (sorted.empty()) throw std::invalid_argument("band needs at least one draw");
    std::sort(sorted.begin(), sorted.end());
    const auto q = [&](double prob) {
      const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
      const auto lo = static_cast<std::size_t>(std::floor(h));
      const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
      return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    };
    BandRow row;
    row.date = add_days(first, static_cast<int>(k));
    row.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    row.q05 = q(0.05);
    row.q25 = q(0.25);
    row.q75 = q(0.75);
    row.q95 = q(0.95);
    band.rows.push_back(row);
  }
  return band;
}

std::vector<RegionBands> posterior_bands(const ModelContext& ctx, const PosteriorDraws& draws, Date first, Date last,
                                         std::size_t max_draws, std::uint64_t seed) {
  if (last < first) throw std::invalid_argument("band window is empty");
  const ParameterLayout layout(ctx);
  require_layout(layout, draws);
  const std::size_t total = draws.draw_count();
  if (total == 0) throw std::invalid_argument("no draws");
  const std::size_t used = std::min(total, std::max<std::size_t>(max_draws, 1));
  std::vector<std::size_t> picks(used);
  for (std::size_t k = 0; k < used; ++k) picks[k] = k * total / used;

  const auto days = static_cast<std::size_t>(days_between(first, last)) + 1;
  const double t_end = ctx.time_of(last);
  std::vector<RegionBands> out;
  for (std::size_t i = 0; i < ctx.region_count(); ++i) {
    std::mt19937_64 rng(chain_seed(seed, i));
    std::vector<std::vector<double>> prev(days, std::vector<double>(used));
    std::vector<std::vector<double>> mu(days, std::vector<double>(used));
    std::vector<std::vector<double>> counts(days, std::vector<double>(used));
    for (std::size_t k = 0; k < used; ++k) {
      const std::size_t flat = picks[k];
      const ParamSet p = draw_params(layout, draws, flat / draws.iterations, flat % draws.iterations);
      const Trajectory traj = simulate_region(ctx, p, i, t_end);
      const auto expected = expected_case_path(ctx, p.regions[i], traj, first, last);
      for (std::size_t d = 0; d < days; ++d) {
        prev[d][k] = prevalence(traj.states[traj.index_of(ctx.time_of(add_days(first, static_cast<int>(d))))]);
        mu[d][k] = expected[d];
        counts[d][k] =
            static_cast<double>(sample_nb2(std::max(expected[d], kMinExpectedCases), p.regions[i].phi, rng));
      }
    }
    const std::string& name = ctx.regions[i].name;
    out.push_back({name, make_band(name, "prevalence", first, prev), make_band(name, "expected_cases", first, mu),
                   make_band(name, "predictive_cases", first, counts)});
  }
  return out;
}

RegionBands scale_bands(const RegionBands& bands, const std::string& region, double factor) {
  auto scale = [&](BandSeries b) {
    b.region = region;
    for (auto& r : b.rows) {
      r.mean *= factor;
      r.q05 *= factor;
      r.q25 *= factor;
      r.q75 *= factor;
      r.q95 *= factor;
    }
    return b;
  };
  return {region, scale(bands.prevalence), scale(bands.expected_cases), scale(bands.predictive_cases)};
}

std::vector<RegionBands> forecast(const RunConfig& cfg, FitMode mode, const PosteriorDraws& draws, Date fit_end,
                                  Date horizon_end) {
  if (horizon_end < fit_end) {
    throw std::invalid_argument("forecast horizon " + format_date(horizon_end) + " precedes the fit end " +
                                format_date(fit_end));
  }
  const ModelContext ctx = build_context(cfg, mode);
  auto bands = posterior_bands(ctx, draws, cfg.distancing.observation_start, horizon_end, cfg.max_draws,
                               cfg.sampler.seed ^ 0x5DEECE66DULL);
  if (mode == FitMode::provincial) {
    double total = 0.0;
    for (const auto& r : cfg.regions) total += r.population;
    const RegionBands provincial = bands.front();
    for (const auto& r : cfg.regions) bands.push_back(scale_bands(provincial, r.name, r.population / total));
  }
  return bands;
}

DensityTable density_table(const std::string& parameter, const std::vector<double>& samples, std::size_t points) {
  if (samples.empty()) throw std::invalid_argument("density of an empty sample");
  points = std::max<std::size_t>(points, 2);
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  const double iqr = quantile(samples, 0.75) - quantile(samples, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  double h = 0.9 * spread * std::pow(n, -0.2);
  if (!(h > 0.0)) h = 1e-6 * (std::abs(mean) + 1.0);

  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it - 3.0 * h;
  const double hi = *hi_it + 3.0 * h;
  DensityTable table{parameter, {}, {}};
  const double norm = 1.0 / (n * h * std::sqrt(2.0 * M_PI));
  for (std::size_t k = 0; k < points; ++k) {
    const double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    double acc = 0.0;
    for (double v : samples) {
      const double z = (x - v) / h;
      acc += std::exp(-0.5 * z * z);
    }
    table.grid.push_back(x);
    table.density.push_back(acc * norm);
  }
  return table;
}

double band_coverage(const BandSeries& band, const CaseSeries& observed) {
  std::size_t inside = 0;
  std::size_t total = 0;
  for (const auto& row : band.rows) {
    if (row.date < observed.first || row.date > observed.last()) continue;
    const double c = static_cast<double>(observed.counts[static_cast<std::size_t>(days_between(observed.first, row.date))]);
    ++total;
    if (c >= row.q05 && c <= row.q95) ++inside;
  }
  return total == 0 ? 0.0 : static_cast<double>(inside) / static_cast<double>(total);
}

double held_out_coverage(const BandSeries& band, const std::vector<double>& truth, Date truth_first, Date after) {
  std::size_t inside = 0;
  std::size_t total = 0;
  for (const auto& row : band.rows) {
    if (row.date <= after || row.date < truth_first) continue;
    const auto k = static_cast<std::size_t>(days_between(truth_first, row.date));
    if (k >= truth.size()) continue;
    ++total;
    if (truth[k] >= row.q05 && truth[k] <= row.q95) ++inside;
  }
  return total == 0 ? 0.0 : static_cast<double>(inside) / static_cast<double>(total);
}

// Files ----------------------------------------------------------------------

void write_draws(const std::string& path, const PosteriorDraws& draws) {
  auto out = open_out(path);
  out << "chain,iteration,accept_stat,divergent,step_size,n_leapfrog";
  for (const auto& n : draws.names) out << ',' << n;
  out << '\n';
  for (std::size_t c = 0; c < draws.chains; ++c) {
    for (std::size_t i = 0; i < draws.iterations; ++i) {
      const std::size_t k = c * draws.iterations + i;
      out << c << ',' << i << ',' << fmt(draws.accept_stat[k]) << ',' << static_cast<int>(draws.divergent[k]) << ','
          << fmt(draws.step_size[k]) << ',' << draws.leapfrog_steps[k];
      for (double v : draws.draw(c, i)) out << ',' << fmt(v);
      out << '\n';
    }
  }
}

PosteriorDraws read_draws(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open draws file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty draws file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(field);
  }
  const std::vector<std::string> fixed = {"chain", "iteration", "accept_stat", "divergent", "step_size", "n_leapfrog"};
  if (header.size() <= fixed.size() || !std::equal(fixed.begin(), fixed.end(), header.begin())) {
    throw std::runtime_error(path + ": unexpected draws header");
  }
  PosteriorDraws draws;
  draws.names.assign(header.begin() + static_cast<long>(fixed.size()), header.end());
  std::vector<std::size_t> per_chain;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> row;
    while (std::getline(ss, field, ',')) row.push_back(std::stod(field));
    if (row.size() != header.size()) throw std::runtime_error(path + ": line " + std::to_string(line_no) + " has wrong width");
    const auto chain = static_cast<std::size_t>(row[0]);
    if (chain + 1 < per_chain.size() || chain > per_chain.size()) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) + " breaks chain-major order");
    }
    if (chain == per_chain.size()) per_chain.push_back(0);
    if (static_cast<std::size_t>(row[1]) != per_chain[chain]) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) + " has an unexpected iteration");
    }
    ++per_chain[chain];
    draws.accept_stat.push_back(row[2]);
    draws.divergent.push_back(static_cast<std::uint8_t>(row[3] != 0.0));
    draws.step_size.push_back(row[4]);
    draws.leapfrog_steps.push_back(static_cast<std::uint32_t>(row[5]));
    draws.values.insert(draws.values.end(), row.begin() + static_cast<long>(fixed.size()), row.end());
  }
  if (per_chain.empty()) throw std::runtime_error(path + ": no draws");
  for (std::size_t n : per_chain) {
    if (n != per_chain.front()) throw std::runtime_error(path + ": chains have different lengths");
  }
  draws.chains = per_chain.size();
  draws.iterations = per_chain.front();
  return draws;
}

void write_diagnostics(const std::string& path, const Diagnostics& diag) {
  auto out = open_out(path);
  out << "parameter,mean,sd,rhat,ess_bulk,degenerate\n";
  for (const auto& p : diag.parameters) {
    out << p.name << ',' << fmt(p.mean) << ',' << fmt(p.sd) << ',' << fmt(p.rhat) << ',' << fmt(p.ess_bulk) << ','
        << (p.degenerate ? 1 : 0) << '\n';
  }
}

void write_band(std::ostream& out, const BandSeries& band, const CaseSeries* observed, Date fit_end) {
  out << "date,mean,q05,q25,q75,q95";
  if (observed != nullptr) out << ",observed";
  out << ",held_out\n";
  for (const auto& r : band.rows) {
    out << format_date(r.date) << ',' << fmt(r.mean) << ',' << fmt(r.q05) << ',' << fmt(r.q25) << ',' << fmt(r.q75)
        << ',' << fmt(r.q95);
    if (observed != nullptr) {
      out << ',';
      if (!observed->empty() && r.date >= observed->first && r.date <= observed->last()) {
        out << observed->counts[static_cast<std::size_t>(days_between(observed->first, r.date))];
      }
    }
    out << ',' << (r.date > fit_end ? 1 : 0) << '\n';
  }
}

void write_band(const std::string& path, const BandSeries& band, const CaseSeries* observed, Date fit_end) {
  auto out = open_out(path);
  write_band(out, band, observed, fit_end);
}

void write_forecast(const std::string& path, const RegionBands& bands, Date fit_end) {
  auto out = open_out(path);
  out << "date,quantity,mean,q05,q25,q75,q95,held_out\n";
  for (const BandSeries* b : {&bands.prevalence, &bands.expected_cases, &bands.predictive_cases}) {
    for (const auto& r : b->rows) {
      out << format_date(r.date) << ',' << b->quantity << ',' << fmt(r.mean) << ',' << fmt(r.q05) << ','
          << fmt(r.q25) << ',' << fmt(r.q75) << ',' << fmt(r.q95) << ',' << (r.date > fit_end ? 1 : 0) << '\n';
    }
  }
}

void write_densities(const std::string& path, const std::vector<DensityTable>& tables) {
  auto out = open_out(path);
  out << "parameter,value,density\n";
  for (const auto& t : tables) {
    for (std::size_t k = 0; k < t.grid.size(); ++k) {
      out << t.parameter << ',' << fmt(t.grid[k]) << ',' << fmt(t.density[k]) << '\n';
    }
  }
}

void write_r0_table(std::ostream& out, const R0Summary& table) {
  out << "region";
  for (const auto& p : table.phase_names) out << ',' << p << "_mean," << p << "_lower," << p << "_upper";
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.label;
    for (const auto& s : row.phases) out << ',' << fmt(s.mean) << ',' << fmt(s.lower) << ',' << fmt(s.upper);
    out << '\n';
  }
}

void write_r0_table(const std::string& path, const R0Summary& table) {
  auto out = open_out(path);
  write_r0_table(out, table);
}

nlohmann::json fit_summary(const RunConfig& cfg, const FitResult& result) {
  nlohmann::json j;
  j["mode"] = to_string(result.mode);
  j["seed"] = cfg.sampler.seed;
  j["chain_seeds"] = result.draws.chain_seeds;
  j["chains"] = result.draws.chains;
  j["warmup"] = cfg.sampler.warmup_iters;
  j["sampling"] = result.draws.iterations;
  j["runtime_seconds"] = result.seconds;
  j["divergences"] = result.diagnostics.divergences;
  j["max_rhat"] = result.diagnostics.max_rhat();
  j["min_ess_bulk"] = result.diagnostics.min_ess();
  j["converged"] = result.converged();
  nlohmann::json params = nlohmann::json::array();
  for (std::size_t k = 0; k < result.draws.dimension(); ++k) {
    const auto values = result.draws.parameter(k);
    const auto& d = result.diagnostics.parameters[k];
    params.push_back({{"name", d.name},
                      {"mean", d.mean},
                      {"sd", d.sd},
                      {"q05", quantile(values, 0.05)},
                      {"q50", quantile(values, 0.5)},
                      {"q95", quantile(values, 0.95)},
                      {"rhat", d.rhat},
                      {"ess_bulk", d.ess_bulk},
                      {"degenerate", d.degenerate}});
  }
  j["parameters"] = params;
  return j;
}

}  // namespace seiqr
