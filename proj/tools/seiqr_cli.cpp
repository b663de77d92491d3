// Command-line front end: simulate, fit, forecast, summarize, r0, diagnose, validate-config.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "seiqr/simstudy.hpp"
#include "seiqr/workbench.hpp"

namespace fs = std::filesystem;
using namespace seiqr;

namespace {

constexpr int kNotConverged = 3;

struct Options {
  std::string config;
  std::string data;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string draws;
  std::string horizon;
  std::string provincial;
};

// Config from --config, else the resolved config left in the output directory, else defaults.
RunConfig resolve_config(const Options& o, bool prefer_out_dir) {
  RunConfig cfg = RunConfig::defaults();
  const fs::path resolved = fs::path(o.out) / "resolved_config.json";
  if (!o.config.empty()) {
    cfg = load_config(o.config);
  } else if (prefer_out_dir && fs::exists(resolved)) {
    cfg = load_config(resolved.string());
  }
  if (o.seed) cfg.sampler.seed = *o.seed;
  if (!o.mode.empty()) cfg.mode = parse_mode(o.mode);
  return cfg;
}

std::vector<std::string> region_names(const RunConfig& cfg) {
  std::vector<std::string> names;
  for (const auto& r : cfg.regions) names.push_back(r.name);
  return names;
}

std::string draws_path(const Options& o) { return o.draws.empty() ? (fs::path(o.out) / "draws.csv").string() : o.draws; }

void ensure_dir(const std::string& dir) { fs::create_directories(dir); }

bool config_ok(const RunConfig& cfg) {
  const auto issues = validate(cfg);
  for (const auto& issue : issues) std::cerr << "config: " << issue << '\n';
  return issues.empty();
}

int cmd_simulate(const Options& o) {
  RunConfig cfg = resolve_config(o, false);
  if (o.seed) cfg.simulation.seed = *o.seed;
  if (!config_ok(cfg)) return 2;
  SimScenario scenario{build_context(cfg, FitMode::hierarchical), simulation_truth(cfg), cfg.simulation.first,
                       cfg.simulation.last, cfg.simulation.seed};
  const auto series = simulate_cases(scenario);
  ensure_dir(o.out);
  write_cases((fs::path(o.out) / "cases.csv").string(), series);
  const ParameterLayout layout(scenario.context);
  const auto names = layout.names();
  const auto values = layout.flatten(scenario.truth);
  nlohmann::json truth;
  for (std::size_t k = 0; k < names.size(); ++k) truth[names[k]] = values[k];
  std::ofstream(fs::path(o.out) / "truth.json") << truth.dump(2) << '\n';
  save_config(cfg, (fs::path(o.out) / "resolved_config.json").string());
  std::cout << "wrote " << series.size() << " series of " << series.front().size() << " days to "
            << (fs::path(o.out) / "cases.csv").string() << '\n';
  return 0;
}

int cmd_fit(const Options& o) {
  RunConfig cfg = resolve_config(o, false);
  if (o.data.empty()) throw std::invalid_argument("fit needs --data");
  if (!config_ok(cfg)) return 2;
  const auto data = ingest(o.data, region_names(cfg));
  ensure_dir(o.out);
  save_config(cfg, (fs::path(o.out) / "resolved_config.json").string());
  std::cout << "fitting " << to_string(cfg.mode) << " model (" << cfg.sampler.chains << " chains, "
            << cfg.sampler.warmup_iters << "+" << cfg.sampler.sampling_iters << " iterations)\n";
  const FitResult result = fit(cfg, cfg.mode, data);
  write_draws((fs::path(o.out) / "draws.csv").string(), result.draws);
  write_diagnostics((fs::path(o.out) / "diagnostics.csv").string(), result.diagnostics);
  std::ofstream(fs::path(o.out) / "summary.json") << fit_summary(cfg, result).dump(2) << '\n';
  std::printf("max R-hat %.4f, min bulk ESS %.0f, %zu divergences, %.1f s\n", result.diagnostics.max_rhat(),
              result.diagnostics.min_ess(), result.diagnostics.divergences, result.seconds);
  if (!result.converged()) {
    std::cerr << "not converged: some R-hat exceeds 1.05 (see diagnostics.csv)\n";
    return kNotConverged;
  }
  return 0;
}

int cmd_forecast(const Options& o) {
  RunConfig cfg = resolve_config(o, true);
  const Date horizon = o.horizon.empty() ? cfg.forecast_end : parse_date(o.horizon);
  const auto draws = read_draws(draws_path(o));
  const auto bands = forecast(cfg, cfg.mode, draws, cfg.fit_end, horizon);
  ensure_dir(o.out);
  for (const auto& b : bands) {
    write_forecast((fs::path(o.out) / ("forecast_" + b.region + ".csv")).string(), b, cfg.fit_end);
  }
  std::cout << "wrote " << bands.size() << " forecast files through " << format_date(horizon) << '\n';
  return 0;
}

int cmd_summarize(const Options& o) {
  RunConfig cfg = resolve_config(o, true);
  const auto draws = read_draws(draws_path(o));
  const ModelContext ctx = build_context(cfg, cfg.mode);
  std::vector<CaseSeries> observed;
  if (!o.data.empty()) observed = fit_data(cfg, cfg.mode, ingest(o.data, region_names(cfg)));
  const auto bands = posterior_bands(ctx, draws, cfg.distancing.observation_start, cfg.fit_end, cfg.max_draws,
                                     cfg.sampler.seed ^ 0x5DEECE66DULL);
  ensure_dir(o.out);
  nlohmann::json report;
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const auto& b = bands[i];
    const CaseSeries* obs = i < observed.size() ? &observed[i] : nullptr;
    write_band((fs::path(o.out) / ("prevalence_bands_" + b.region + ".csv")).string(), b.prevalence);
    write_band((fs::path(o.out) / ("expected_cases_" + b.region + ".csv")).string(), b.expected_cases, obs);
    write_band((fs::path(o.out) / ("predictive_cases_" + b.region + ".csv")).string(), b.predictive_cases, obs);
    if (obs != nullptr) {
      report[b.region] = {{"expected_band_coverage", band_coverage(b.expected_cases, *obs)},
                          {"predictive_band_coverage", band_coverage(b.predictive_cases, *obs)}};
    }
  }
  std::vector<DensityTable> tables;
  for (std::size_t k = 0; k < draws.dimension(); ++k) {
    tables.push_back(density_table(draws.names[k], draws.parameter(k), cfg.density_points));
  }
  write_densities((fs::path(o.out) / "densities.csv").string(), tables);
  if (!report.empty()) {
    std::ofstream(fs::path(o.out) / "coverage.json") << report.dump(2) << '\n';
    std::cout << report.dump(2) << '\n';
  }
  std::cout << "wrote bands for " << bands.size() << " regions and " << tables.size() << " density tables\n";
  return 0;
}

int cmd_r0(const Options& o) {
  RunConfig cfg = resolve_config(o, true);
  if (cfg.mode == FitMode::provincial) throw std::invalid_argument("r0 needs regional draws; pass the provincial fit with --provincial");
  const auto draws = read_draws(draws_path(o));
  std::optional<PosteriorDraws> provincial;
  if (!o.provincial.empty()) {
    const fs::path p = fs::is_directory(o.provincial) ? fs::path(o.provincial) / "draws.csv" : fs::path(o.provincial);
    provincial = read_draws(p.string());
  }
  const R0Summary table = r0_table(draws, cfg.regions, cfg.distancing.phase_count(), cfg.fixed,
                                   provincial ? &*provincial : nullptr, cfg.provincial_name);
  ensure_dir(o.out);
  write_r0_table((fs::path(o.out) / "r0_table.csv").string(), table);
  write_r0_table(std::cout, table);
  if (!provincial) std::cout << "note: no provincial draws supplied; the provincial row is omitted\n";
  return 0;
}

int cmd_diagnose(const Options& o) {
  const auto draws = read_draws(draws_path(o));
  const Diagnostics diag = diagnose(draws);
  ensure_dir(o.out);
  write_diagnostics((fs::path(o.out) / "diagnostics.csv").string(), diag);
  std::printf("%-20s %10s %10s %8s %10s\n", "parameter", "mean", "sd", "rhat", "ess_bulk");
  for (const auto& p : diag.parameters) {
    std::printf("%-20s %10.4g %10.4g %8.4f %10.0f%s\n", p.name.c_str(), p.mean, p.sd, p.rhat, p.ess_bulk,
                p.degenerate ? "  (degenerate)" : "");
  }
  std::printf("divergences: %zu of %zu\n", diag.divergences, diag.total_draws);
  return diag.max_rhat() < 1.05 ? 0 : kNotConverged;
}

int cmd_validate(const Options& o) {
  const RunConfig cfg = resolve_config(o, false);
  if (!config_ok(cfg)) return 2;
  std::cout << "config ok: " << cfg.regions.size() << " regions, " << cfg.distancing.phase_count() << " phases, "
            << cfg.testing.segment_count() << " testing segments, mode " << to_string(cfg.mode) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regional SEIQR epidemic model: simulation, Bayesian fitting and forecasting"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "run configuration (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "master seed (overrides the config)");
    sub->add_option("--mode", o.mode, "hierarchical, per-region or provincial")
        ->check(CLI::IsMember({"hierarchical", "per-region", "provincial"}));
  };

  auto* simulate = app.add_subcommand("simulate", "generate synthetic case counts from the configured truth");
  common(simulate);
  auto* fit_cmd = app.add_subcommand("fit", "sample the posterior and write draws and diagnostics");
  common(fit_cmd);
  fit_cmd->add_option("--data", o.data, "case counts CSV (date,region,cases)")->check(CLI::ExistingFile);
  auto* forecast_cmd = app.add_subcommand("forecast", "prevalence and case bands past the fit window");
  common(forecast_cmd);
  forecast_cmd->add_option("--draws", o.draws, "draws CSV (default <out>/draws.csv)");
  forecast_cmd->add_option("--horizon", o.horizon, "last forecast date (default from config)");
  forecast_cmd->add_option("--data", o.data, "unused; accepted for symmetry");
  auto* summarize = app.add_subcommand("summarize", "posterior bands and density tables for the fit window");
  common(summarize);
  summarize->add_option("--draws", o.draws, "draws CSV (default <out>/draws.csv)");
  summarize->add_option("--data", o.data, "observed counts to overlay")->check(CLI::ExistingFile);
  auto* r0 = app.add_subcommand("r0", "regional reproduction numbers per phase");
  common(r0);
  r0->add_option("--draws", o.draws, "regional draws CSV (default <out>/draws.csv)");
  r0->add_option("--provincial", o.provincial, "provincial fit directory or draws CSV");
  auto* diagnose_cmd = app.add_subcommand("diagnose", "split R-hat and bulk ESS of a draws file");
  common(diagnose_cmd);
  diagnose_cmd->add_option("--draws", o.draws, "draws CSV (default <out>/draws.csv)");
  auto* validate_cmd = app.add_subcommand("validate-config", "check a configuration file");
  common(validate_cmd);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*simulate) return cmd_simulate(o);
    if (*fit_cmd) return cmd_fit(o);
    if (*forecast_cmd) return cmd_forecast(o);
    if (*summarize) return cmd_summarize(o);
    if (*r0) return cmd_r0(o);
    if (*diagnose_cmd) return cmd_diagnose(o);
    if (*validate_cmd) return cmd_validate(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
