#include "seiqr/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "seiqr/simstudy.hpp"

namespace seiqr {

using nlohmann::json;

FitMode parse_mode(const std::string& text) {
  if (text == "hierarchical") return FitMode::hierarchical;
  if (text == "per-region") return FitMode::per_region;
  if (text == "provincial") return FitMode::provincial;
  throw std::invalid_argument("unknown mode '" + text + "' (expected hierarchical, per-region or provincial)");
}

std::string to_string(FitMode mode) {
  switch (mode) {
    case FitMode::hierarchical: return "hierarchical";
    case FitMode::per_region: return "per-region";
    case FitMode::provincial: return "provincial";
  }
  return "hierarchical";
}

std::vector<RegionConfig> bc_health_authorities(double provincial) {
  std::vector<RegionConfig> regions = {{"coastal", 1'225'195.0, 0.0},
                                       {"fraser", 1'889'225.0, 0.0},
                                       {"interior", 795'116.0, 0.0},
                                       {"island", 843'375.0, 0.0},
                                       {"northern", 297'570.0, 0.0}};
  for (auto& r : regions) r.population_ratio = r.population / provincial;
  return regions;
}

RunConfig RunConfig::defaults() {
  RunConfig cfg;
  cfg.regions = bc_health_authorities(cfg.provincial_population);
  cfg.distancing = DistancingSchedule::bc_2020();
  cfg.testing = TestingSchedule::bc_2020();
  cfg.priors = PriorSpec::bc_2020();
  cfg.fit_end = parse_date("2020-12-31");
  cfg.forecast_end = cfg.fit_end;
  cfg.simulation.first = cfg.distancing.observation_start;
  cfg.simulation.last = parse_date("2020-12-31");
  return cfg;
}

namespace {

json beta_pairs(const std::vector<BetaPrior>& priors) {
  json out = json::array();
  for (const auto& p : priors) out.push_back({p.a, p.b});
  return out;
}

std::vector<BetaPrior> read_beta_pairs(const json& j) {
  std::vector<BetaPrior> out;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2) throw std::invalid_argument("beta prior must be [a, b]");
    out.push_back({pair[0].get<double>(), pair[1].get<double>()});
  }
  return out;
}

json date_pairs(const std::vector<DateRange>& ranges) {
  json out = json::array();
  for (const auto& r : ranges) out.push_back({format_date(r.first), format_date(r.last)});
  return out;
}

template <class T>
void read_if(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

void read_date_if(const json& j, const char* key, Date& target) {
  if (j.contains(key)) target = parse_date(j.at(key).get<std::string>());
}

json truth_to_json(const ParamSet& truth, const std::vector<RegionConfig>& regions) {
  json out;
  if (truth.r0b.size() == 1) {
    out["r0b"] = truth.r0b[0];
  } else {
    out["r0b"] = truth.r0b;
  }
  json per_region = json::object();
  for (std::size_t i = 0; i < truth.regions.size() && i < regions.size(); ++i) {
    const auto& rp = truth.regions[i];
    per_region[regions[i].name] = {{"f", rp.f}, {"psi", rp.psi}, {"phi", rp.phi}};
  }
  out["regions"] = per_region;
  return out;
}

ParamSet truth_from_json(const json& j, const std::vector<RegionConfig>& regions) {
  ParamSet p;
  if (j.at("r0b").is_array()) {
    p.r0b = j.at("r0b").get<std::vector<double>>();
  } else {
    p.r0b = {j.at("r0b").get<double>()};
  }
  const json& per_region = j.at("regions");
  for (const auto& r : regions) {
    if (!per_region.contains(r.name)) throw std::invalid_argument("simulation truth lacks region '" + r.name + "'");
    const json& e = per_region.at(r.name);
    p.regions.push_back({e.at("f").get<std::vector<double>>(), e.at("psi").get<std::vector<double>>(),
                         e.at("phi").get<double>()});
  }
  return p;
}

}  // namespace

json to_json(const RunConfig& cfg) {
  json j;
  j["mode"] = to_string(cfg.mode);
  j["provincial_population"] = cfg.provincial_population;
  j["provincial_name"] = cfg.provincial_name;
  json regions = json::array();
  for (const auto& r : cfg.regions) {
    regions.push_back({{"name", r.name}, {"population", r.population}, {"ratio", r.population_ratio}});
  }
  j["regions"] = regions;
  j["initial"] = {{"seeded", cfg.initial.seeded},
                  {"split", cfg.initial.seed_split},
                  {"distanced_fraction", cfg.initial.seeded_distanced_fraction}};

  json transitions = json::array();
  for (const auto& t : cfg.distancing.transitions) {
    transitions.push_back({format_date(t.plateau_end), format_date(t.next_start)});
  }
  j["schedule"] = {{"model_start", format_date(cfg.distancing.model_start)},
                   {"observation_start", format_date(cfg.distancing.observation_start)},
                   {"transitions", transitions},
                   {"testing", date_pairs(cfg.testing.segments)}};
  const auto& fx = cfg.fixed;
  j["fixed"] = {{"k1", fx.k1}, {"k2", fx.k2}, {"D", fx.D}, {"q", fx.q}, {"ur", fx.ur}, {"ud", fx.ud}};
  j["kernel"] = {{"shape", cfg.kernel.shape}, {"scale", cfg.kernel.scale}, {"max_delay", cfg.kernel.max_delay}};
  j["priors"] = {{"r0b", {{"meanlog", cfg.priors.r0b.mu}, {"sdlog", cfg.priors.r0b.sigma}}},
                 {"f", beta_pairs(cfg.priors.f)},
                 {"psi", beta_pairs(cfg.priors.psi)},
                 {"inverse_phi_df", cfg.priors.inverse_phi_df}};
  const auto& s = cfg.sampler;
  j["sampler"] = {{"chains", s.chains},
                  {"warmup", s.warmup_iters},
                  {"sampling", s.sampling_iters},
                  {"target_accept", s.target_accept},
                  {"max_leapfrog", s.max_leapfrog},
                  {"seed", s.seed},
                  {"parallel_chains", s.parallel_chains},
                  {"max_init_attempts", s.max_init_attempts}};
  j["step"] = cfg.step;
  j["fit_end"] = format_date(cfg.fit_end);
  j["forecast_end"] = format_date(cfg.forecast_end);
  json sim = {{"first", format_date(cfg.simulation.first)},
              {"last", format_date(cfg.simulation.last)},
              {"seed", cfg.simulation.seed}};
  if (cfg.simulation.truth) sim["truth"] = truth_to_json(*cfg.simulation.truth, cfg.regions);
  j["simulation"] = sim;
  j["max_draws"] = cfg.max_draws;
  j["density_points"] = cfg.density_points;
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg = RunConfig::defaults();
  if (j.contains("mode")) cfg.mode = parse_mode(j.at("mode").get<std::string>());
  read_if(j, "provincial_population", cfg.provincial_population);
  read_if(j, "provincial_name", cfg.provincial_name);
  if (j.contains("regions")) {
    cfg.regions.clear();
    for (const auto& r : j.at("regions")) {
      RegionConfig rc;
      rc.name = r.at("name").get<std::string>();
      rc.population = r.at("population").get<double>();
      rc.population_ratio = r.contains("ratio") ? r.at("ratio").get<double>() : rc.population / cfg.provincial_population;
      cfg.regions.push_back(rc);
    }
  } else {
    cfg.regions = bc_health_authorities(cfg.provincial_population);
  }
  if (j.contains("initial")) {
    const json& ic = j.at("initial");
    read_if(ic, "seeded", cfg.initial.seeded);
    read_if(ic, "split", cfg.initial.seed_split);
    read_if(ic, "distanced_fraction", cfg.initial.seeded_distanced_fraction);
  }
  cfg.initial.population = cfg.provincial_population;
  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    read_date_if(s, "model_start", cfg.distancing.model_start);
    read_date_if(s, "observation_start", cfg.distancing.observation_start);
    if (s.contains("transitions")) {
      cfg.distancing.transitions.clear();
      for (const auto& t : s.at("transitions")) {
        cfg.distancing.transitions.push_back(
            {parse_date(t.at(0).get<std::string>()), parse_date(t.at(1).get<std::string>())});
      }
    }
    if (s.contains("testing")) {
      cfg.testing.segments.clear();
      for (const auto& t : s.at("testing")) {
        cfg.testing.segments.push_back(
            {parse_date(t.at(0).get<std::string>()), parse_date(t.at(1).get<std::string>())});
      }
    }
  }
  if (j.contains("fixed")) {
    const json& f = j.at("fixed");
    read_if(f, "k1", cfg.fixed.k1);
    read_if(f, "k2", cfg.fixed.k2);
    read_if(f, "D", cfg.fixed.D);
    read_if(f, "q", cfg.fixed.q);
    read_if(f, "ur", cfg.fixed.ur);
    read_if(f, "ud", cfg.fixed.ud);
  }
  if (j.contains("kernel")) {
    const json& k = j.at("kernel");
    read_if(k, "shape", cfg.kernel.shape);
    read_if(k, "scale", cfg.kernel.scale);
    read_if(k, "max_delay", cfg.kernel.max_delay);
  }
  if (j.contains("priors")) {
    const json& p = j.at("priors");
    if (p.contains("r0b")) {
      read_if(p.at("r0b"), "meanlog", cfg.priors.r0b.mu);
      read_if(p.at("r0b"), "sdlog", cfg.priors.r0b.sigma);
    }
    if (p.contains("f")) cfg.priors.f = read_beta_pairs(p.at("f"));
    if (p.contains("psi")) cfg.priors.psi = read_beta_pairs(p.at("psi"));
    read_if(p, "inverse_phi_df", cfg.priors.inverse_phi_df);
  }
  if (j.contains("sampler")) {
    const json& s = j.at("sampler");
    read_if(s, "chains", cfg.sampler.chains);
    read_if(s, "warmup", cfg.sampler.warmup_iters);
    read_if(s, "sampling", cfg.sampler.sampling_iters);
    read_if(s, "target_accept", cfg.sampler.target_accept);
    read_if(s, "max_leapfrog", cfg.sampler.max_leapfrog);
    read_if(s, "seed", cfg.sampler.seed);
    read_if(s, "parallel_chains", cfg.sampler.parallel_chains);
    read_if(s, "max_init_attempts", cfg.sampler.max_init_attempts);
  }
  read_if(j, "step", cfg.step);
  read_date_if(j, "fit_end", cfg.fit_end);
  cfg.forecast_end = cfg.fit_end;
  read_date_if(j, "forecast_end", cfg.forecast_end);
  if (j.contains("simulation")) {
    const json& s = j.at("simulation");
    read_date_if(s, "first", cfg.simulation.first);
    read_date_if(s, "last", cfg.simulation.last);
    read_if(s, "seed", cfg.simulation.seed);
    if (s.contains("truth")) cfg.simulation.truth = truth_from_json(s.at("truth"), cfg.regions);
  }
  read_if(j, "max_draws", cfg.max_draws);
  read_if(j, "density_points", cfg.density_points);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << to_json(cfg).dump(2) << '\n';
}

std::vector<std::string> validate(const RunConfig& cfg) {
  std::vector<std::string> issues;
  auto append = [&](const std::vector<std::string>& more) { issues.insert(issues.end(), more.begin(), more.end()); };
  append(validate(cfg.distancing));
  append(validate(cfg.testing));

  if (cfg.regions.empty()) issues.push_back("no regions configured");
  std::set<std::string> names;
  for (const auto& r : cfg.regions) {
    if (r.name.empty()) issues.push_back("region with empty name");
    if (!names.insert(r.name).second) issues.push_back("duplicate region '" + r.name + "'");
    if (r.name == cfg.provincial_name) issues.push_back("region name '" + r.name + "' collides with the provincial name");
    if (!(r.population > 0.0)) issues.push_back("region '" + r.name + "' needs a positive population");
    if (!(r.population_ratio > 0.0) || r.population_ratio > 1.0) {
      issues.push_back("region '" + r.name + "' population ratio must lie in (0, 1]");
    }
  }
  if (!(cfg.provincial_population > 0.0)) issues.push_back("provincial population must be positive");
  try {
    cfg.fixed.check();
  } catch (const std::exception& e) {
    issues.push_back(e.what());
  }
  if (cfg.priors.f.size() != cfg.distancing.phase_count()) {
    issues.push_back("expected " + std::to_string(cfg.distancing.phase_count()) + " contact-fraction priors, got " +
                     std::to_string(cfg.priors.f.size()));
  }
  if (cfg.priors.psi.size() != cfg.testing.segment_count()) {
    issues.push_back("expected " + std::to_string(cfg.testing.segment_count()) + " testing-fraction priors, got " +
                     std::to_string(cfg.priors.psi.size()));
  }
  for (const auto& b : cfg.priors.f) {
    if (!(b.a > 0.0 && b.b > 0.0)) issues.push_back("beta prior parameters must be positive");
  }
  for (const auto& b : cfg.priors.psi) {
    if (!(b.a > 0.0 && b.b > 0.0)) issues.push_back("beta prior parameters must be positive");
  }
  if (!(cfg.priors.r0b.sigma > 0.0)) issues.push_back("R0b prior sdlog must be positive");
  if (!(cfg.priors.inverse_phi_df > 0.0)) issues.push_back("dispersion prior degrees of freedom must be positive");
  try {
    cfg.sampler.check();
  } catch (const std::exception& e) {
    issues.push_back(e.what());
  }
  if (!(cfg.step > 0.0)) {
    issues.push_back("integration step must be positive");
  } else {
    try {
      const double t_end = static_cast<double>(days_between(cfg.distancing.model_start, cfg.forecast_end));
      check_grid(0.0, std::max(t_end, cfg.step), cfg.step, cfg.distancing.breakpoint_offsets());
      (void)cfg.kernel.weights(cfg.step);
    } catch (const std::exception& e) {
      issues.push_back(e.what());
    }
  }
  if (cfg.fit_end < cfg.distancing.observation_start) issues.push_back("fit window ends before the observation start");
  if (cfg.forecast_end < cfg.fit_end) issues.push_back("forecast horizon precedes the end of the fit window");
  if (cfg.simulation.last < cfg.simulation.first) issues.push_back("simulation window is empty");
  if (cfg.simulation.first < cfg.distancing.observation_start) {
    issues.push_back("simulation starts before the observation start");
  }
  return issues;
}

ModelContext build_context(const RunConfig& cfg, const std::vector<RegionConfig>& regions, bool share_r0b) {
  ModelContext ctx;
  ctx.distancing = cfg.distancing;
  ctx.testing = cfg.testing;
  ctx.fixed = cfg.fixed;
  ctx.kernel = cfg.kernel;
  ctx.priors = cfg.priors;
  ctx.step = cfg.step;
  ctx.share_r0b = share_r0b;
  ctx.regions = regions;
  InitialCondition ic = cfg.initial;
  ic.population = cfg.provincial_population;
  const CompartmentState provincial = ic.provincial_state();
  for (const auto& r : regions) ctx.initial_states.push_back(initialize_region(provincial, r));
  ctx.check();
  return ctx;
}

ModelContext build_context(const RunConfig& cfg, FitMode mode) {
  switch (mode) {
    case FitMode::provincial:
      return build_context(cfg, {{cfg.provincial_name, cfg.provincial_population, 1.0}}, true);
    case FitMode::per_region:
      return build_context(cfg, cfg.regions, false);
    case FitMode::hierarchical:
      break;
  }
  return build_context(cfg, cfg.regions, true);
}

ParamSet simulation_truth(const RunConfig& cfg) {
  if (cfg.simulation.truth) return *cfg.simulation.truth;
  std::vector<std::string> all;
  for (const auto& r : bc_health_authorities()) all.push_back(r.name);
  std::vector<std::string> keep;
  for (const auto& r : cfg.regions) keep.push_back(r.name);
  return select_regions(bc_2020_truth(), all, keep);
}

}  // namespace seiqr
