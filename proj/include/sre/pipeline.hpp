#pragma once

// scene -> sites/test points -> activation -> plan, plus the sweep and
// coverage-map drivers and their tabular outputs.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "sre/activation.hpp"
#include "sre/config.hpp"
#include "sre/planner.hpp"

namespace sre {

inline constexpr const char* kToolVersion = "sreplan 1.0.0";

inline std::string fmt(double v, int prec = 6) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  std::string s = buf;
  // No "-0.000".
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

struct World {
  Scene scene;
  std::vector<CandidateSite> sites;  // wall sites first, then rooftop sites
  std::vector<TestPoint> tps;
};

inline World build_world(Scene scene, const PlanningParams& p) {
  World w;
  w.scene = std::move(scene);
  try {
    w.sites = generate_ris_sites(w.scene, p.ris_spacing_m, p.ris_height_m, 0);
    auto ncr = generate_ncr_sites(w.scene, p.ncr_height_m, static_cast<int>(w.sites.size()));
    w.sites.insert(w.sites.end(), ncr.begin(), ncr.end());
    w.tps = generate_test_points(w.scene, p.tp_step_m, p.ue_height_m);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("planning: ") + e.what());
  }
  return w;
}

inline std::vector<DeviceSpec> catalog_for(const ScenarioConfig& c) {
  try {
    return build_catalog(c.devices.ris_sides, c.devices.ncr_gains_db, c.costs);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("devices: ") + e.what());
  }
}

// Long-term SNR records for every entity; thresholded at the config's Γ.
inline ActivationMatrix activation_for(const World& w, const ScenarioConfig& c, const std::vector<DeviceSpec>& catalog,
                                       unsigned threads) {
  const ActivationInputs in{w.scene, w.sites, catalog, w.tps, c.radio, c.blockage, c.arrays};
  return compute_activation(in, c.planning.snr_threshold_db, threads);
}

// Keeps the listed test points (ascending indices) and renumbers them.
inline PlanningInstance restrict_instance(const PlanningInstance& inst, const std::vector<int>& keep) {
  std::vector<int> map(static_cast<std::size_t>(inst.tp_count), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) map[static_cast<std::size_t>(keep[i])] = static_cast<int>(i);
  PlanningInstance out;
  out.tp_count = static_cast<int>(keep.size());
  out.K = inst.K;
  for (int t : keep) out.bs_delta.push_back(inst.bs_delta[static_cast<std::size_t>(t)]);
  for (const auto& c : inst.columns) {
    PlanningInstance::Column nc = c;
    nc.tps.clear();
    for (int t : c.tps)
      if (map[static_cast<std::size_t>(t)] >= 0) nc.tps.push_back(map[static_cast<std::size_t>(t)]);
    out.columns.push_back(std::move(nc));
  }
  return out;
}

inline std::vector<int> complement(int n, const std::vector<int>& sorted_excluded) {
  std::vector<int> keep;
  std::size_t k = 0;
  for (int t = 0; t < n; ++t) {
    if (k < sorted_excluded.size() && sorted_excluded[k] == t) {
      ++k;
      continue;
    }
    keep.push_back(t);
  }
  return keep;
}

struct PlanResult {
  World world;
  std::vector<DeviceSpec> catalog;
  ActivationMatrix activation;
  std::vector<int> excluded;  // test point indices left out of planning
  std::vector<int> planned;   // test point indices planned for
  Plan plan;                  // uncoverable lists test point indices into world.tps

  bool feasible() const { return plan.proof == Optimality::optimal; }
};

inline Plan solve_subset(const PlanningInstance& full, const std::vector<int>& planned, unsigned threads) {
  PlannerOptions opt;
  opt.threads = threads;
  Plan p = plan_min_cost(restrict_instance(full, planned), opt);
  for (int& t : p.uncoverable) t = planned[static_cast<std::size_t>(t)];
  return p;
}

inline PlanResult run_plan(const ScenarioConfig& c, unsigned threads = 1) {
  PlanResult r;
  r.world = build_world(resolve_scene(c.scene), c.planning);
  r.catalog = catalog_for(c);
  r.activation = activation_for(r.world, c, r.catalog, threads);
  const PlanningInstance full = make_instance(r.activation, c.planning.K);
  if (c.planning.uncoverable == UncoverablePolicy::exclude) r.excluded = check_feasibility(full).uncoverable;
  r.planned = complement(full.tp_count, r.excluded);
  r.plan = solve_subset(full, r.planned, threads);
  return r;
}

// ---- outputs ----

inline void write_plan_table(std::ostream& os, const PlanResult& r, const ScenarioConfig& c) {
  const Plan& p = r.plan;
  os << "# sre-plan/1\n";
  os << "# status=" << (r.feasible() ? "optimal" : "infeasible") << " total_cost=" << fmt(p.total_cost)
     << " installs=" << p.installs.size() << " ris=" << p.ris_count() << " ncr=" << p.ncr_count()
     << " K=" << c.planning.K << " threshold_db=" << fmt(c.planning.snr_threshold_db, 3)
     << " test_points=" << r.world.tps.size() << " excluded=" << r.excluded.size() << '\n';
  os << "# solver nodes=" << p.stats.nodes << " lp_solves=" << p.stats.lp_solves
     << " components=" << p.stats.components << " rows=" << p.stats.rows_after_reduction
     << " columns=" << p.stats.columns_after_reduction << '\n';
  os << "site_id\tkind\tx\ty\tz\tdevice\tcost\n";
  for (const auto& i : p.installs) {
    const CandidateSite& s = r.world.sites[static_cast<std::size_t>(i.site_id)];
    os << i.site_id << '\t' << to_string(s.kind) << '\t' << fmt(s.position.x(), 3) << '\t' << fmt(s.position.y(), 3)
       << '\t' << fmt(s.position.z(), 3) << '\t' << r.catalog[static_cast<std::size_t>(i.device)].label() << '\t'
       << fmt(i.cost) << '\n';
  }
}

// Per test point: how many installed entities (BS included) meet the threshold.
inline void write_coverage_counts(std::ostream& os, const PlanResult& r, const ScenarioConfig& c) {
  std::vector<int> count(r.world.tps.size(), 0);
  for (std::size_t t = 0; t < count.size(); ++t) count[t] = r.activation.bs_delta(t) ? 1 : 0;
  for (const auto& i : r.plan.installs) {
    const int col = r.activation.column_index(static_cast<std::size_t>(i.site_id), static_cast<std::size_t>(i.device));
    for (std::size_t t = 0; t < count.size(); ++t)
      if (r.activation.column_delta(static_cast<std::size_t>(col), t)) ++count[t];
  }
  const std::set<int> excluded(r.excluded.begin(), r.excluded.end());
  os << "# sre-coverage-count/1 K=" << c.planning.K << '\n';
  os << "tp_id\tx\ty\tbs\tcount\tstatus\n";
  for (std::size_t t = 0; t < count.size(); ++t) {
    const auto& tp = r.world.tps[t];
    const char* status = excluded.count(static_cast<int>(t)) ? "excluded" : count[t] >= c.planning.K ? "ok" : "short";
    os << tp.id << '\t' << fmt(tp.position.x(), 3) << '\t' << fmt(tp.position.y(), 3) << '\t'
       << (r.activation.bs_delta(t) ? 1 : 0) << '\t' << count[t] << '\t' << status << '\n';
  }
}

inline void write_uncoverable(std::ostream& os, const World& w, const std::vector<int>& tps) {
  os << "# sre-uncoverable/1\n";
  os << "tp_id\tx\ty\n";
  for (int t : tps) {
    const auto& tp = w.tps[static_cast<std::size_t>(t)];
    os << tp.id << '\t' << fmt(tp.position.x(), 3) << '\t' << fmt(tp.position.y(), 3) << '\n';
  }
}

struct BestLink {
  float snr_db = ActivationMatrix::kVetoed;
  int site = -1;  // -1: BS
  int device = -1;
};

inline std::vector<BestLink> best_links(const ActivationMatrix& am) {
  std::vector<BestLink> out(am.tp_count());
  for (std::size_t t = 0; t < am.tp_count(); ++t) {
    BestLink& b = out[t];
    b.snr_db = am.bs_snr_db(t);
    for (std::size_t col = 0; col < am.columns().size(); ++col) {
      const float v = am.column_snr_db(col, t);
      if (std::isnan(v)) continue;
      if (std::isnan(b.snr_db) || v > b.snr_db) {
        b.snr_db = v;
        b.site = am.columns()[col].site_index;
        b.device = am.columns()[col].device;
      }
    }
  }
  return out;
}

// Best available long-term SNR per test point over the BS and every
// (site, device) option, and which entity provides it.
inline void write_coverage_grid(std::ostream& os, const World& w, const ActivationMatrix& am) {
  const auto best = best_links(am);
  os << "# sre-coverage-grid/1 threshold_db=" << fmt(am.threshold_db(), 3) << '\n';
  os << "tp_id\tx\ty\tbest_snr_db\tserving\tmeets_threshold\n";
  for (std::size_t t = 0; t < best.size(); ++t) {
    const auto& b = best[t];
    const auto& tp = w.tps[t];
    std::string serving = "none";
    if (!std::isnan(b.snr_db))
      serving = b.site < 0 ? "BS"
                           : "site-" + std::to_string(w.sites[static_cast<std::size_t>(b.site)].id) + ":" +
                                 am.devices()[static_cast<std::size_t>(b.device)].label();
    const bool meets = !std::isnan(b.snr_db) && static_cast<double>(b.snr_db) >= am.threshold_db();
    os << tp.id << '\t' << fmt(tp.position.x(), 3) << '\t' << fmt(tp.position.y(), 3) << '\t'
       << (std::isnan(b.snr_db) ? std::string("nan") : fmt(b.snr_db, 3)) << '\t' << serving << '\t'
       << (meets ? 1 : 0) << '\n';
  }
}

// ---- sweeps ----

inline ScenarioConfig sweep_cell_config(ScenarioConfig c, SweepParameter p, double v) {
  switch (p) {
    case SweepParameter::price_ratio:
      c.costs.ncr_price_ratio = v;
      break;
    case SweepParameter::ris_dim:
      c.devices.ris_sides = {static_cast<int>(std::lround(v))};
      break;
    case SweepParameter::ncr_gain:
      c.devices.ncr_gains_db = {v};
      break;
    case SweepParameter::snr_threshold:
      c.planning.snr_threshold_db = v;
      break;
    case SweepParameter::K:
      c.planning.K = static_cast<int>(std::lround(v));
      break;
  }
  c.sweep.reset();
  c.validate();
  return c;
}

struct SweepCell {
  std::string scenario;
  double value = 0.0;
  bool feasible = false;
  double total_cost = 0.0;
  int installs = 0;
  int ris = 0;
  int ncr = 0;
  int planned = 0;
  int excluded = 0;
};

struct SweepResult {
  SweepParameter parameter = SweepParameter::price_ratio;
  std::vector<double> values;
  std::vector<std::string> scenarios;
  std::vector<SweepCell> cells;  // scenario-major, then value order
};

inline std::vector<std::pair<std::string, SceneSource>> sweep_scenarios(const ScenarioConfig& c) {
  std::vector<std::pair<std::string, SceneSource>> out;
  auto label = [](const SceneSource& s, std::size_t i) {
    return s.name.empty() ? "scenario-" + std::to_string(i) : s.name;
  };
  if (!c.sweep || c.sweep->scenarios.empty()) {
    out.emplace_back(label(c.scene, 0), c.scene);
    return out;
  }
  for (std::size_t i = 0; i < c.sweep->scenarios.size(); ++i)
    out.emplace_back(label(c.sweep->scenarios[i], i), c.sweep->scenarios[i]);
  return out;
}

// With the exclude policy, every cell of a scenario plans over the same test
// points: those coverable (by the counting test) in all cells.
inline SweepResult run_sweep(const ScenarioConfig& base, unsigned threads = 1) {
  if (!base.sweep) throw ConfigError("config has no sweep section");
  const SweepSpec& spec = *base.sweep;
  SweepResult res;
  res.parameter = spec.parameter;
  res.values = spec.values;
  for (const auto& [name, source] : sweep_scenarios(base)) {
    res.scenarios.push_back(name);
    const World world = build_world(resolve_scene(source), base.planning);
    std::map<std::pair<std::vector<int>, std::vector<double>>, ActivationMatrix> records;
    std::vector<PlanningInstance> instances;
    std::set<int> excluded;
    for (double v : spec.values) {
      const ScenarioConfig cell = sweep_cell_config(base, spec.parameter, v);
      const auto catalog = catalog_for(cell);
      const auto key = std::make_pair(cell.devices.ris_sides, cell.devices.ncr_gains_db);
      auto it = records.find(key);
      if (it == records.end()) it = records.emplace(key, activation_for(world, cell, catalog, threads)).first;
      ActivationMatrix am = it->second;
      am.reprice(catalog);
      am.apply_threshold(cell.planning.snr_threshold_db);
      instances.push_back(make_instance(am, cell.planning.K));
      if (base.planning.uncoverable == UncoverablePolicy::exclude)
        for (int t : check_feasibility(instances.back()).uncoverable) excluded.insert(t);
    }
    const std::vector<int> ex(excluded.begin(), excluded.end());
    const std::vector<int> planned = complement(static_cast<int>(world.tps.size()), ex);
    for (std::size_t k = 0; k < spec.values.size(); ++k) {
      const Plan p = solve_subset(instances[k], planned, threads);
      SweepCell cell;
      cell.scenario = name;
      cell.value = spec.values[k];
      cell.feasible = p.proof == Optimality::optimal;
      cell.total_cost = p.total_cost;
      cell.installs = static_cast<int>(p.installs.size());
      cell.ris = p.ris_count();
      cell.ncr = p.ncr_count();
      cell.planned = static_cast<int>(planned.size());
      cell.excluded = static_cast<int>(ex.size());
      res.cells.push_back(cell);
    }
  }
  return res;
}

inline void write_sweep_table(std::ostream& os, const SweepResult& r) {
  os << "# sre-sweep/1 parameter=" << to_string(r.parameter) << '\n';
  os << "scenario\tvalue\tstatus\ttotal_cost\tinstalls\tris\tncr\tplanned_tps\texcluded_tps\n";
  for (const auto& c : r.cells) {
    os << c.scenario << '\t' << fmt(c.value, 4) << '\t' << (c.feasible ? "optimal" : "INFEASIBLE") << '\t'
       << (c.feasible ? fmt(c.total_cost) : std::string("-")) << '\t' << c.installs << '\t' << c.ris << '\t'
       << c.ncr << '\t' << c.planned << '\t' << c.excluded << '\n';
  }
  for (std::size_t k = 0; k < r.values.size(); ++k) {
    double cost = 0, inst = 0, ris = 0, ncr = 0;
    bool all = true;
    for (std::size_t s = 0; s < r.scenarios.size(); ++s) {
      const SweepCell& c = r.cells[s * r.values.size() + k];
      all = all && c.feasible;
      cost += c.total_cost;
      inst += c.installs;
      ris += c.ris;
      ncr += c.ncr;
    }
    const double n = static_cast<double>(r.scenarios.size());
    os << "AVERAGE\t" << fmt(r.values[k], 4) << '\t' << (all ? "optimal" : "INFEASIBLE") << '\t'
       << (all ? fmt(cost / n) : std::string("-")) << '\t' << fmt(inst / n, 3) << '\t' << fmt(ris / n, 3) << '\t'
       << fmt(ncr / n, 3) << "\t-\t-\n";
  }
}

// ---- manifests ----

inline Json make_manifest(const std::string& command, const ScenarioConfig& resolved_config,
                          const std::vector<std::string>& outputs) {
  Json m;
  m["schema"] = kManifestSchema;
  m["tool"] = kToolVersion;
  m["command"] = command;
  m["outputs"] = outputs;
  m["config"] = config_to_json(resolved_config);
  return m;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + p.string());
}

}  // namespace sre
