// sreplan: coverage planning with RIS and NCR devices.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sre/config.hpp"
#include "sre/pipeline.hpp"
#include "sre/synth.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;

struct Common {
  std::string config;
  std::string out = "out";
  std::vector<std::string> params;
  long long seed = -1;
  unsigned threads = 1;
};

void add_common(CLI::App* cmd, Common& o, bool needs_config) {
  auto* c = cmd->add_option("--config", o.config, "scenario config (or a run manifest)");
  if (needs_config) c->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "override the config seed");
  cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::Range(1u, 256u))->capture_default_str();
  cmd->add_option("--param", o.params, "override KEY=VALUE (dotted key, JSON value)");
}

sre::ScenarioConfig load(const Common& o) {
  sre::Json doc = o.config.empty() ? sre::config_to_json(sre::ScenarioConfig{}) : sre::load_config_document(o.config);
  for (const auto& p : o.params) sre::apply_override(doc, p);
  if (o.seed >= 0) doc["seed"] = static_cast<std::uint64_t>(o.seed);
  const fs::path base = o.config.empty() ? fs::path{} : fs::path(o.config).parent_path();
  return sre::config_from_json(doc, base);
}

fs::path out_dir(const Common& o) {
  fs::path d(o.out);
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw sre::ConfigError("cannot create output directory " + d.string());
  return d;
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

int cmd_plan(const Common& o) {
  const sre::ScenarioConfig cfg = sre::resolved(load(o));
  const sre::PlanResult r = sre::run_plan(cfg, o.threads);
  const fs::path dir = out_dir(o);
  std::vector<std::string> outputs{"plan.tsv", "coverage.tsv"};
  sre::write_text(dir / "plan.tsv", render([&](std::ostream& os) { sre::write_plan_table(os, r, cfg); }));
  sre::write_text(dir / "coverage.tsv", render([&](std::ostream& os) { sre::write_coverage_counts(os, r, cfg); }));
  if (!r.feasible()) {
    sre::write_text(dir / "uncoverable.tsv",
                    render([&](std::ostream& os) { sre::write_uncoverable(os, r.world, r.plan.uncoverable); }));
    outputs.push_back("uncoverable.tsv");
  }
  if (cfg.planning.export_activation) {
    sre::write_text(dir / "activation.tsv",
                    render([&](std::ostream& os) { sre::write_activation_table(os, r.activation, r.world.tps); }));
    outputs.push_back("activation.tsv");
  }
  outputs.push_back("manifest.json");
  sre::write_text(dir / "manifest.json", sre::make_manifest("plan", cfg, outputs).dump(2) + "\n");

  if (!r.feasible()) {
    std::cerr << "infeasible: " << r.plan.uncoverable.size() << " test point(s) cannot reach K="
              << cfg.planning.K << " (listed in " << (dir / "uncoverable.tsv").string() << ")\n";
    return kExitInfeasible;
  }
  std::cout << "optimal plan: cost " << sre::fmt(r.plan.total_cost, 4) << ", " << r.plan.ris_count() << " RIS, "
            << r.plan.ncr_count() << " NCR, " << r.planned.size() << " test points";
  if (!r.excluded.empty()) std::cout << " (" << r.excluded.size() << " excluded)";
  std::cout << "\n";
  return kExitOk;
}

int cmd_sweep(const Common& o) {
  const sre::ScenarioConfig cfg = sre::resolved(load(o));
  if (!cfg.sweep) throw sre::ConfigError("config has no sweep section");
  const sre::SweepResult r = sre::run_sweep(cfg, o.threads);
  const fs::path dir = out_dir(o);
  const std::string table = render([&](std::ostream& os) { sre::write_sweep_table(os, r); });
  sre::write_text(dir / "sweep.tsv", table);
  sre::write_text(dir / "manifest.json", sre::make_manifest("sweep", cfg, {"sweep.tsv", "manifest.json"}).dump(2) + "\n");
  std::cout << table;
  return kExitOk;
}

int cmd_coverage(const Common& o) {
  const sre::ScenarioConfig cfg = sre::resolved(load(o));
  const sre::World w = sre::build_world(*cfg.scene.scene, cfg.planning);
  const auto catalog = sre::catalog_for(cfg);
  const sre::ActivationMatrix am = sre::activation_for(w, cfg, catalog, o.threads);
  const fs::path dir = out_dir(o);
  sre::write_text(dir / "coverage_grid.tsv", render([&](std::ostream& os) { sre::write_coverage_grid(os, w, am); }));
  sre::write_text(dir / "manifest.json",
                  sre::make_manifest("coverage", cfg, {"coverage_grid.tsv", "manifest.json"}).dump(2) + "\n");
  std::cout << "coverage grid: " << w.tps.size() << " test points\n";
  return kExitOk;
}

int cmd_gen_scene(const Common& o) {
  sre::ScenarioConfig cfg = load(o);
  const sre::Scene s = sre::generate_synthetic_scene(cfg.generator, cfg.seed);
  const fs::path dir = out_dir(o);
  sre::save_scene(dir / "scene.json", s);
  cfg.scene.scene = s;
  cfg.scene.path.clear();
  sre::write_text(dir / "manifest.json", sre::make_manifest("gen-scene", cfg, {"scene.json", "manifest.json"}).dump(2) + "\n");
  std::cout << "scene: " << s.buildings.size() << " buildings, seed " << cfg.seed << "\n";
  return kExitOk;
}

int cmd_validate(const Common& o) {
  const sre::ScenarioConfig cfg = sre::resolved(load(o));
  const sre::World w = sre::build_world(*cfg.scene.scene, cfg.planning);
  const auto catalog = sre::catalog_for(cfg);
  std::size_t walls = 0;
  for (const auto& s : w.sites) walls += s.kind == sre::SiteKind::wall ? 1 : 0;
  std::cout << "config ok: " << w.scene.buildings.size() << " buildings, " << walls << " wall sites, "
            << w.sites.size() - walls << " rooftop sites, " << w.tps.size() << " test points, " << catalog.size()
            << " device types\n";
  for (const auto& d : catalog) std::cout << "  " << d.label() << " cost " << sre::fmt(d.cost, 4) << "\n";
  if (cfg.sweep)
    for (const auto& [name, src] : sre::sweep_scenarios(cfg)) {
      const sre::World sw = sre::build_world(sre::resolve_scene(src), cfg.planning);
      std::cout << "  sweep scenario " << name << ": " << sw.tps.size() << " test points\n";
    }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-minimal RIS/NCR deployment planning for mmWave coverage"};
  app.require_subcommand(1);
  Common plan, sweep, coverage, gen, validate;
  add_common(app.add_subcommand("plan", "compute the minimum-cost deployment"), plan, true);
  add_common(app.add_subcommand("sweep", "re-plan across a parameter sweep"), sweep, true);
  add_common(app.add_subcommand("coverage", "export the best-link SNR grid"), coverage, true);
  add_common(app.add_subcommand("gen-scene", "generate a synthetic city map"), gen, false);
  add_common(app.add_subcommand("validate", "check a config and its scenes"), validate, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("plan")) return cmd_plan(plan);
    if (app.got_subcommand("sweep")) return cmd_sweep(sweep);
    if (app.got_subcommand("coverage")) return cmd_coverage(coverage);
    if (app.got_subcommand("gen-scene")) return cmd_gen_scene(gen);
    if (app.got_subcommand("validate")) return cmd_validate(validate);
  } catch (const sre::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
