// Acceptance checks, one test per criterion. Besides the usual gtest output
// the binary ends with one "criterion N: PASS|FAIL" line per criterion run.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "sre/config.hpp"
#include "sre/costs.hpp"
#include "sre/link.hpp"
#include "sre/pipeline.hpp"
#include "sre/planner.hpp"
#include "support/blockage_oracle.hpp"
#include "support/random_instance.hpp"

using namespace sre;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

fs::path samples() { return fs::path(SRE_SAMPLES_DIR); }

Terminal iso(const Point3& p) { return {p, make_upa(1, 1, wavelength(28e9) / 2, ElementPattern::isotropic)}; }

double db(double x) { return linear_to_db(x); }

// Sweep cells of one scenario, in value order.
std::vector<SweepCell> cells_of(const SweepResult& r, const std::string& scenario) {
  std::vector<SweepCell> out;
  for (const auto& c : r.cells)
    if (c.scenario == scenario) out.push_back(c);
  return out;
}

SweepResult sweep(const fs::path& config, const std::vector<std::string>& overrides = {}) {
  Json doc = load_config_document(config);
  for (const auto& o : overrides) apply_override(doc, o);
  return run_sweep(resolved(config_from_json(doc, config.parent_path())));
}

void print_cells(const SweepResult& r) {
  for (const auto& c : r.cells)
    std::printf("    %s %s=%g cost=%s installs=%d ris=%d ncr=%d\n", c.scenario.c_str(), to_string(r.parameter), c.value,
                c.feasible ? fmt(c.total_cost, 4).c_str() : "-", c.installs, c.ris, c.ncr);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SREPLAN_EXE) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Prints the per-criterion summary once every test has run.
class Summary : public testing::EmptyTestEventListener {
 public:
  void OnTestEnd(const testing::TestInfo& info) override {
    const std::string name = info.name();
    if (name.size() < 3 || name[0] != 'C') return;
    lines_[std::stoi(name.substr(1, 2))] = {name.substr(4), info.result()->Passed()};
  }
  void OnTestProgramEnd(const testing::UnitTest&) override {
    for (const auto& [n, line] : lines_)
      std::printf("criterion %d: %s  %s\n", n, line.second ? "PASS" : "FAIL", line.first.c_str());
    std::fflush(stdout);
  }

 private:
  std::map<int, std::pair<std::string, bool>> lines_;
};

}  // namespace

TEST(Acceptance, C01_CostModelExactness) {
  const CostParams p;
  EXPECT_EQ(p.ris_deploy, 0.4);
  EXPECT_EQ(p.ris_per_atom, 6e-5);
  EXPECT_EQ(p.ncr_deploy, 0.8);
  EXPECT_EQ(p.ncr_per_db, 0.04);
  EXPECT_EQ(ris_cost(100 * 100, p), 1.0);
  EXPECT_EQ(ncr_cost(55.0, p), 3.0);
}

TEST(Acceptance, C02_OptimizerMatchesBruteForce) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int feasible = 0, both_k = 0;
  for (int i = 0; i < 200; ++i) {
    const PlanningInstance inst = fixtures::random_instance(rng, 12, 30);
    ASSERT_LE(inst.columns.size(), 12u);
    ASSERT_LE(inst.tp_count, 30);
    both_k |= 1 << (inst.K - 1);
    const Plan bf = brute_force_plan(inst);
    const Plan bb = plan_min_cost(inst);
    ASSERT_EQ(bb.proof, bf.proof) << "instance " << i;
    if (bf.proof != Optimality::optimal) continue;
    ++feasible;
    EXPECT_EQ(bb.total_cost, bf.total_cost) << "instance " << i;
    ASSERT_EQ(bb.installs.size(), bf.installs.size()) << "instance " << i;
    for (std::size_t k = 0; k < bf.installs.size(); ++k) {
      EXPECT_EQ(bb.installs[k].site_id, bf.installs[k].site_id) << "instance " << i;
      EXPECT_EQ(bb.installs[k].device, bf.installs[k].device) << "instance " << i;
    }
  }
  const double secs = seconds_since(t0);
  std::printf("    %d feasible of 200, %.2f s\n", feasible, secs);
  EXPECT_GE(feasible, 100);
  EXPECT_EQ(both_k, 3);
  EXPECT_LT(secs, 10.0);
}

TEST(Acceptance, C03_ThresholdAndKMonotonicity) {
  const auto t0 = Clock::now();
  const fs::path cfg = samples() / "threshold_k.json";
  const SweepResult g = sweep(cfg);
  const SweepResult k = sweep(cfg, {R"(sweep={"parameter":"K","values":[1,2]})"});
  print_cells(g);
  print_cells(k);
  ASSERT_EQ(g.cells.size(), 2u);
  ASSERT_EQ(k.cells.size(), 2u);
  for (const auto* r : {&g, &k})
    for (const auto& c : r->cells) ASSERT_TRUE(c.feasible);
  EXPECT_EQ(g.cells[0].value, 0.0);
  EXPECT_EQ(g.cells[1].value, 20.0);
  EXPECT_GE(g.cells[1].total_cost, g.cells[0].total_cost);
  EXPECT_GE(k.cells[1].total_cost, k.cells[0].total_cost);
  const double secs = seconds_since(t0);
  std::printf("    %.1f s\n", secs);
  EXPECT_LT(secs, 300.0);
}

TEST(Acceptance, C04_PriceRatioTrend) {
  const auto t0 = Clock::now();
  const SweepResult r = sweep(samples() / "price_ratio.json");
  print_cells(r);
  ASSERT_EQ(r.values, (std::vector<double>{1, 1.5, 2, 3, 4}));
  ASSERT_EQ(r.scenarios.size(), 4u);
  std::vector<double> avg(r.values.size(), 0.0);
  for (const auto& s : r.scenarios) {
    const auto cells = cells_of(r, s);
    ASSERT_EQ(cells.size(), r.values.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      ASSERT_TRUE(cells[i].feasible) << s;
      avg[i] += cells[i].total_cost / static_cast<double>(r.scenarios.size());
      if (i > 0) EXPECT_LE(cells[i].ncr, cells[i - 1].ncr) << s << " at ratio " << r.values[i];
    }
  }
  for (std::size_t i = 1; i < avg.size(); ++i) EXPECT_GE(avg[i], avg[i - 1]) << "ratio " << r.values[i];
  const double secs = seconds_since(t0);
  std::printf("    %.1f s\n", secs);
  EXPECT_LT(secs, 900.0);
}

TEST(Acceptance, C05_ConfigurationUShape) {
  const auto t0 = Clock::now();
  // Some interior value must cost no more than both endpoints.
  auto u_shaped = [](const SweepResult& r) {
    const auto& c = r.cells;
    for (const auto& x : c)
      if (!x.feasible) return false;
    for (std::size_t i = 1; i + 1 < c.size(); ++i)
      if (c[i].total_cost <= c.front().total_cost && c[i].total_cost <= c.back().total_cost) return true;
    return false;
  };
  const SweepResult ris = sweep(samples() / "city" / "ris_dim.json");
  const SweepResult ncr = sweep(samples() / "city" / "ncr_gain.json");
  print_cells(ris);
  print_cells(ncr);
  ASSERT_EQ(ris.values, (std::vector<double>{50, 100, 150}));
  ASSERT_EQ(ncr.values, (std::vector<double>{20, 38, 48, 70}));
  ASSERT_EQ(ris.scenarios.size(), 1u);
  ASSERT_EQ(ncr.scenarios.size(), 1u);
  EXPECT_TRUE(u_shaped(ris));
  EXPECT_TRUE(u_shaped(ncr));
  const double secs = seconds_since(t0);
  std::printf("    %.1f s\n", secs);
  EXPECT_LT(secs, 900.0);
}

TEST(Acceptance, C06_RisScalingLaw) {
  const RadioParams radio;
  const double lambda = radio.lambda();
  // Far field: both hops are hundreds of metres, the largest surface is 0.34 m.
  const Point3 bs(300, 200, 20), ue(150, -250, 1.5), at(0, 0, 5);
  std::vector<double> lx, ly;
  for (int side : {16, 32, 64}) {
    const Terminal ris{at, make_upa(side, side, lambda / 4, ElementPattern::cosine,
                                    orientation_from_boresight(Eigen::Vector3d(1, 0, 0)))};
    lx.push_back(std::log10(static_cast<double>(side * side)));
    ly.push_back(std::log10(snr_ris(iso(bs), ris, iso(ue), radio)));
  }
  // Least-squares slope over the three points.
  const double mx = (lx[0] + lx[1] + lx[2]) / 3, my = (ly[0] + ly[1] + ly[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  std::printf("    slope %.5f\n", sxy / sxx);
  EXPECT_NEAR(sxy / sxx, 2.0, 0.05);
}

TEST(Acceptance, C07_NcrSaturation) {
  const RadioParams radio;
  const double lambda = radio.lambda();
  const Point3 bs(0, 0, 10), site(100, 0, 6.5), ue(115, 13, 1.5);
  const Terminal tx{bs, make_upa(4, 4, lambda / 2, ElementPattern::isotropic)};
  auto device = [&](double g) {
    NcrDevice n;
    n.position = site;
    n.receive_panel = make_upa(12, 6, lambda / 2, ElementPattern::sector3gpp, orientation_from_boresight(bs - site));
    n.forward_panel = make_upa(12, 6, lambda / 2, ElementPattern::sector3gpp, orientation_from_boresight(ue - site));
    n.gain = db_to_linear(g);
    return n;
  };
  // Infinite gain leaves only the first hop over the repeater's own noise,
  // with the best beam pair on that hop.
  const NcrDevice ref = device(0);
  const CMatrix h = detail::los_channel(tx, {site, ref.receive_panel}, radio.carrier_hz);
  const Eigen::JacobiSVD<CMatrix> svd(h);
  const double s1 = svd.singularValues()(0);
  const double limit = radio.tx_power_mw() * s1 * s1 / radio.ncr_noise_mw();
  double prev = 0.0;
  double worst = 0.0;
  for (double g = 0; g <= 120; g += 2) {
    const double s = snr_ncr(tx, device(g), iso(ue), radio);
    EXPECT_GE(s, prev) << "g = " << g;
    prev = s;
    if (g >= 80) {
      worst = std::max(worst, std::abs(db(s) - db(limit)));
      EXPECT_NEAR(db(s), db(limit), 0.1) << "g = " << g;
    }
  }
  std::printf("    limit %.3f dB, worst gap above 80 dB %.4f dB\n", db(limit), worst);
}

TEST(Acceptance, C08_BlockageMatchesMonteCarlo) {
  const auto t0 = Clock::now();
  const BlockageParams p;
  fixtures::BlockageOracle mc;
  std::mt19937_64 rng(7);
  for (double r : {25.0, 100.0, 200.0}) {
    const double sim = mc.probability(r, 6.0, 1.5, 1'000'000, rng);
    const double model = blockage_probability(r, 6.0, 1.5, p);
    std::printf("    r=%g model %.4f simulated %.4f\n", r, model, sim);
    EXPECT_NEAR(model, sim, 0.02) << "r = " << r;
  }
  EXPECT_LT(seconds_since(t0), 60.0);
}

TEST(Acceptance, C09_FriisAnchor) {
  const RadioParams radio;
  const double lambda = 299792458.0 / 28e9;
  for (double d : {10.0, 100.0, 400.0}) {
    const double hand = 35.0 + 20 * std::log10(lambda / (4 * 3.14159265358979323846 * d)) + 82.0;
    const double got = db(snr_direct(iso({0, 0, 1.5}), iso({d, 0, 1.5}), radio));
    std::printf("    d=%g hand %.4f dB model %.4f dB\n", d, hand, got);
    EXPECT_NEAR(got, hand, 0.1) << "d = " << d;
  }
}

TEST(Acceptance, C10_DeterministicPlans) {
  const auto t0 = Clock::now();
  const fs::path d = fs::temp_directory_path() / "sre_acceptance_determinism";
  fs::remove_all(d);
  const std::string cfg = (samples() / "four_blocks.json").string();
  ASSERT_EQ(run_cli("plan --config " + cfg + " --out " + (d / "a").string()), 0);
  ASSERT_EQ(run_cli("plan --config " + cfg + " --out " + (d / "b").string()), 0);
  ASSERT_EQ(run_cli("plan --config " + cfg + " --threads 4 --out " + (d / "c").string()), 0);
  for (const char* f : {"plan.tsv", "coverage.tsv", "manifest.json"}) {
    const std::string a = slurp(d / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(d / "b" / f)) << f;
    EXPECT_EQ(a, slurp(d / "c" / f)) << f;
  }
  const double secs = seconds_since(t0);
  std::printf("    %.1f s\n", secs);
  EXPECT_LT(secs, 300.0);
}

int main(int argc, char** argv) {
  testing::InitGoogleTest(&argc, argv);
  testing::UnitTest::GetInstance()->listeners().Append(new Summary);
  return RUN_ALL_TESTS();
}
