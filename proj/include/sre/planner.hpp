#pragma once

// Minimum-cost K-fold coverage with at most one device per candidate site:
//
//   min  sum_{c,d} O^d v_c^d
//   s.t. Delta_t^BS + sum_{c,d} Delta_{t,c}^d v_c^d >= K   for every test point t
//        sum_d v_c^d <= 1                                  for every site c
//        v binary
//
// Ties between equal-cost optima are broken by fewest installs, then fewest
// NCRs, then the lexicographically smallest sorted site-id list, then the
// device indices in site order. Costs are compared on a 1e-6 unit grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "sre/activation.hpp"
#include "sre/costs.hpp"
#include "sre/lp.hpp"

namespace sre {

inline constexpr double kCostQuantum = 1e-6;

inline std::int64_t cost_units(double cost) { return std::llround(cost / kCostQuantum); }

struct PlanningInstance {
  struct Column {
    int site_id = 0;
    int device = 0;
    DeviceKind kind = DeviceKind::ris;
    double cost = 0.0;
    std::vector<int> tps;  // test points this (site, device) pair covers
  };

  int tp_count = 0;
  std::vector<std::uint8_t> bs_delta;
  std::vector<Column> columns;
  int K = 1;

  void validate() const {
    if (K < 1) throw std::invalid_argument("coverage multiplicity K must be at least 1");
    if (bs_delta.size() != static_cast<std::size_t>(tp_count)) throw std::invalid_argument("bs_delta size mismatch");
    std::vector<std::pair<int, int>> keys;
    for (const auto& c : columns) {
      if (!(c.cost > 0.0)) throw std::invalid_argument("device costs must be strictly positive");
      for (int t : c.tps)
        if (t < 0 || t >= tp_count) throw std::invalid_argument("column covers an unknown test point");
      keys.emplace_back(c.site_id, c.device);
    }
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end())
      throw std::invalid_argument("duplicate (site, device) column");
  }
};

inline PlanningInstance make_instance(const ActivationMatrix& am, int K) {
  PlanningInstance inst;
  inst.tp_count = static_cast<int>(am.tp_count());
  inst.K = K;
  inst.bs_delta.resize(am.tp_count());
  for (std::size_t t = 0; t < am.tp_count(); ++t) inst.bs_delta[t] = am.bs_delta(t) ? 1 : 0;
  for (std::size_t col = 0; col < am.columns().size(); ++col) {
    const auto& c = am.columns()[col];
    const DeviceSpec& d = am.devices()[static_cast<std::size_t>(c.device)];
    PlanningInstance::Column pc;
    pc.site_id = am.sites()[static_cast<std::size_t>(c.site_index)].id;
    pc.device = c.device;
    pc.kind = d.kind;
    pc.cost = d.cost;
    pc.tps = am.covered_tps(col);
    inst.columns.push_back(std::move(pc));
  }
  return inst;
}

struct FeasibilityReport {
  bool feasible = true;
  std::vector<int> uncoverable;
};

// A test point is uncoverable when the BS plus every site able to serve it
// (one device per site) still falls short of K.
inline FeasibilityReport check_feasibility(const PlanningInstance& inst) {
  std::vector<std::vector<int>> sites_for(static_cast<std::size_t>(inst.tp_count));
  for (const auto& c : inst.columns)
    for (int t : c.tps) sites_for[static_cast<std::size_t>(t)].push_back(c.site_id);
  FeasibilityReport rep;
  for (int t = 0; t < inst.tp_count; ++t) {
    auto& s = sites_for[static_cast<std::size_t>(t)];
    std::sort(s.begin(), s.end());
    const auto distinct = std::unique(s.begin(), s.end()) - s.begin();
    if (inst.bs_delta[static_cast<std::size_t>(t)] + distinct < inst.K) rep.uncoverable.push_back(t);
  }
  rep.feasible = rep.uncoverable.empty();
  return rep;
}

struct Install {
  int site_id = 0;
  int device = 0;
  DeviceKind kind = DeviceKind::ris;
  double cost = 0.0;
};

enum class Optimality { optimal, infeasible };

struct SolveStats {
  long nodes = 0;
  long lp_solves = 0;
  long pivots = 0;
  int components = 0;
  int rows_after_reduction = 0;
  int columns_after_reduction = 0;
};

struct Plan {
  std::vector<Install> installs;  // sorted by site id
  double total_cost = 0.0;
  std::vector<int> coverage_count;
  Optimality proof = Optimality::infeasible;
  std::vector<int> uncoverable;
  SolveStats stats;

  int ncr_count() const {
    return static_cast<int>(std::count_if(installs.begin(), installs.end(),
                                          [](const Install& i) { return i.kind == DeviceKind::ncr; }));
  }
  int ris_count() const { return static_cast<int>(installs.size()) - ncr_count(); }
};

// Lexicographic plan ranking.
struct PlanKey {
  std::int64_t cost = 0;
  int installs = 0;
  int ncr = 0;
  std::vector<int> sites;    // ascending
  std::vector<int> devices;  // device index per entry of `sites`

  friend bool operator<(const PlanKey& a, const PlanKey& b) {
    return std::tie(a.cost, a.installs, a.ncr, a.sites, a.devices) <
           std::tie(b.cost, b.installs, b.ncr, b.sites, b.devices);
  }
  friend bool operator==(const PlanKey& a, const PlanKey& b) {
    return std::tie(a.cost, a.installs, a.ncr, a.sites, a.devices) ==
           std::tie(b.cost, b.installs, b.ncr, b.sites, b.devices);
  }
};

inline PlanKey plan_key(const PlanningInstance& inst, std::vector<int> selection) {
  std::sort(selection.begin(), selection.end(), [&](int a, int b) {
    return inst.columns[static_cast<std::size_t>(a)].site_id < inst.columns[static_cast<std::size_t>(b)].site_id;
  });
  PlanKey k;
  for (int j : selection) {
    const auto& c = inst.columns[static_cast<std::size_t>(j)];
    k.cost += cost_units(c.cost);
    k.ncr += c.kind == DeviceKind::ncr ? 1 : 0;
    k.sites.push_back(c.site_id);
    k.devices.push_back(c.device);
  }
  k.installs = static_cast<int>(selection.size());
  return k;
}

inline Plan make_plan(const PlanningInstance& inst, std::vector<int> selection) {
  std::sort(selection.begin(), selection.end(), [&](int a, int b) {
    return inst.columns[static_cast<std::size_t>(a)].site_id < inst.columns[static_cast<std::size_t>(b)].site_id;
  });
  Plan p;
  p.proof = Optimality::optimal;
  p.coverage_count.assign(inst.bs_delta.begin(), inst.bs_delta.end());
  for (int j : selection) {
    const auto& c = inst.columns[static_cast<std::size_t>(j)];
    p.installs.push_back({c.site_id, c.device, c.kind, c.cost});
    p.total_cost += c.cost;
    for (int t : c.tps) ++p.coverage_count[static_cast<std::size_t>(t)];
  }
  return p;
}

inline Plan infeasible_plan(const PlanningInstance& inst, std::vector<int> uncoverable) {
  Plan p;
  p.proof = Optimality::infeasible;
  p.uncoverable = std::move(uncoverable);
  p.coverage_count.assign(inst.bs_delta.begin(), inst.bs_delta.end());
  return p;
}

class SizeGuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Exhaustive enumeration of every one-device-per-site selection.
inline Plan brute_force_plan(const PlanningInstance& inst, std::size_t max_columns = 24) {
  inst.validate();
  if (inst.columns.size() > max_columns)
    throw SizeGuardError("brute force limited to " + std::to_string(max_columns) + " columns, instance has " +
                         std::to_string(inst.columns.size()));
  const FeasibilityReport fr = check_feasibility(inst);
  if (!fr.feasible) return infeasible_plan(inst, fr.uncoverable);

  std::map<int, std::vector<int>> by_site;
  for (std::size_t j = 0; j < inst.columns.size(); ++j)
    by_site[inst.columns[j].site_id].push_back(static_cast<int>(j));
  std::vector<std::vector<int>> groups;
  for (auto& [site, cols] : by_site) groups.push_back(cols);

  std::vector<int> count(inst.bs_delta.begin(), inst.bs_delta.end());
  std::vector<int> chosen;
  std::optional<PlanKey> best;
  std::vector<int> best_sel;

  auto recurse = [&](auto&& self, std::size_t g) -> void {
    if (g == groups.size()) {
      for (int t = 0; t < inst.tp_count; ++t)
        if (count[static_cast<std::size_t>(t)] < inst.K) return;
      PlanKey k = plan_key(inst, chosen);
      if (!best || k < *best) {
        best = std::move(k);
        best_sel = chosen;
      }
      return;
    }
    self(self, g + 1);
    for (int j : groups[g]) {
      const auto& c = inst.columns[static_cast<std::size_t>(j)];
      for (int t : c.tps) ++count[static_cast<std::size_t>(t)];
      chosen.push_back(j);
      self(self, g + 1);
      chosen.pop_back();
      for (int t : c.tps) --count[static_cast<std::size_t>(t)];
    }
  };
  recurse(recurse, 0);
  if (!best) return infeasible_plan(inst, {});
  return make_plan(inst, best_sel);
}

struct PlannerOptions {
  unsigned threads = 1;
  bool preprocess = true;
  long node_limit = -1;  // < 0: unlimited
};

class NodeLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

class Bits {
 public:
  explicit Bits(std::size_t n = 0) : w_((n + 63) / 64, 0) {}
  void set(std::size_t i) { w_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool subset_of(const Bits& o) const {
    for (std::size_t k = 0; k < w_.size(); ++k)
      if (w_[k] & ~o.w_[k]) return false;
    return true;
  }

 private:
  std::vector<std::uint64_t> w_;
};

// Reduced problem: active rows with residual demand, candidate columns over them.
struct Reduced {
  struct Col {
    int orig = 0;
    int site_id = 0;
    int device = 0;
    bool ncr = false;
    std::int64_t units = 0;
    std::vector<int> rows;
  };
  std::vector<int> residual;  // per active row
  std::vector<int> row_tp;    // test point behind each active row
  std::vector<Col> cols;
};

// Lexicographic preference between two columns of equal install count.
inline bool column_key_less(const Reduced::Col& a, const Reduced::Col& b) {
  return std::tie(a.units, a.ncr, a.site_id, a.device) < std::tie(b.units, b.ncr, b.site_id, b.device);
}

inline bool reduce_once(Reduced& r) {
  const std::size_t m = r.residual.size();
  const std::size_t n = r.cols.size();
  bool changed = false;
  std::vector<Bits> col_bits(n, Bits(m));
  for (std::size_t j = 0; j < n; ++j)
    for (int i : r.cols[j].rows) col_bits[j].set(static_cast<std::size_t>(i));
  std::map<int, int> site_cols;
  for (const auto& c : r.cols) ++site_cols[c.site_id];
  const int max_res = m ? *std::max_element(r.residual.begin(), r.residual.end()) : 0;

  // Column dominance. Same site: swapping devices keeps every count. Across
  // sites (only when every residual is 1 and the dominating site has a single
  // option): swapping or dropping never loses coverage.
  std::vector<char> drop_col(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n && !drop_col[a]; ++b) {
      if (a == b || drop_col[b]) continue;
      const auto& ca = r.cols[a];
      const auto& cb = r.cols[b];
      if (cb.rows.size() < ca.rows.size()) continue;
      const bool same_site = ca.site_id == cb.site_id;
      if (!same_site && !(max_res <= 1 && site_cols[cb.site_id] == 1)) continue;
      if (!column_key_less(cb, ca)) continue;
      if (cb.units > ca.units || (cb.units == ca.units && cb.ncr && !ca.ncr)) continue;
      if (col_bits[a].subset_of(col_bits[b])) drop_col[a] = 1;
    }
  }
  if (std::any_of(drop_col.begin(), drop_col.end(), [](char c) { return c != 0; })) {
    std::vector<Reduced::Col> kept;
    for (std::size_t j = 0; j < n; ++j)
      if (!drop_col[j]) kept.push_back(std::move(r.cols[j]));
    r.cols = std::move(kept);
    changed = true;
  }

  // Row dominance: a row whose coverer set contains another row's, with no
  // larger residual, is implied.
  const std::size_t n2 = r.cols.size();
  std::vector<std::vector<int>> coverers(m);
  for (std::size_t j = 0; j < n2; ++j)
    for (int i : r.cols[j].rows) coverers[static_cast<std::size_t>(i)].push_back(static_cast<int>(j));
  std::vector<Bits> row_bits(m, Bits(n2));
  for (std::size_t i = 0; i < m; ++i)
    for (int j : coverers[i]) row_bits[i].set(static_cast<std::size_t>(j));
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto sa = coverers[static_cast<std::size_t>(a)].size(), sb = coverers[static_cast<std::size_t>(b)].size();
    if (sa != sb) return sa < sb;
    if (r.residual[static_cast<std::size_t>(a)] != r.residual[static_cast<std::size_t>(b)])
      return r.residual[static_cast<std::size_t>(a)] > r.residual[static_cast<std::size_t>(b)];
    return a < b;
  });
  std::vector<int> kept_rows;
  std::vector<char> keep_row(m, 0);
  for (int i : order) {
    const auto ui = static_cast<std::size_t>(i);
    bool dominated = false;
    for (int k : kept_rows) {
      const auto uk = static_cast<std::size_t>(k);
      if (r.residual[uk] >= r.residual[ui] && row_bits[uk].subset_of(row_bits[ui])) {
        dominated = true;
        break;
      }
    }
    if (!dominated) {
      kept_rows.push_back(i);
      keep_row[ui] = 1;
    }
  }
  if (kept_rows.size() < m) {
    changed = true;
    std::vector<int> remap(m, -1);
    std::vector<int> residual, row_tp;
    for (std::size_t i = 0; i < m; ++i)
      if (keep_row[i]) {
        remap[i] = static_cast<int>(residual.size());
        residual.push_back(r.residual[i]);
        row_tp.push_back(r.row_tp[i]);
      }
    r.residual = std::move(residual);
    r.row_tp = std::move(row_tp);
    std::vector<Reduced::Col> kept;
    for (auto& c : r.cols) {
      std::vector<int> rows;
      for (int i : c.rows)
        if (remap[static_cast<std::size_t>(i)] >= 0) rows.push_back(remap[static_cast<std::size_t>(i)]);
      c.rows = std::move(rows);
      if (!c.rows.empty()) kept.push_back(std::move(c));
    }
    r.cols = std::move(kept);
  }
  return changed;
}

struct ComponentResult {
  bool found = false;
  std::vector<int> selection;  // original column indices
  long nodes = 0;
  long lp_solves = 0;
  long pivots = 0;
};

// Exact search over one connected component, in three passes over the same
// state. Least cost first, by LP-bounded branching with pseudocosts. Then
// fewest installs and NCRs at that cost, bounded by two more LPs that carry
// the cost as a budget row. Last, sites are settled in id order: each one is
// kept only if some tie still contains it, and devices likewise.
class BranchAndBound {
 public:
  BranchAndBound(std::vector<Reduced::Col> cols, std::vector<int> residual, long node_limit)
      : cols_(std::move(cols)), residual_(std::move(residual)), residual0_(residual_), node_limit_(node_limit) {
    std::vector<int> ids;
    for (const auto& c : cols_) ids.push_back(c.site_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    site_ids_ = ids;
    site_cols_.resize(ids.size());
    for (std::size_t j = 0; j < cols_.size(); ++j) {
      const auto s = static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), cols_[j].site_id) - ids.begin());
      col_site_.push_back(static_cast<int>(s));
      site_cols_[s].push_back(static_cast<int>(j));
    }
    for (auto& sc : site_cols_)
      std::sort(sc.begin(), sc.end(), [&](int a, int b) {
        return cols_[static_cast<std::size_t>(a)].device < cols_[static_cast<std::size_t>(b)].device;
      });
    std::int64_t g = 0;
    for (const auto& c : cols_) g = std::gcd(g, c.units);
    for (const auto& c : cols_) units_.push_back(g > 0 ? c.units / g : c.units);
    W_ = static_cast<std::int64_t>(site_ids_.size()) + 1;
    status_.assign(cols_.size(), Free);
    site_used_.assign(site_ids_.size(), 0);
    site_forced_.assign(site_ids_.size(), 0);
  }

  ComponentResult run() {
    greedy();
    if (!have_) ub_ = std::accumulate(units_.begin(), units_.end(), std::int64_t{0}) + 1;

    lps_[0] = make_lp(0);
    optimize_cost();
    ComponentResult out;
    if (have_) {
      cost_cap_ = ub_;
      vub_ = value_of(best_sel_);
      lps_[1] = make_lp(1);
      lps_[2] = make_lp(2);
      optimize_value();
      target_installs_ = static_cast<int>(best_sel_.size());
      lex_pass();
      out.found = true;
      for (int j : best_sel_) out.selection.push_back(cols_[static_cast<std::size_t>(j)].orig);
    }
    out.nodes = nodes_;
    out.lp_solves = lp_solves_;
    out.pivots = pivots_;
    return out;
  }

 private:
  enum Status : char { Free, In, Out };
  static constexpr double kEps = 1e-6;
  static constexpr int kReliable = 2;
  static constexpr int kMaxProbes = 8;
  static constexpr int kLookahead = 4;

  std::int64_t value_of(int j) const { return W_ + (cols_[static_cast<std::size_t>(j)].ncr ? 1 : 0); }
  std::int64_t value_of(const std::vector<int>& sel) const {
    std::int64_t v = 0;
    for (int j : sel) v += value_of(j);
    return v;
  }
  std::int64_t units_of(const std::vector<int>& sel) const {
    std::int64_t u = 0;
    for (int j : sel) u += units_[static_cast<std::size_t>(j)];
    return u;
  }
  bool usable(std::size_t j) const { return status_[j] == Free && !site_used_[static_cast<std::size_t>(col_site_[j])]; }
  bool covered() const {
    return std::all_of(residual_.begin(), residual_.end(), [](int v) { return v <= 0; });
  }

  bool covers_all(const std::vector<int>& sel) const {
    std::vector<int> res = residual0_;
    std::vector<char> used(site_ids_.size(), 0);
    for (int j : sel) {
      const auto s = static_cast<std::size_t>(col_site_[static_cast<std::size_t>(j)]);
      if (used[s]) return false;
      used[s] = 1;
      for (int i : cols_[static_cast<std::size_t>(j)].rows) --res[static_cast<std::size_t>(i)];
    }
    return std::all_of(res.begin(), res.end(), [](int v) { return v <= 0; });
  }

  void greedy() {
    std::vector<int> res = residual_;
    std::vector<char> used(site_ids_.size(), 0);
    std::vector<int> sel;
    for (;;) {
      if (std::all_of(res.begin(), res.end(), [](int v) { return v <= 0; })) break;
      int best = -1;
      double best_ratio = 0.0;
      for (std::size_t j = 0; j < cols_.size(); ++j) {
        if (used[static_cast<std::size_t>(col_site_[j])]) continue;
        int gain = 0;
        for (int i : cols_[j].rows) gain += res[static_cast<std::size_t>(i)] > 0 ? 1 : 0;
        const double ratio = gain / static_cast<double>(units_[j]);
        if (gain > 0 && ratio > best_ratio) {
          best_ratio = ratio;
          best = static_cast<int>(j);
        }
      }
      if (best < 0) return;
      sel.push_back(best);
      used[static_cast<std::size_t>(col_site_[static_cast<std::size_t>(best)])] = 1;
      for (int i : cols_[static_cast<std::size_t>(best)].rows) --res[static_cast<std::size_t>(i)];
    }
    // Drop redundant picks, most expensive first.
    std::vector<int> order = sel;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return units_[static_cast<std::size_t>(a)] > units_[static_cast<std::size_t>(b)];
    });
    for (int j : order) {
      std::vector<int> trial;
      for (int k : sel)
        if (k != j) trial.push_back(k);
      if (covers_all(trial)) sel = std::move(trial);
    }
    have_ = true;
    ub_ = units_of(sel);
    best_sel_ = sel;
  }

  // Relaxations: 0 is least cost; 1 counts installs and 2 counts NCRs, both
  // held to the optimal cost by a budget row and a floor row (no selection
  // undercuts the optimum). 1 caps the install count at the incumbent's, 2
  // pins it there. 1 and 2 also carry a "site in use" demand per
  // multi-device site. Packing rows: one per site, one per column at
  // multi-device sites, then the budget and count rows.
  struct Relaxation {
    std::unique_ptr<lp::Engine> engine;
    std::vector<long> site_row;  // per multi-device site
    long floor_row = -1;
    long budget_row = -1;
    long count_cap = -1;
    long count_floor = -1;
    std::vector<long> col_cap;
  };

  Relaxation make_lp(int kind) const {
    const std::size_t m = residual_.size(), S = site_ids_.size(), n = cols_.size();
    Relaxation out;
    lp::CoverProblem pb;
    pb.demand.assign(residual_.begin(), residual_.end());
    out.site_row.assign(S, -1);
    if (kind > 0)
      for (std::size_t s = 0; s < S; ++s)
        if (site_cols_[s].size() > 1) {
          out.site_row[s] = static_cast<long>(pb.demand.size());
          pb.demand.push_back(0.0);
        }
    for (std::size_t j = 0; j < n; ++j) {
      double c = static_cast<double>(units_[j]);
      if (kind == 1) c = 1.0;
      if (kind == 2) c = cols_[j].ncr ? 1.0 : 0.0;
      pb.cost.push_back(c);
      auto rows = cols_[j].rows;
      if (const long r = out.site_row[static_cast<std::size_t>(col_site_[j])]; r >= 0) rows.push_back(static_cast<int>(r));
      pb.cover_rows.push_back(std::move(rows));
    }
    pb.packing.resize(S);
    for (std::size_t s = 0; s < S; ++s) {
      pb.packing[s].rhs = 1.0;
      for (int j : site_cols_[s]) {
        pb.packing[s].columns.push_back(j);
        pb.packing[s].coeffs.push_back(1.0);
      }
    }
    out.col_cap.assign(n, -1);
    for (std::size_t s = 0; s < S; ++s) {
      if (site_cols_[s].size() < 2) continue;
      for (int j : site_cols_[s]) {
        out.col_cap[static_cast<std::size_t>(j)] = static_cast<long>(pb.packing.size());
        pb.packing.push_back({{j}, {1.0}, 1.0});
      }
    }
    if (kind > 0) {
      lp::PackingRow budget, count;
      for (std::size_t j = 0; j < n; ++j) {
        budget.columns.push_back(static_cast<int>(j));
        budget.coeffs.push_back(static_cast<double>(units_[j]));
        count.columns.push_back(static_cast<int>(j));
        count.coeffs.push_back(1.0);
      }
      out.budget_row = static_cast<long>(pb.packing.size());
      pb.packing.push_back(budget);
      out.count_cap = static_cast<long>(pb.packing.size());
      pb.packing.push_back(count);
      out.floor_row = static_cast<long>(pb.demand.size() + pb.at_least.size());
      pb.at_least.push_back(budget);
      if (kind == 2) {
        out.count_floor = static_cast<long>(pb.demand.size() + pb.at_least.size());
        pb.at_least.push_back(count);
      }
    }
    out.engine = std::make_unique<lp::Engine>(pb);
    return out;
  }

  // Undo log over both the search state and the LP data.
  struct Step {
    enum Kind : char { demand, capacity, in, out, force } kind;
    char lp;
    std::size_t idx;
    double old;
  };
  std::size_t mark() const { return log_.size(); }
  void set_demand(int k, std::size_t i, double v) {
    lp::Engine& e = *lps_[k].engine;
    log_.push_back({Step::demand, static_cast<char>(k), i, e.demand(i)});
    e.set_demand(i, v);
  }
  void set_capacity(int k, std::size_t r, double v) {
    lp::Engine& e = *lps_[k].engine;
    log_.push_back({Step::capacity, static_cast<char>(k), r, e.capacity(r)});
    e.set_capacity(r, v);
  }
  void rollback(std::size_t to) {
    while (log_.size() > to) {
      const Step st = log_.back();
      log_.pop_back();
      switch (st.kind) {
        case Step::demand: lps_[st.lp].engine->set_demand(st.idx, st.old); break;
        case Step::capacity: lps_[st.lp].engine->set_capacity(st.idx, st.old); break;
        case Step::out: status_[st.idx] = Free; break;
        case Step::force: site_forced_[st.idx] = 0; break;
        case Step::in: {
          status_[st.idx] = Free;
          site_used_[static_cast<std::size_t>(col_site_[st.idx])] = 0;
          for (int i : cols_[st.idx].rows) ++residual_[static_cast<std::size_t>(i)];
          fixed_units_ -= units_[st.idx];
          fixed_value_ -= value_of(static_cast<int>(st.idx));
          fixed_.pop_back();
          break;
        }
      }
    }
  }
  int live_lps() const { return lps_[1].engine ? 3 : 1; }
  std::int64_t installs_cap() const { return vub_ / W_; }
  std::int64_t ncr_cap() const { return vub_ % W_; }
  std::int64_t fixed_ncr() const { return fixed_value_ - W_ * static_cast<std::int64_t>(fixed_.size()); }

  // Rows tied to the incumbent and the fixed set. Rewritten before each solve
  // instead of going through the undo log, which would bring back stale caps.
  void sync_rows(int k) {
    const Relaxation& x = lps_[k];
    if (x.budget_row < 0) return;
    lp::Engine& e = *x.engine;
    const auto left = static_cast<double>(cost_cap_ - fixed_units_);
    const auto count = static_cast<double>(installs_cap() - static_cast<std::int64_t>(fixed_.size()));
    e.set_capacity(static_cast<std::size_t>(x.budget_row), left);
    e.set_demand(static_cast<std::size_t>(x.floor_row), left);
    e.set_capacity(static_cast<std::size_t>(x.count_cap), count);
    if (x.count_floor >= 0) e.set_demand(static_cast<std::size_t>(x.count_floor), count);
  }

  void fix_in(int jj) {
    const auto j = static_cast<std::size_t>(jj);
    const auto s = static_cast<std::size_t>(col_site_[j]);
    log_.push_back({Step::in, 0, j, 0.0});
    status_[j] = In;
    site_used_[s] = 1;
    for (int i : cols_[j].rows) --residual_[static_cast<std::size_t>(i)];
    fixed_units_ += units_[j];
    fixed_value_ += value_of(jj);
    fixed_.push_back(jj);
    for (int k = 0; k < live_lps(); ++k) {
      const Relaxation& x = lps_[k];
      for (int i : cols_[j].rows) set_demand(k, static_cast<std::size_t>(i), residual_[static_cast<std::size_t>(i)]);
      set_capacity(k, s, 0.0);
      if (x.site_row[s] >= 0) set_demand(k, static_cast<std::size_t>(x.site_row[s]), 0.0);
    }
  }

  void fix_out(int jj) {
    const auto j = static_cast<std::size_t>(jj);
    log_.push_back({Step::out, 0, j, 0.0});
    status_[j] = Out;
    for (int k = 0; k < live_lps(); ++k) {
      const long cap = lps_[k].col_cap[j];
      set_capacity(k, static_cast<std::size_t>(cap >= 0 ? cap : col_site_[j]), 0.0);
    }
  }

  void tick() {
    if (node_limit_ >= 0 && nodes_ >= node_limit_) throw NodeLimitError("branch-and-bound node limit reached");
    ++nodes_;
  }

  lp::Result solve(int k) {
    ++lp_solves_;
    sync_rows(k);
    lp::Result r = lps_[k].engine->solve();
    pivots_ += r.pivots;
    return r;
  }

  // Fixes out every usable column whose reduced cost lifts `lb` past `cut`.
  void reduced_cost_fixing(const lp::Result& r, double lb, double cut) {
    for (std::size_t j = 0; j < cols_.size(); ++j)
      if (usable(j) && lb + r.reduced[j] > cut) fix_out(static_cast<int>(j));
  }

  // Integral LP point as a selection, if it is one.
  std::optional<std::vector<int>> integral_point(const lp::Result& r) const {
    if (r.status != lp::Status::optimal) return std::nullopt;
    std::vector<int> sel = fixed_;
    for (std::size_t j = 0; j < cols_.size(); ++j) {
      const double x = r.x[j];
      if (x > kEps && x < 1.0 - kEps) return std::nullopt;
      if (x >= 1.0 - kEps) {
        if (!usable(j)) return std::nullopt;
        sel.push_back(static_cast<int>(j));
      }
    }
    if (!covers_all(sel)) return std::nullopt;
    return sel;
  }

  // Least cost. Only strict improvements on the incumbent are of interest.
  void optimize_cost() {
    tick();
    const Pending pend = std::exchange(pending_, Pending{});
    const std::size_t m0 = mark();
    auto cut = [&] { return static_cast<double>(ub_) - 1.0 + kEps; };
    for (bool first = true;; first = false) {
      if (covered()) {
        if (fixed_units_ < ub_) adopt(fixed_, units_of(fixed_));
        break;
      }
      const lp::Result r = solve(0);
      if (r.status == lp::Status::infeasible) break;
      const double lb = base(0) + r.objective;
      if (first) note(pend, lb);
      if (lb > cut()) break;
      reduced_cost_fixing(r, lb, cut());
      if (auto sel = integral_point(r)) {
        if (units_of(*sel) < ub_) adopt(*sel, units_of(*sel));
        if (lb > cut()) break;
      }
      const Choice c = choose(0, r, lb, cut());
      if (c.fix >= 0) {
        c.in ? fix_in(c.fix) : fix_out(c.fix);
        continue;
      }
      if (c.col >= 0) {
        lp::Engine::Snapshot here;
        lps_[0].engine->save(here);
        const std::size_t m1 = mark();
        fix_in(c.col);
        pending_ = {0, c.col, true, lb, c.frac};
        optimize_cost();
        rollback(m1);
        lps_[0].engine->restore(here);
        fix_out(c.col);
        pending_ = {0, c.col, false, lb, c.frac};
        optimize_cost();
      }
      break;
    }
    rollback(m0);
  }

  void adopt(const std::vector<int>& sel, std::int64_t cost) {
    have_ = true;
    best_sel_ = sel;
    ub_ = cost;
  }

  // Cost bound against the optimum; true when the node survives.
  bool cost_feasible() {
    const lp::Result r = solve(0);
    if (r.status == lp::Status::infeasible) return false;
    const double lb = static_cast<double>(fixed_units_) + r.objective;
    const double cut = static_cast<double>(cost_cap_) + kEps;
    if (lb > cut) return false;
    reduced_cost_fixing(r, lb, cut);
    return true;
  }

  // Fewest installs, then fewest NCRs, among least-cost selections. The NCR
  // count only bounds a node once it cannot beat the incumbent's installs.
  void optimize_value() {
    tick();
    const Pending pend = std::exchange(pending_, Pending{});
    const std::size_t m0 = mark();
    for (bool first = true;; first = false) {
      if (covered()) {
        if (fixed_units_ <= cost_cap_ && fixed_value_ < vub_) adopt_value(fixed_);
        break;
      }
      if (!cost_feasible()) break;
      const lp::Result r1 = solve(1);
      if (r1.status == lp::Status::infeasible) break;
      const double ilb = base(1) + r1.objective;
      if (first && pend.k == 1) note(pend, ilb);
      const double icut = static_cast<double>(installs_cap()) + kEps;
      if (ilb > icut) break;
      reduced_cost_fixing(r1, ilb, icut);
      int k = 1;
      double lb = ilb, cut = icut;
      lp::Result r = r1;
      if (ilb > static_cast<double>(installs_cap()) - 1.0 + kEps) {
        r = solve(2);
        if (r.status == lp::Status::infeasible) break;
        k = 2;
        lb = base(2) + r.objective;
        if (first && pend.k == 2) note(pend, lb);
        cut = static_cast<double>(ncr_cap()) - 1.0 + kEps;
        if (lb > cut) break;
        reduced_cost_fixing(r, lb, cut);
      }
      if (auto sel = integral_point(r)) {
        if (units_of(*sel) <= cost_cap_ && value_of(*sel) < vub_) {
          adopt_value(*sel);
          continue;
        }
      }
      const Choice c = choose(k, r, lb, cut);
      if (c.fix >= 0) {
        c.in ? fix_in(c.fix) : fix_out(c.fix);
        continue;
      }
      if (c.col >= 0) {
        lp::Engine::Snapshot here;
        lps_[k].engine->save(here);
        const std::size_t m1 = mark();
        fix_in(c.col);
        pending_ = {k, c.col, true, lb, c.frac};
        optimize_value();
        rollback(m1);
        lps_[k].engine->restore(here);
        fix_out(c.col);
        pending_ = {k, c.col, false, lb, c.frac};
        optimize_value();
      }
      break;
    }
    rollback(m0);
  }

  void adopt_value(const std::vector<int>& sel) {
    best_sel_ = sel;
    vub_ = value_of(sel);
  }

  double base(int k) const {
    if (k == 0) return static_cast<double>(fixed_units_);
    return static_cast<double>(k == 1 ? static_cast<std::int64_t>(fixed_.size()) : fixed_ncr());
  }

  // Bound of the child with column j fixed one way: +inf when it is empty,
  // NaN when the LP gave up.
  double probe(int k, int j, bool in) {
    const std::size_t m = mark();
    in ? fix_in(j) : fix_out(j);
    const lp::Result r = solve(k);
    double lb = std::numeric_limits<double>::quiet_NaN();
    if (r.status == lp::Status::infeasible)
      lb = std::numeric_limits<double>::infinity();
    else if (r.status == lp::Status::optimal)
      lb = base(k) + r.objective;
    rollback(m);
    return lb;
  }

  // Pseudocosts: bound gain per unit of fractionality, per LP and direction.
  struct Pseudo {
    std::vector<double> sum[2];
    std::vector<int> count[2];
    double all_sum[2] = {0.0, 0.0};
    int all_count[2] = {0, 0};
  };
  struct Pending {
    int k = -1;
    int col = -1;
    bool in = false;
    double parent_lb = 0.0;
    double frac = 0.0;  // parent x of col
  };
  void record(int k, int j, bool in, double delta, double x) {
    const double dist = in ? 1.0 - x : x;
    if (!std::isfinite(delta) || dist < 1e-9) return;
    Pseudo& p = pseudo_[k];
    if (p.sum[0].empty())
      for (int d = 0; d < 2; ++d) {
        p.sum[d].assign(cols_.size(), 0.0);
        p.count[d].assign(cols_.size(), 0);
      }
    const double g = std::max(0.0, delta) / dist;
    p.sum[in][static_cast<std::size_t>(j)] += g;
    ++p.count[in][static_cast<std::size_t>(j)];
    p.all_sum[in] += g;
    ++p.all_count[in];
  }
  void note(const Pending& p, double lb) {
    if (p.k >= 0) record(p.k, p.col, p.in, lb - p.parent_lb, p.frac);
  }
  double estimate(int k, std::size_t j, bool in) const {
    const Pseudo& p = pseudo_[k];
    if (!p.sum[0].empty() && p.count[in][j] > 0) return p.sum[in][j] / p.count[in][j];
    return p.all_count[in] > 0 ? p.all_sum[in] / p.all_count[in] : 1.0;
  }
  bool reliable(int k, std::size_t j) const {
    const Pseudo& p = pseudo_[k];
    return !p.sum[0].empty() && p.count[0][j] >= kReliable && p.count[1][j] >= kReliable;
  }

  struct Choice {
    int col = -1;      // branch here
    int fix = -1;      // or fix this column and re-solve
    bool in = false;
    double frac = 0.0;
  };

  // Reliability branching. Columns with thin pseudocost history are probed
  // with both children; a child past `cut` turns the probe into a fixing.
  Choice choose(int k, const lp::Result& r, double lb, double cut) {
    Choice out;
    if (r.status != lp::Status::optimal) {
      out.col = pick(r);
      out.frac = 0.5;
      return out;
    }
    std::vector<std::pair<double, int>> cand;
    auto score = [](double a, double b) { return std::max(a, 1e-6) * std::max(b, 1e-6); };
    for (std::size_t j = 0; j < cols_.size(); ++j) {
      const double x = r.x[j];
      if (!usable(j) || x <= kEps || x >= 1.0 - kEps) continue;
      cand.emplace_back(-score(estimate(k, j, true) * (1.0 - x), estimate(k, j, false) * x), static_cast<int>(j));
    }
    if (cand.empty()) {
      out.col = pick(r);
      out.frac = 0.5;
      return out;
    }
    std::sort(cand.begin(), cand.end());
    lp::Engine& eng = *lps_[k].engine;
    eng.save(snap_);
    double best = -1.0;
    int probes = 0, stale = 0;
    for (const auto& [neg, jj] : cand) {
      const auto j = static_cast<std::size_t>(jj);
      const double x = r.x[j];
      double up = estimate(k, j, true) * (1.0 - x), down = estimate(k, j, false) * x;
      bool probed = false;
      if (!reliable(k, j) && probes < kMaxProbes) {
        ++probes;
        probed = true;
        const double lin = probe(k, jj, true);
        eng.restore(snap_);
        const double lout = probe(k, jj, false);
        eng.restore(snap_);
        record(k, jj, true, lin - lb, x);
        record(k, jj, false, lout - lb, x);
        if (lin > cut) {
          out.fix = jj;
          out.in = false;
          return out;
        }
        if (lout > cut) {
          out.fix = jj;
          out.in = true;
          return out;
        }
        if (!std::isnan(lin)) up = lin - lb;
        if (!std::isnan(lout)) down = lout - lb;
      }
      const double sc = score(up, down);
      if (sc > best) {
        best = sc;
        out.col = jj;
        out.frac = x;
        stale = 0;
      } else if (probed && ++stale >= kLookahead) {
        break;
      }
    }
    return out;
  }

  // Most fractional usable column; otherwise the best coverage per cost.
  int pick(const lp::Result& r) const {
    auto gain = [&](std::size_t j) {
      int g = 0;
      for (int i : cols_[j].rows) g += residual_[static_cast<std::size_t>(i)] > 0 ? 1 : 0;
      return g + (site_forced_[static_cast<std::size_t>(col_site_[j])] ? 1 : 0);
    };
    auto better = [&](std::size_t a, std::size_t b, bool by_fraction) {
      if (by_fraction) {
        const double fa = std::abs(r.x[a] - 0.5), fb = std::abs(r.x[b] - 0.5);
        if (std::abs(fa - fb) > 1e-9) return fa < fb;
      }
      const double ea = gain(a) / static_cast<double>(units_[a]);
      const double eb = gain(b) / static_cast<double>(units_[b]);
      if (ea != eb) return ea > eb;
      return std::tie(cols_[a].site_id, cols_[a].device) < std::tie(cols_[b].site_id, cols_[b].device);
    };
    int pick = -1;
    if (r.status == lp::Status::optimal)
      for (std::size_t j = 0; j < cols_.size(); ++j)
        if (usable(j) && r.x[j] > kEps && r.x[j] < 1.0 - kEps &&
            (pick < 0 || better(j, static_cast<std::size_t>(pick), true)))
          pick = static_cast<int>(j);
    if (pick < 0)
      for (std::size_t j = 0; j < cols_.size(); ++j)
        if (usable(j) && gain(j) > 0 && (pick < 0 || better(j, static_cast<std::size_t>(pick), false)))
          pick = static_cast<int>(j);
    return pick;
  }

  bool forced_sites_used(const std::vector<int>& sel) const {
    std::vector<char> used(site_ids_.size(), 0);
    for (int j : sel) used[static_cast<std::size_t>(col_site_[static_cast<std::size_t>(j)])] = 1;
    for (std::size_t s = 0; s < site_ids_.size(); ++s)
      if (site_forced_[s] && !used[s]) return false;
    return true;
  }
  bool ties(const std::vector<int>& sel) const {
    return units_of(sel) <= cost_cap_ && value_of(sel) <= vub_ && forced_sites_used(sel);
  }

  // Any selection at the optimal cost and value that honours the current
  // fixings; stored in best_sel_. Leaves the search state as it found it.
  bool find_tie() {
    tick();
    const Pending pend = std::exchange(pending_, Pending{});
    const std::size_t m0 = mark();
    const double cut = static_cast<double>(ncr_cap()) + kEps;
    bool ok = false;
    for (bool first = true;; first = false) {
      if (covered() && forced_sites_used(fixed_)) {
        ok = ties(fixed_);
        if (ok) best_sel_ = fixed_;
        break;
      }
      const lp::Result r = solve(2);
      if (r.status == lp::Status::infeasible) break;
      const double lb = base(2) + r.objective;
      if (first) note(pend, lb);
      if (lb > cut) break;
      reduced_cost_fixing(r, lb, cut);
      if (auto sel = integral_point(r); sel && ties(*sel)) {
        best_sel_ = *sel;
        ok = true;
        break;
      }
      const Choice c = choose(2, r, lb, cut);
      if (c.fix >= 0) {
        c.in ? fix_in(c.fix) : fix_out(c.fix);
        continue;
      }
      if (c.col < 0) break;
      lp::Engine::Snapshot here;
      lps_[2].engine->save(here);
      const std::size_t m1 = mark();
      fix_in(c.col);
      pending_ = {2, c.col, true, lb, c.frac};
      ok = find_tie();
      if (!ok) {
        rollback(m1);
        lps_[2].engine->restore(here);
        fix_out(c.col);
        pending_ = {2, c.col, false, lb, c.frac};
        ok = find_tie();
      }
      break;
    }
    rollback(m0);
    return ok;
  }

  void force_site(std::size_t s) {
    log_.push_back({Step::force, 0, s, 0.0});
    site_forced_[s] = 1;
    int only = -1, usable_count = 0;
    for (int j : site_cols_[s])
      if (usable(static_cast<std::size_t>(j))) {
        only = j;
        ++usable_count;
      }
    if (usable_count == 1)
      fix_in(only);
    else
      for (int k = 1; k < 3; ++k) set_demand(k, static_cast<std::size_t>(lps_[k].site_row[s]), 1.0);
  }
  void close_site(std::size_t s) {
    for (int k = 0; k < 3; ++k) set_capacity(k, s, 0.0);
  }

  // Smallest site list, then smallest device choice, among the ties. A site
  // belongs to the answer exactly when some tie keeps the decisions made so
  // far and includes it.
  void lex_pass() {
    const std::size_t S = site_ids_.size();
    std::vector<int> inc(S, -1);
    auto load = [&] {
      inc.assign(S, -1);
      for (int j : best_sel_) inc[static_cast<std::size_t>(col_site_[static_cast<std::size_t>(j)])] = j;
    };
    load();
    int forced = 0;
    for (std::size_t s = 0; s < S; ++s) {
      if (forced == target_installs_) {
        close_site(s);
        continue;
      }
      const bool open = std::any_of(site_cols_[s].begin(), site_cols_[s].end(),
                                    [&](int j) { return usable(static_cast<std::size_t>(j)); });
      if (inc[s] < 0 && open) {
        const std::size_t m0 = mark();
        force_site(s);
        const bool ok = find_tie();
        rollback(m0);
        if (ok) load();
      }
      if (inc[s] >= 0) {
        force_site(s);
        ++forced;
      } else {
        close_site(s);
      }
    }
    for (std::size_t s = 0; s < S; ++s) {
      if (!site_forced_[s] || site_used_[s]) continue;
      for (int j : site_cols_[s]) {
        if (j == inc[s]) {
          fix_in(j);
          break;
        }
        if (!usable(static_cast<std::size_t>(j))) continue;
        const std::size_t m0 = mark();
        fix_in(j);
        const bool ok = find_tie();
        rollback(m0);
        if (ok) {
          load();
          fix_in(j);
          break;
        }
        fix_out(j);
      }
    }
    if (!covered() || !ties(fixed_)) throw std::logic_error("tie-break pass lost the optimum");
    best_sel_ = fixed_;
  }

  std::vector<Reduced::Col> cols_;
  std::vector<int> residual_;
  std::vector<int> residual0_;
  long node_limit_ = -1;
  std::vector<int> site_ids_;
  std::vector<int> col_site_;
  std::vector<std::vector<int>> site_cols_;
  std::vector<std::int64_t> units_;
  std::int64_t W_ = 1;

  std::vector<Status> status_;
  std::vector<char> site_used_;
  std::vector<char> site_forced_;
  std::vector<int> fixed_;
  std::int64_t fixed_units_ = 0;
  std::int64_t fixed_value_ = 0;
  std::vector<Step> log_;
  Relaxation lps_[3];

  bool have_ = false;
  std::int64_t ub_ = 0;
  std::int64_t cost_cap_ = 0;
  std::int64_t vub_ = 0;
  int target_installs_ = 0;
  std::vector<int> best_sel_;
  Pseudo pseudo_[3];
  lp::Engine::Snapshot snap_;
  Pending pending_;
  long nodes_ = 0;
  long lp_solves_ = 0;
  long pivots_ = 0;
};

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> parent;
};

}  // namespace detail

// Exact solver: dominance reductions, independent components, then LP-bounded
// branch and bound per component.
inline Plan plan_min_cost(const PlanningInstance& inst, const PlannerOptions& opt = {}) {
  inst.validate();
  const FeasibilityReport fr = check_feasibility(inst);
  if (!fr.feasible) return infeasible_plan(inst, fr.uncoverable);

  detail::Reduced red;
  std::vector<int> row_of(static_cast<std::size_t>(inst.tp_count), -1);
  for (int t = 0; t < inst.tp_count; ++t) {
    const int res = inst.K - inst.bs_delta[static_cast<std::size_t>(t)];
    if (res > 0) {
      row_of[static_cast<std::size_t>(t)] = static_cast<int>(red.residual.size());
      red.residual.push_back(res);
      red.row_tp.push_back(t);
    }
  }
  for (std::size_t j = 0; j < inst.columns.size(); ++j) {
    const auto& c = inst.columns[j];
    detail::Reduced::Col rc;
    rc.orig = static_cast<int>(j);
    rc.site_id = c.site_id;
    rc.device = c.device;
    rc.ncr = c.kind == DeviceKind::ncr;
    rc.units = cost_units(c.cost);
    for (int t : c.tps)
      if (row_of[static_cast<std::size_t>(t)] >= 0) rc.rows.push_back(row_of[static_cast<std::size_t>(t)]);
    if (!rc.rows.empty()) red.cols.push_back(std::move(rc));
  }
  if (opt.preprocess)
    while (detail::reduce_once(red)) {
    }

  Plan plan;
  // Components linked by shared rows or shared sites.
  const std::size_t n = red.cols.size();
  detail::UnionFind uf(n);
  {
    std::vector<int> first_for_row(red.residual.size(), -1);
    std::map<int, std::size_t> first_for_site;
    for (std::size_t j = 0; j < n; ++j) {
      for (int i : red.cols[j].rows) {
        auto& f = first_for_row[static_cast<std::size_t>(i)];
        if (f < 0)
          f = static_cast<int>(j);
        else
          uf.unite(static_cast<std::size_t>(f), j);
      }
      auto [it, inserted] = first_for_site.emplace(red.cols[j].site_id, j);
      if (!inserted) uf.unite(it->second, j);
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> comp_cols;
  for (std::size_t j = 0; j < n; ++j) comp_cols[uf.find(j)].push_back(j);

  struct Job {
    std::vector<detail::Reduced::Col> cols;
    std::vector<int> residual;
    std::vector<int> tps;
  };
  std::vector<Job> jobs;
  for (auto& [root, members] : comp_cols) {
    Job job;
    std::map<int, int> local_row;
    for (std::size_t j : members)
      for (int i : red.cols[j].rows) local_row.emplace(i, 0);
    int next = 0;
    for (auto& [i, l] : local_row) {
      l = next++;
      job.residual.push_back(red.residual[static_cast<std::size_t>(i)]);
      job.tps.push_back(red.row_tp[static_cast<std::size_t>(i)]);
    }
    for (std::size_t j : members) {
      detail::Reduced::Col c = red.cols[j];
      for (int& i : c.rows) i = local_row[i];
      job.cols.push_back(std::move(c));
    }
    jobs.push_back(std::move(job));
  }

  std::vector<detail::ComponentResult> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  detail::parallel_for(jobs.size(), opt.threads, [&](std::size_t k) {
    try {
      detail::BranchAndBound bb(jobs[k].cols, jobs[k].residual, opt.node_limit);
      results[k] = bb.run();
    } catch (...) {
      errors[k] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  // Every point has enough coverers on its own, but the one-device-per-site
  // rule can still make a group of points jointly unsatisfiable.
  std::vector<int> stuck;
  for (std::size_t k = 0; k < jobs.size(); ++k)
    if (!results[k].found) stuck.insert(stuck.end(), jobs[k].tps.begin(), jobs[k].tps.end());
  if (!stuck.empty()) {
    std::sort(stuck.begin(), stuck.end());
    return infeasible_plan(inst, stuck);
  }

  std::vector<int> selection;
  for (const auto& r : results) {
    selection.insert(selection.end(), r.selection.begin(), r.selection.end());
    plan.stats.nodes += r.nodes;
    plan.stats.lp_solves += r.lp_solves;
    plan.stats.pivots += r.pivots;
  }
  const SolveStats stats{plan.stats.nodes, plan.stats.lp_solves, plan.stats.pivots, static_cast<int>(jobs.size()),
                         static_cast<int>(red.residual.size()), static_cast<int>(red.cols.size())};
  plan = make_plan(inst, selection);
  plan.stats = stats;
  for (int t = 0; t < inst.tp_count; ++t)
    if (plan.coverage_count[static_cast<std::size_t>(t)] < inst.K)
      throw std::logic_error("planner produced a plan violating the coverage constraint");
  return plan;
}

}  // namespace sre
