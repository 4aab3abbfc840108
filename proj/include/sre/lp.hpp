#pragma once

// LP relaxation of a binary covering program with packing side constraints:
//
//   min c'x   s.t.  A x >= b,   P x <= q,   0 <= x <= 1
//
// with A mostly 0/1 cover rows plus a few weighted ones, worked through its
// dual, max b'y - q'theta s.t. A'y - P'theta <= c, y, theta >= 0.
// With c >= 0 the origin is dual feasible. Only b and q change between solves,
// so the last basis stays feasible and every re-solve is a warm primal simplex
// on the dual. The reported objective is recomputed from the dual values
// against the original data, so tableau round-off never inflates the bound.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace sre::lp {

struct PackingRow {
  std::vector<int> columns;
  std::vector<double> coeffs;  // >= 0, same length as columns
  double rhs = 0.0;
};

struct CoverProblem {
  std::vector<double> cost;                  // per column, >= 0
  std::vector<std::vector<int>> cover_rows;  // per column: covered row indices
  std::vector<double> demand;                // per row
  std::vector<PackingRow> packing;
  std::vector<PackingRow> at_least;  // weighted >= rows, numbered after `demand`
};

enum class Status { optimal, infeasible, iteration_limit };

struct Result {
  Status status = Status::iteration_limit;
  // Lower bound on c'x over binary x satisfying the constraints. Valid
  // whenever status != infeasible.
  double objective = 0.0;
  std::vector<double> x;        // filled when optimal
  std::vector<double> reduced;  // per column: forcing x_j = 1 raises the bound by at least this
  long pivots = 0;
};

class Engine {
 public:
  explicit Engine(const CoverProblem& pb, int refresh_every = 256)
      : n_(pb.cost.size()),
        m_(pb.demand.size() + pb.at_least.size()),
        k_(pb.packing.size()),
        width_(m_ + k_ + n_),
        cost_(pb.cost),
        cover_(n_),
        pack_(n_),
        demand_(pb.demand),
        capacity_(k_),
        refresh_every_(refresh_every) {
    for (std::size_t j = 0; j < n_; ++j)
      for (int i : pb.cover_rows[j]) cover_[j].emplace_back(static_cast<std::size_t>(i), 1.0);
    // Tied costs make the dual badly degenerate. The tableau works on slightly
    // spread costs; bounds are still taken against the true ones.
    const double scale = n_ ? *std::max_element(cost_.begin(), cost_.end()) : 0.0;
    for (std::size_t j = 0; j < n_; ++j)
      spread_.push_back(cost_[j] + scale * 1e-9 * static_cast<double>(1 + (j * 7919) % 997));
    for (std::size_t w = 0; w < pb.at_least.size(); ++w) {
      const auto& row = pb.at_least[w];
      demand_.push_back(row.rhs);
      for (std::size_t e = 0; e < row.columns.size(); ++e)
        cover_[static_cast<std::size_t>(row.columns[e])].emplace_back(pb.demand.size() + w, row.coeffs[e]);
    }
    for (std::size_t r = 0; r < k_; ++r) {
      const auto& row = pb.packing[r];
      capacity_[r] = row.rhs;
      for (std::size_t e = 0; e < row.columns.size(); ++e)
        pack_[static_cast<std::size_t>(row.columns[e])].emplace_back(r, row.coeffs[e]);
    }
  }

  std::size_t columns() const { return n_; }
  double demand(std::size_t i) const { return demand_[i]; }
  double capacity(std::size_t r) const { return capacity_[r]; }
  void set_demand(std::size_t i, double b) { demand_[i] = b; }
  void set_capacity(std::size_t r, double q) { capacity_[r] = q; }

  // Tableau state, for returning to a known basis after trial solves.
  struct Snapshot {
    std::vector<double> tab, rhs;
    std::vector<std::size_t> basis;
  };
  void save(Snapshot& s) const {
    s.tab = tab_;
    s.rhs = rhs_;
    s.basis = basis_;
  }
  void restore(const Snapshot& s) {
    if (s.basis.empty()) return;
    tab_ = s.tab;
    rhs_ = s.rhs;
    basis_ = s.basis;
  }

  Result solve(long max_pivots = -1) {
    Result res;
    if (n_ == 0) {
      const bool ok = std::all_of(demand_.begin(), demand_.end(), [](double b) { return b <= 0.0; });
      res.status = ok ? Status::optimal : Status::infeasible;
      return res;
    }
    if (max_pivots < 0) max_pivots = 50 * static_cast<long>(width_) + 1000;
    const bool warm = !tab_.empty() && solves_ < refresh_every_;
    if (!warm) rebuild();
    ++solves_;
    reprice();
    // A warm basis can stall in degenerate pivots that a clean start never
    // meets, so it only gets a slice of the budget.
    const long warm_budget = warm ? std::min(max_pivots, 2 * static_cast<long>(width_)) : max_pivots;
    res.status = iterate(res.pivots, warm_budget);
    const bool stalled = warm && res.status == Status::iteration_limit;
    if (stalled || (res.status == Status::infeasible && !certified())) {
      // A long warm chain can drift; retry from a clean tableau.
      rebuild();
      reprice();
      long more = 0;
      res.status = iterate(more, max_pivots);
      res.pivots += more;
      if (res.status == Status::infeasible) return res;
    }
    finish(res);
    return res;
  }

 private:
  void rebuild() {
    tab_.assign(n_ * width_, 0.0);
    rhs_ = spread_;
    basis_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      double* row = &tab_[j * width_];
      for (const auto& [i, a] : cover_[j]) row[i] = a;
      for (const auto& [r, p] : pack_[j]) row[m_ + r] = -p;
      row[m_ + k_ + j] = 1.0;
      basis_[j] = m_ + k_ + j;
    }
    solves_ = 0;
  }

  double objective_coeff(std::size_t v) const {
    if (v < m_) return demand_[v];
    if (v < m_ + k_) return -capacity_[v - m_];
    return 0.0;
  }

  void reprice() {
    red_.assign(width_, 0.0);
    for (std::size_t v = 0; v < m_ + k_; ++v) red_[v] = -objective_coeff(v);
    for (std::size_t r = 0; r < n_; ++r) {
      const double cb = objective_coeff(basis_[r]);
      if (cb == 0.0) continue;
      const double* row = &tab_[r * width_];
      for (std::size_t v = 0; v < width_; ++v) red_[v] += cb * row[v];
    }
    for (std::size_t r = 0; r < n_; ++r) red_[basis_[r]] = 0.0;
  }

  Status iterate(long& pivots, long max_pivots) {
    constexpr double kTol = 1e-9;
    long stall = 0;
    bool bland = false;
    std::vector<std::size_t> nz;
    nz.reserve(width_);
    for (;;) {
      std::size_t enter = width_;
      double best = -kTol;
      for (std::size_t v = 0; v < width_; ++v) {
        if (red_[v] < best) {
          enter = v;
          if (bland) break;
          best = red_[v];
        }
      }
      if (enter == width_) return Status::optimal;
      if (pivots >= max_pivots) return Status::iteration_limit;

      std::size_t leave = n_;
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n_; ++j) {
        const double a = tab_[j * width_ + enter];
        if (a > kTol) {
          const double r = std::max(rhs_[j], 0.0) / a;
          // Ties go to the smallest basic variable index.
          if (leave == n_ || r < ratio - 1e-12 || (r <= ratio + 1e-12 && basis_[j] < basis_[leave])) {
            ratio = std::min(ratio, r);
            leave = j;
          }
        }
      }
      if (leave == n_) {
        ray_ = enter;
        return Status::infeasible;  // dual unbounded
      }
      if (ratio <= 1e-12) {
        if (++stall > 50) bland = true;
      } else {
        stall = 0;
      }

      double* prow = &tab_[leave * width_];
      const double piv = prow[enter];
      nz.clear();
      for (std::size_t v = 0; v < width_; ++v) {
        if (prow[v] != 0.0) {
          prow[v] /= piv;
          nz.push_back(v);
        }
      }
      rhs_[leave] /= piv;
      prow[enter] = 1.0;
      for (std::size_t j = 0; j < n_; ++j) {
        if (j == leave) continue;
        double* row = &tab_[j * width_];
        const double f = row[enter];
        if (f == 0.0) continue;
        for (std::size_t v : nz) row[v] -= f * prow[v];
        row[enter] = 0.0;
        rhs_[j] -= f * rhs_[leave];
      }
      const double f = red_[enter];
      for (std::size_t v : nz) red_[v] -= f * prow[v];
      red_[enter] = 0.0;
      basis_[leave] = enter;
      ++pivots;
    }
  }

  // Farkas check of the unbounded dual ray against the original data: a
  // direction d >= 0 with b'd_y - q'd_theta above what any 0 <= x <= 1 can
  // offset through A'd_y - P'd_theta proves the covering program infeasible.
  bool certified() const {
    std::vector<double> d(m_ + k_, 0.0);
    if (ray_ < m_ + k_) d[ray_] = 1.0;
    for (std::size_t r = 0; r < n_; ++r)
      if (basis_[r] < m_ + k_) d[basis_[r]] = std::max(0.0, -tab_[r * width_ + ray_]);
    double gain = 0.0;
    for (std::size_t v = 0; v < m_ + k_; ++v) gain += objective_coeff(v) * d[v];
    double slack = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      double a = 0.0;
      for (const auto& [i, w] : cover_[j]) a += w * d[i];
      for (const auto& [r, p] : pack_[j]) a -= p * d[m_ + r];
      slack += std::max(0.0, a);
    }
    return gain > slack + 1e-7;
  }

  void finish(Result& res) const {
    std::vector<double> dual(m_ + k_, 0.0);
    for (std::size_t r = 0; r < n_; ++r)
      if (basis_[r] < m_ + k_) dual[basis_[r]] = std::max(0.0, rhs_[r]);
    double z = 0.0;
    for (std::size_t v = 0; v < m_ + k_; ++v) z += objective_coeff(v) * dual[v];
    res.reduced.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      double a = 0.0;
      for (const auto& [i, w] : cover_[j]) a += w * dual[i];
      for (const auto& [r, p] : pack_[j]) a -= p * dual[m_ + r];
      const double d = cost_[j] - a;
      if (d < 0.0)
        z += d;  // x_j <= 1
      else
        res.reduced[j] = d;
    }
    res.objective = z;
    if (res.status == Status::optimal) {
      res.x.resize(n_);
      for (std::size_t j = 0; j < n_; ++j) res.x[j] = std::max(0.0, red_[m_ + k_ + j]);
    }
  }

  std::size_t n_, m_, k_, width_;
  std::vector<double> cost_, spread_;
  std::vector<std::vector<std::pair<std::size_t, double>>> cover_, pack_;
  std::vector<double> demand_, capacity_;
  int refresh_every_;
  int solves_ = 0;

  // Row j of the tableau is a dual constraint; columns are y, theta, slacks.
  std::vector<double> tab_, rhs_, red_;
  std::vector<std::size_t> basis_;
  std::size_t ray_ = 0;
};

inline Result solve(const CoverProblem& pb, long max_pivots = -1) {
  Engine e(pb);
  return e.solve(max_pivots);
}

}  // namespace sre::lp
