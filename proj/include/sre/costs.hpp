#pragma once

// Device catalog and the affine cost models (relative units, 100x100 RIS = 1).

#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sre {

enum class DeviceKind { ris, ncr };

inline const char* to_string(DeviceKind k) { return k == DeviceKind::ris ? "RIS" : "NCR"; }

struct CostParams {
  double ris_deploy = 0.4;
  double ris_per_atom = 6e-5;
  double ncr_deploy = 0.8;
  double ncr_per_db = 0.04;
  // When set, every NCR is priced at this multiple of the reference RIS price.
  std::optional<double> ncr_price_ratio;

  void validate() const {
    if (ris_deploy < 0 || ris_per_atom < 0 || ncr_deploy < 0 || ncr_per_db < 0)
      throw std::invalid_argument("cost parameters must be non-negative");
    if (ncr_price_ratio && !(*ncr_price_ratio > 0.0)) throw std::invalid_argument("price ratio must be positive");
  }

  bool operator==(const CostParams&) const = default;
};

inline double ris_cost(long elements, const CostParams& p) {
  if (elements < 0) throw std::invalid_argument("RIS element count must be non-negative");
  return p.ris_deploy + p.ris_per_atom * static_cast<double>(elements);
}

inline double ncr_cost(double gain_db, const CostParams& p) {
  if (gain_db < 0.0) throw std::invalid_argument("NCR gain must be non-negative");
  return p.ncr_deploy + p.ncr_per_db * gain_db;
}

struct DeviceSpec {
  DeviceKind kind = DeviceKind::ris;
  int ris_side = 0;      // RIS: sqrt(M)
  double gain_db = 0.0;  // NCR: amplification gain
  double cost = 0.0;

  long elements() const { return static_cast<long>(ris_side) * ris_side; }
  bool is_ncr() const { return kind == DeviceKind::ncr; }

  std::string label() const {
    if (kind == DeviceKind::ris) return "RIS-" + std::to_string(ris_side) + "x" + std::to_string(ris_side);
    char buf[64];
    std::snprintf(buf, sizeof buf, "NCR-%gdB", gain_db);
    return buf;
  }

  bool operator==(const DeviceSpec&) const = default;
};

// Catalog order: RIS sizes as given, then NCR gains as given.
inline std::vector<DeviceSpec> build_catalog(const std::vector<int>& ris_sides, const std::vector<double>& ncr_gains_db,
                                             const CostParams& p, int reference_ris_side = 100) {
  p.validate();
  std::vector<DeviceSpec> out;
  for (int side : ris_sides) {
    if (side < 1) throw std::invalid_argument("RIS side must be at least 1");
    DeviceSpec d;
    d.kind = DeviceKind::ris;
    d.ris_side = side;
    d.cost = ris_cost(d.elements(), p);
    out.push_back(d);
  }
  for (double g : ncr_gains_db) {
    DeviceSpec d;
    d.kind = DeviceKind::ncr;
    d.gain_db = g;
    d.cost = p.ncr_price_ratio ? *p.ncr_price_ratio * ris_cost(static_cast<long>(reference_ris_side) * reference_ris_side, p)
                               : ncr_cost(g, p);
    out.push_back(d);
  }
  for (const auto& d : out)
    if (!(d.cost > 0.0)) throw std::invalid_argument("device cost must be positive");
  return out;
}

}  // namespace sre
