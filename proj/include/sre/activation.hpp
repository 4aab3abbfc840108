#pragma once

// Activation parameters: which serving entity meets the long-term SNR
// threshold at which test point. Static occlusion of any hop is a hard veto.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "sre/costs.hpp"
#include "sre/link.hpp"
#include "sre/scene.hpp"

namespace sre {

struct ArrayParams {
  int bs_horizontal = 12;
  int bs_vertical = 16;
  std::vector<double> bs_sector_azimuth_deg{30.0, 150.0, 270.0};
  int ncr_horizontal = 12;
  int ncr_vertical = 6;
  int ue_elements = 1;

  int bs_elements() const { return bs_horizontal * bs_vertical; }
  int ncr_elements() const { return ncr_horizontal * ncr_vertical; }

  bool operator==(const ArrayParams&) const = default;
};

// Element gain of the best BS sector toward `target`.
inline double bs_sector_gain(const Point3& bs, const Point3& target, const ArrayParams& arrays) {
  double best = 0.0;
  const Eigen::Vector3d d = target - bs;
  for (double az : arrays.bs_sector_azimuth_deg) {
    const Angles a = local_angles(orientation_from_azimuth(deg_to_rad(az)), d);
    best = std::max(best, element_gain(ElementPattern::sector3gpp, a.azimuth, a.elevation));
  }
  return best;
}

inline bool device_fits_site(const DeviceSpec& d, const CandidateSite& s) {
  return (d.kind == DeviceKind::ris) == (s.kind == SiteKind::wall);
}

inline double horizontal_distance(const Point3& a, const Point3& b) { return (a - b).head<2>().norm(); }

class ActivationMatrix {
 public:
  struct Column {
    int site_index = 0;
    int device = 0;
  };

  ActivationMatrix() = default;
  ActivationMatrix(std::size_t n_tp, std::vector<CandidateSite> sites, std::vector<DeviceSpec> devices)
      : n_tp_(n_tp), sites_(std::move(sites)), devices_(std::move(devices)) {
    lookup_.assign(sites_.size() * devices_.size(), -1);
    for (std::size_t c = 0; c < sites_.size(); ++c)
      for (std::size_t d = 0; d < devices_.size(); ++d)
        if (device_fits_site(devices_[d], sites_[c])) {
          lookup_[c * devices_.size() + d] = static_cast<int>(columns_.size());
          columns_.push_back({static_cast<int>(c), static_cast<int>(d)});
        }
    bs_snr_db_.assign(n_tp_, kVetoed);
    snr_db_.assign(columns_.size() * n_tp_, kVetoed);
    bs_delta_.assign(n_tp_, 0);
    delta_.assign(columns_.size() * n_tp_, 0);
  }

  // NaN marks a vetoed link (occluded or wrong side); it never meets any threshold.
  static constexpr float kVetoed = std::numeric_limits<float>::quiet_NaN();

  std::size_t tp_count() const { return n_tp_; }
  const std::vector<CandidateSite>& sites() const { return sites_; }
  const std::vector<DeviceSpec>& devices() const { return devices_; }
  const std::vector<Column>& columns() const { return columns_; }
  double threshold_db() const { return threshold_db_; }

  int column_index(std::size_t site_index, std::size_t device) const {
    return lookup_[site_index * devices_.size() + device];
  }

  bool bs_delta(std::size_t t) const { return bs_delta_[t] != 0; }
  float bs_snr_db(std::size_t t) const { return bs_snr_db_[t]; }
  bool column_delta(std::size_t col, std::size_t t) const { return delta_[col * n_tp_ + t] != 0; }
  float column_snr_db(std::size_t col, std::size_t t) const { return snr_db_[col * n_tp_ + t]; }

  bool device_delta(std::size_t t, std::size_t site_index, std::size_t device) const {
    const int col = column_index(site_index, device);
    return col >= 0 && column_delta(static_cast<std::size_t>(col), t);
  }
  float device_snr_db(std::size_t t, std::size_t site_index, std::size_t device) const {
    const int col = column_index(site_index, device);
    return col >= 0 ? column_snr_db(static_cast<std::size_t>(col), t) : kVetoed;
  }

  // Swap in new prices for the same physical catalog.
  void reprice(const std::vector<DeviceSpec>& devices) {
    if (devices.size() != devices_.size()) throw std::invalid_argument("catalog size changed");
    for (std::size_t d = 0; d < devices.size(); ++d)
      if (devices[d].kind != devices_[d].kind || devices[d].ris_side != devices_[d].ris_side ||
          devices[d].gain_db != devices_[d].gain_db)
        throw std::invalid_argument("catalog configuration changed");
    devices_ = devices;
  }

  void set_bs_snr(std::size_t t, float db) { bs_snr_db_[t] = db; }
  void set_column_snr(std::size_t col, std::size_t t, float db) { snr_db_[col * n_tp_ + t] = db; }

  // Recomputes every boolean from the stored long-term SNRs.
  void apply_threshold(double gamma_db) {
    threshold_db_ = gamma_db;
    for (std::size_t t = 0; t < n_tp_; ++t) bs_delta_[t] = meets(bs_snr_db_[t], gamma_db);
    for (std::size_t i = 0; i < snr_db_.size(); ++i) delta_[i] = meets(snr_db_[i], gamma_db);
  }

  std::vector<int> covered_tps(std::size_t col) const {
    std::vector<int> out;
    for (std::size_t t = 0; t < n_tp_; ++t)
      if (column_delta(col, t)) out.push_back(static_cast<int>(t));
    return out;
  }

 private:
  static std::uint8_t meets(float snr_db, double gamma_db) {
    if (std::isnan(snr_db)) return 0;
    return static_cast<double>(snr_db) >= gamma_db ? 1 : 0;
  }

  std::size_t n_tp_ = 0;
  std::vector<CandidateSite> sites_;
  std::vector<DeviceSpec> devices_;
  std::vector<Column> columns_;
  std::vector<int> lookup_;
  std::vector<float> bs_snr_db_;
  std::vector<float> snr_db_;
  std::vector<std::uint8_t> bs_delta_;
  std::vector<std::uint8_t> delta_;
  double threshold_db_ = 0.0;
};

struct ActivationInputs {
  const Scene& scene;
  const std::vector<CandidateSite>& sites;
  const std::vector<DeviceSpec>& devices;
  const std::vector<TestPoint>& tps;
  RadioParams radio;
  BlockageParams blockage;
  ArrayParams arrays;
};

namespace detail {

inline float longterm_db(double snr_nominal, double p_block, const BlockageParams& bp) {
  const double lt = long_term_snr(snr_nominal, blocked_snr(snr_nominal, bp.loss_db), p_block);
  return static_cast<float>(linear_to_db(lt));
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned k = 0; k < threads; ++k)
    pool.emplace_back([&, k] {
      for (std::size_t i = k; i < n; i += threads) fn(i);
    });
}

inline void fill_bs_column(ActivationMatrix& am, const ActivationInputs& in) {
  const double lambda = in.radio.lambda();
  const Point3& bs = in.scene.bs_position;
  for (std::size_t t = 0; t < in.tps.size(); ++t) {
    const Point3& tp = in.tps[t].position;
    if ((tp - bs).norm() == 0.0 || segment_occluded(bs, tp, in.scene)) continue;
    const double hop = los::hop_gain((tp - bs).norm(), lambda, bs_sector_gain(bs, tp, in.arrays), 1.0);
    const double snr = los::direct_snr(in.radio, hop, in.arrays.bs_elements(), in.arrays.ue_elements);
    const double pb = blockage_probability(horizontal_distance(bs, tp), bs.z(), tp.z(), in.blockage);
    am.set_bs_snr(t, longterm_db(snr, pb, in.blockage));
  }
}

// All columns of one site. The BS -> site hop is blocker-free by construction
// (both ends well above blocker height); blockage applies to site -> TP only.
inline void fill_site(ActivationMatrix& am, const ActivationInputs& in, std::size_t c) {
  const CandidateSite& site = in.sites[c];
  const double lambda = in.radio.lambda();
  const Point3& bs = in.scene.bs_position;
  const Point3& p = site.position;
  if ((p - bs).norm() == 0.0 || segment_occluded(bs, p, in.scene)) return;
  const Eigen::Vector3d normal(site.outward_normal.x(), site.outward_normal.y(), 0.0);
  const double bs_elem = bs_sector_gain(bs, p, in.arrays);
  const double d_in = (p - bs).norm();

  if (site.kind == SiteKind::wall) {
    if (normal.dot(bs - p) <= 0.0) return;
    const Orientation frame = orientation_from_boresight(normal);
    const Angles a_in = local_angles(frame, bs - p);
    const double hop_in = los::hop_gain(d_in, lambda, bs_elem, element_gain(ElementPattern::cosine, a_in.azimuth, a_in.elevation));
    for (std::size_t t = 0; t < in.tps.size(); ++t) {
      const Point3& tp = in.tps[t].position;
      if (normal.dot(tp - p) <= 0.0) continue;
      if (segment_occluded(p, tp, in.scene)) continue;
      const Angles a_out = local_angles(frame, tp - p);
      const double hop_out = los::hop_gain((tp - p).norm(), lambda,
                                           element_gain(ElementPattern::cosine, a_out.azimuth, a_out.elevation), 1.0);
      const double pb = blockage_probability(horizontal_distance(p, tp), p.z(), tp.z(), in.blockage);
      for (std::size_t d = 0; d < in.devices.size(); ++d) {
        const int col = am.column_index(c, d);
        if (col < 0) continue;
        const double m = static_cast<double>(in.devices[d].elements());
        const double snr = los::ris_snr(in.radio, hop_in, hop_out, m, in.arrays.bs_elements(), in.arrays.ue_elements);
        am.set_column_snr(static_cast<std::size_t>(col), t, longterm_db(snr, pb, in.blockage));
      }
    }
  } else {
    // Receive panel boresight points at the BS: peak element gain on that hop.
    const double ncr_rx_elem = element_gain(ElementPattern::sector3gpp, 0.0, 0.0);
    const double hop_in = los::hop_gain(d_in, lambda, bs_elem, ncr_rx_elem);
    const Orientation fwd = orientation_from_boresight(normal);
    const double np = in.arrays.ncr_elements();
    for (std::size_t t = 0; t < in.tps.size(); ++t) {
      const Point3& tp = in.tps[t].position;
      if (normal.dot(tp - p) <= 0.0) continue;
      if (segment_occluded(p, tp, in.scene)) continue;
      const Angles a_out = local_angles(fwd, tp - p);
      const double hop_out = los::hop_gain((tp - p).norm(), lambda,
                                           element_gain(ElementPattern::sector3gpp, a_out.azimuth, a_out.elevation), 1.0);
      const double pb = blockage_probability(horizontal_distance(p, tp), p.z(), tp.z(), in.blockage);
      for (std::size_t d = 0; d < in.devices.size(); ++d) {
        const int col = am.column_index(c, d);
        if (col < 0) continue;
        const double snr = los::ncr_snr(in.radio, db_to_linear(in.devices[d].gain_db), hop_in, hop_out, np,
                                        in.arrays.bs_elements(), in.arrays.ue_elements);
        am.set_column_snr(static_cast<std::size_t>(col), t, longterm_db(snr, pb, in.blockage));
      }
    }
  }
}

}  // namespace detail

inline ActivationMatrix compute_activation(const ActivationInputs& in, double gamma_db, unsigned threads = 1) {
  ActivationMatrix am(in.tps.size(), in.sites, in.devices);
  detail::fill_bs_column(am, in);
  // Each site writes only its own columns.
  detail::parallel_for(in.sites.size(), threads, [&](std::size_t c) { detail::fill_site(am, in, c); });
  am.apply_threshold(gamma_db);
  return am;
}

inline void write_activation_table(std::ostream& os, const ActivationMatrix& am, const std::vector<TestPoint>& tps) {
  os << "# sre-activation/1 threshold_db=" << am.threshold_db() << "\n";
  os << "tp_id\tsite_id\tdevice\tsnr_db\tdelta\n";
  auto snr = [](float v) { return std::isnan(v) ? std::string("vetoed") : std::to_string(v); };
  for (std::size_t t = 0; t < am.tp_count(); ++t)
    os << tps[t].id << "\tBS\t-\t" << snr(am.bs_snr_db(t)) << '\t' << am.bs_delta(t) << '\n';
  for (std::size_t col = 0; col < am.columns().size(); ++col) {
    const auto& c = am.columns()[col];
    for (std::size_t t = 0; t < am.tp_count(); ++t) {
      const float v = am.column_snr_db(col, t);
      if (std::isnan(v)) continue;
      os << tps[t].id << '\t' << am.sites()[static_cast<std::size_t>(c.site_index)].id << '\t'
         << am.devices()[static_cast<std::size_t>(c.device)].label() << '\t' << snr(v) << '\t'
         << am.column_delta(col, t) << '\n';
    }
  }
}

}  // namespace sre
