#pragma once

// Array geometry, element patterns, array responses and narrowband MIMO
// channels built from explicit path lists.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "sre/scene.hpp"

namespace sre {

using cd = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = std::numbers::pi;

inline double wavelength(double f0) { return kSpeedOfLight / f0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  return a;
}

enum class ElementPattern { isotropic, sector3gpp, cosine };

// Local frame: boresight +x, y to the left, z up. Columns map local axes to world.
using Orientation = Eigen::Matrix3d;

inline Orientation orientation_from_boresight(const Eigen::Vector3d& boresight) {
  const Eigen::Vector3d x = boresight.normalized();
  Eigen::Vector3d y = Eigen::Vector3d::UnitZ().cross(x);
  if (y.norm() < 1e-12) y = Eigen::Vector3d::UnitY();
  y.normalize();
  const Eigen::Vector3d z = x.cross(y);
  Orientation r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return r;
}

inline Orientation orientation_from_azimuth(double azimuth, double tilt = 0.0) {
  return orientation_from_boresight(
      Eigen::Vector3d(std::cos(tilt) * std::cos(azimuth), std::cos(tilt) * std::sin(azimuth), std::sin(tilt)));
}

struct Angles {
  double azimuth = 0.0;    // ϑ
  double elevation = 0.0;  // φ
};

// Direction of a world vector expressed as (azimuth, elevation) in a local frame.
inline Angles local_angles(const Orientation& frame, const Eigen::Vector3d& world_dir) {
  const Eigen::Vector3d l = frame.transpose() * world_dir.normalized();
  return {std::atan2(l.y(), l.x()), std::asin(std::clamp(l.z(), -1.0, 1.0))};
}

struct ArrayGeometry {
  std::vector<Eigen::Vector3d> element_positions;  // local frame, meters
  Orientation orientation = Orientation::Identity();
  ElementPattern pattern = ElementPattern::isotropic;

  std::size_t size() const { return element_positions.size(); }
};

// Planar array in the local y-z plane, centred on the origin.
inline ArrayGeometry make_upa(int horizontal, int vertical, double spacing, ElementPattern pattern,
                              const Orientation& orientation = Orientation::Identity()) {
  if (horizontal < 1 || vertical < 1) throw std::invalid_argument("array needs at least one element");
  ArrayGeometry g;
  g.pattern = pattern;
  g.orientation = orientation;
  g.element_positions.reserve(static_cast<std::size_t>(horizontal) * static_cast<std::size_t>(vertical));
  const double cy = 0.5 * (horizontal - 1);
  const double cz = 0.5 * (vertical - 1);
  for (int v = 0; v < vertical; ++v)
    for (int h = 0; h < horizontal; ++h)
      g.element_positions.emplace_back(0.0, (h - cy) * spacing, (v - cz) * spacing);
  return g;
}

inline Eigen::Vector3d wave_vector(double azimuth, double elevation, double lambda) {
  const double k = 2.0 * kPi / lambda;
  return k * Eigen::Vector3d(std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
                             std::sin(elevation));
}

inline CVector array_response(const ArrayGeometry& geom, double azimuth, double elevation, double lambda) {
  const Eigen::Vector3d k = wave_vector(azimuth, elevation, lambda);
  CVector a(static_cast<Eigen::Index>(geom.size()));
  for (std::size_t l = 0; l < geom.size(); ++l) a[static_cast<Eigen::Index>(l)] = std::polar(1.0, k.dot(geom.element_positions[l]));
  return a;
}

// Linear power gain of one element toward a local direction.
inline double element_gain(ElementPattern pattern, double azimuth, double elevation) {
  switch (pattern) {
    case ElementPattern::isotropic:
      return 1.0;
    case ElementPattern::sector3gpp: {
      // TR 38.901 Table 7.3-1: 65 deg HPBW, 30 dB limits, 8 dBi peak.
      const double az_deg = wrap_angle(azimuth) * 180.0 / kPi;
      const double el_deg = elevation * 180.0 / kPi;
      const double a_h = -std::min(12.0 * (az_deg / 65.0) * (az_deg / 65.0), 30.0);
      const double a_v = -std::min(12.0 * (el_deg / 65.0) * (el_deg / 65.0), 30.0);
      const double a = -std::min(-(a_h + a_v), 30.0);
      return db_to_linear(8.0 + a);
    }
    case ElementPattern::cosine:
      return std::max(0.0, std::cos(elevation) * std::cos(azimuth));
  }
  return 0.0;
}

struct Path {
  cd amplitude{1.0, 0.0};
  double azimuth_tx = 0.0;
  double elevation_tx = 0.0;
  double azimuth_rx = 0.0;
  double elevation_rx = 0.0;
  double length = 0.0;
};

// H = sum_p (a_p / sqrt(P)) sqrt(g_r g_t) a_r a_t^H, dimensions rx x tx.
inline CMatrix build_channel(const ArrayGeometry& tx, const ArrayGeometry& rx, std::span<const Path> paths,
                             double lambda) {
  if (paths.empty()) throw std::invalid_argument("channel needs at least one path");
  CMatrix h = CMatrix::Zero(static_cast<Eigen::Index>(rx.size()), static_cast<Eigen::Index>(tx.size()));
  const double norm = 1.0 / std::sqrt(static_cast<double>(paths.size()));
  for (const Path& p : paths) {
    const double gain = std::sqrt(element_gain(rx.pattern, p.azimuth_rx, p.elevation_rx) *
                                  element_gain(tx.pattern, p.azimuth_tx, p.elevation_tx));
    const CVector ar = array_response(rx, p.azimuth_rx, p.elevation_rx, lambda);
    const CVector at = array_response(tx, p.azimuth_tx, p.elevation_tx, lambda);
    h.noalias() += (p.amplitude * norm * gain) * ar * at.adjoint();
  }
  return h;
}

// Deterministic free-space LoS path between two oriented arrays.
inline Path geometric_path(const Point3& tx_pos, const Point3& rx_pos, double f0, const Orientation& tx_orient,
                           const Orientation& rx_orient) {
  const Eigen::Vector3d d = rx_pos - tx_pos;
  const double dist = d.norm();
  if (!(dist > 0.0)) throw std::invalid_argument("path endpoints coincide");
  const double lambda = wavelength(f0);
  Path p;
  p.length = dist;
  p.amplitude = std::polar(lambda / (4.0 * kPi * dist), -2.0 * kPi * dist / lambda);
  const Angles dep = local_angles(tx_orient, d);
  const Angles arr = local_angles(rx_orient, -d);
  p.azimuth_tx = dep.azimuth;
  p.elevation_tx = dep.elevation;
  p.azimuth_rx = arr.azimuth;
  p.elevation_rx = arr.elevation;
  return p;
}

struct RisConfig {
  std::vector<double> phases;  // [0, 2pi)

  std::size_t size() const { return phases.size(); }

  CVector coefficients() const {
    CVector c(static_cast<Eigen::Index>(phases.size()));
    for (std::size_t m = 0; m < phases.size(); ++m) c[static_cast<Eigen::Index>(m)] = std::polar(1.0, phases[m]);
    return c;
  }
};

// Co-phases every reflected component: h_out,m e^{j phi_m} h_in,m becomes real and non-negative.
inline RisConfig ris_phase_config(const CVector& h_in, const CVector& h_out) {
  if (h_in.size() != h_out.size()) throw std::invalid_argument("RIS channel vectors differ in length");
  RisConfig cfg;
  cfg.phases.resize(static_cast<std::size_t>(h_in.size()));
  for (Eigen::Index m = 0; m < h_in.size(); ++m) {
    double phi = -(std::arg(h_in[m]) + std::arg(h_out[m]));
    phi = std::fmod(phi, 2.0 * kPi);
    if (phi < 0.0) phi += 2.0 * kPi;
    if (phi >= 2.0 * kPi) phi = 0.0;
    cfg.phases[static_cast<std::size_t>(m)] = phi;
  }
  return cfg;
}

inline cd ris_cascade(const CVector& h_in, const CVector& h_out, const RisConfig& cfg) {
  return (h_out.array() * cfg.coefficients().array() * h_in.array()).sum();
}

// f = sqrt(n) conj(s) / |s|, so that s^T f = sqrt(n) |s|.
inline CVector mrt_beamformer(const CVector& steering, std::size_t n) {
  const double norm = steering.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("steering vector is zero");
  return steering.conjugate() * (std::sqrt(static_cast<double>(n)) / norm);
}

struct NcrConfig {
  int elements_per_panel = 72;
  double gain = db_to_linear(55.0);
  double panel_separation = kPi / 2.0;  // stored only; panel orientations drive the geometry
  CVector receive_beam;
  CVector forward_beam;
};

}  // namespace sre
