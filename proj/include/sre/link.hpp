#pragma once

// Link-level SNR for direct, RIS-reflected and NCR-relayed links, dynamic
// blockage probability and the blockage-weighted long-term SNR.
//
// Power convention: the BS radiates sigma_s^2 in total and the NCR forwards g
// times its received power, whatever the norms of the beamformers. Every
// beamformer therefore enters the SNR through its unit-norm direction.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "sre/phy.hpp"

namespace sre {

struct RadioParams {
  double carrier_hz = 28e9;
  double bandwidth_hz = 200e6;
  double tx_power_dbm = 35.0;
  double noise_dbm = -82.0;
  double ncr_noise_dbm = -82.0;

  double lambda() const { return wavelength(carrier_hz); }
  double tx_power_mw() const { return db_to_linear(tx_power_dbm); }
  double noise_mw() const { return db_to_linear(noise_dbm); }
  double ncr_noise_mw() const { return db_to_linear(ncr_noise_dbm); }

  bool operator==(const RadioParams&) const = default;
};

struct BlockageParams {
  double blocker_height = 1.7;   // m
  double density = 4e-3;         // blockers per m^2
  double velocity = 15.0;        // m/s
  double mean_duration = 5.0;    // s
  double loss_db = 20.0;         // attenuation while blocked

  bool operator==(const BlockageParams&) const = default;
};

struct LinkBudget {
  double snr_nominal_db = -std::numeric_limits<double>::infinity();
  double snr_blocked_db = -std::numeric_limits<double>::infinity();
  double p_block = 0.0;
  double snr_longterm_db = -std::numeric_limits<double>::infinity();
};

struct Terminal {
  Point3 position = Point3::Zero();
  ArrayGeometry array;
};

struct NcrDevice {
  Point3 position = Point3::Zero();
  ArrayGeometry receive_panel;  // faces the BS
  ArrayGeometry forward_panel;  // faces the coverage area
  double gain = db_to_linear(55.0);
};

namespace detail {

struct SingularPair {
  double sigma2 = 0.0;
  CVector left;   // unit norm, rows
  CVector right;  // unit norm, cols
};

// Largest singular value of h with its unit singular vectors.
inline SingularPair dominant_pair(const CMatrix& h) {
  SingularPair sp;
  if (h.rows() == 1) {
    const CVector row = h.row(0).transpose();
    const double n = row.norm();
    sp.sigma2 = n * n;
    sp.left = CVector::Ones(1);
    sp.right = n > 0.0 ? CVector(row.conjugate() / n) : CVector(CVector::Zero(h.cols()));
    return sp;
  }
  if (h.cols() <= h.rows()) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h.adjoint() * h);
    const Eigen::Index k = h.cols() - 1;
    sp.sigma2 = std::max(0.0, es.eigenvalues()[k]);
    sp.right = es.eigenvectors().col(k);
    const CVector hv = h * sp.right;
    const double n = hv.norm();
    sp.left = n > 0.0 ? CVector(hv / n) : CVector(CVector::Zero(h.rows()));
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h * h.adjoint());
    const Eigen::Index k = h.rows() - 1;
    sp.sigma2 = std::max(0.0, es.eigenvalues()[k]);
    sp.left = es.eigenvectors().col(k);
    const CVector hu = h.adjoint() * sp.left;
    const double n = hu.norm();
    sp.right = n > 0.0 ? CVector(hu / n) : CVector(CVector::Zero(h.cols()));
  }
  return sp;
}

struct Beams {
  CVector precoder;  // |f|^2 = cols
  CVector combiner;  // |w|^2 = rows
};

// Precoder via MRT on the dominant right direction, combiner via MRT on the received vector.
inline Beams mrt_beams(const CMatrix& h) {
  const SingularPair sp = dominant_pair(h);
  Beams b;
  if (h.rows() == 1) {
    b.precoder = mrt_beamformer(h.row(0).transpose(), static_cast<std::size_t>(h.cols()));
  } else {
    b.precoder = sp.right * std::sqrt(static_cast<double>(h.cols()));
  }
  const CVector g = h * b.precoder;
  b.combiner = mrt_beamformer(g.conjugate(), static_cast<std::size_t>(h.rows()));
  return b;
}

// |w^H h f|^2 / (|w|^2 |f|^2)
inline double normalized_gain(const CMatrix& h, const Beams& b) {
  const cd y = (b.combiner.adjoint() * h * b.precoder)(0, 0);
  return std::norm(y) / (b.combiner.squaredNorm() * b.precoder.squaredNorm());
}

inline CMatrix los_channel(const Terminal& tx, const Terminal& rx, double f0) {
  const Path p = geometric_path(tx.position, rx.position, f0, tx.array.orientation, rx.array.orientation);
  return build_channel(tx.array, rx.array, std::span<const Path>(&p, 1), wavelength(f0));
}

}  // namespace detail

// Linear SNR of the direct BS -> UE link. With no explicit paths the LoS path is used.
inline double snr_direct(const Terminal& bs, const Terminal& ue, const RadioParams& radio,
                         std::span<const Path> paths = {}) {
  const CMatrix h = paths.empty() ? detail::los_channel(bs, ue, radio.carrier_hz)
                                  : build_channel(bs.array, ue.array, paths, radio.lambda());
  if (h.norm() == 0.0) return 0.0;
  const detail::Beams b = detail::mrt_beams(h);
  return radio.tx_power_mw() * detail::normalized_gain(h, b) / radio.noise_mw();
}

// True when both the BS and the UE lie in front of the surface (local +x).
inline bool ris_front_side(const Terminal& bs, const Terminal& ris, const Terminal& ue) {
  const Eigen::Vector3d n = ris.array.orientation.col(0);
  return n.dot(bs.position - ris.position) > 0.0 && n.dot(ue.position - ris.position) > 0.0;
}

struct RisLinkResult {
  double snr = 0.0;
  RisConfig config;
};

// Linear SNR through a RIS. If `config` is null the co-phasing profile is used.
inline RisLinkResult snr_ris_detailed(const Terminal& bs, const Terminal& ris, const Terminal& ue,
                                      const RadioParams& radio, const RisConfig* config = nullptr) {
  RisLinkResult out;
  if (!ris_front_side(bs, ris, ue)) return out;
  const CMatrix h_in = detail::los_channel(bs, ris, radio.carrier_hz);    // M x Nt
  const CMatrix h_out = detail::los_channel(ris, ue, radio.carrier_hz);   // Nr x M
  if (h_in.norm() == 0.0 || h_out.norm() == 0.0) return out;

  const detail::SingularPair in_pair = detail::dominant_pair(h_in);
  const detail::SingularPair out_pair = detail::dominant_pair(h_out);
  const CVector f = in_pair.right * std::sqrt(static_cast<double>(h_in.cols()));
  const CVector incident = h_in * f;
  const CVector reflected = (out_pair.left.adjoint() * h_out).transpose();
  out.config = config ? *config : ris_phase_config(incident, reflected);
  if (out.config.size() != static_cast<std::size_t>(h_in.rows()))
    throw std::invalid_argument("RIS configuration size does not match the surface");

  const CMatrix h_eff = h_out * (out.config.coefficients().asDiagonal() * h_in);
  const detail::Beams b = detail::mrt_beams(h_eff);
  out.snr = radio.tx_power_mw() * detail::normalized_gain(h_eff, b) / radio.noise_mw();
  return out;
}

inline double snr_ris(const Terminal& bs, const Terminal& ris, const Terminal& ue, const RadioParams& radio,
                      const RisConfig* config = nullptr) {
  return snr_ris_detailed(bs, ris, ue, radio, config).snr;
}

// Amplify-and-forward SNR, NCR noise amplified along with the signal:
// g s |w^H Ho u|^2 |b^H Hi f|^2 / (g v |w^H Ho u|^2 |b|^2 + n |w|^2), unit-norm beams.
inline double ncr_snr_formula(double gain, double tx_power, double ncr_noise, double noise, double second_hop,
                              double first_hop) {
  const double denom = gain * ncr_noise * second_hop + noise;
  return gain * tx_power * second_hop * first_hop / denom;
}

inline double snr_ncr(const Terminal& bs, const NcrDevice& ncr, const Terminal& ue, const RadioParams& radio,
                      NcrConfig* beams_out = nullptr) {
  const Terminal rx{ncr.position, ncr.receive_panel};
  const Terminal tx{ncr.position, ncr.forward_panel};
  const CMatrix h_in = detail::los_channel(bs, rx, radio.carrier_hz);   // Np x Nt
  const CMatrix h_out = detail::los_channel(tx, ue, radio.carrier_hz);  // Nr x Np
  if (h_in.norm() == 0.0 || h_out.norm() == 0.0) return 0.0;

  const detail::SingularPair in_pair = detail::dominant_pair(h_in);
  const double np_in = static_cast<double>(h_in.rows());
  const CVector f = in_pair.right * std::sqrt(static_cast<double>(h_in.cols()));
  const CVector b = in_pair.left * std::sqrt(np_in);
  const detail::Beams fwd = detail::mrt_beams(h_out);
  const CVector& u = fwd.precoder;
  const CVector& w = fwd.combiner;

  const double first = std::norm((b.adjoint() * h_in * f)(0, 0)) / (b.squaredNorm() * f.squaredNorm());
  const double second = std::norm((w.adjoint() * h_out * u)(0, 0)) / (w.squaredNorm() * u.squaredNorm());
  if (beams_out) {
    beams_out->elements_per_panel = static_cast<int>(h_in.rows());
    beams_out->gain = ncr.gain;
    beams_out->receive_beam = b;
    beams_out->forward_beam = u;
  }
  return ncr_snr_formula(ncr.gain, radio.tx_power_mw(), radio.ncr_noise_mw(), radio.noise_mw(), second, first);
}

// Closed forms for a single LoS path with MRT on both ends; `hop` is
// |alpha|^2 g_t g_r of that hop.
namespace los {

inline double hop_gain(double distance, double lambda, double gain_tx, double gain_rx) {
  const double a = lambda / (4.0 * kPi * distance);
  return a * a * gain_tx * gain_rx;
}

inline double direct_snr(const RadioParams& r, double hop, double n_tx, double n_rx) {
  return r.tx_power_mw() * hop * n_tx * n_rx / r.noise_mw();
}

inline double ris_snr(const RadioParams& r, double hop_in, double hop_out, double m, double n_tx, double n_rx) {
  return r.tx_power_mw() * hop_in * hop_out * m * m * n_tx * n_rx / r.noise_mw();
}

inline double ncr_snr(const RadioParams& r, double gain, double hop_in, double hop_out, double n_panel, double n_tx,
                      double n_rx) {
  return ncr_snr_formula(gain, r.tx_power_mw(), r.ncr_noise_mw(), r.noise_mw(), hop_out * n_panel * n_rx,
                         hop_in * n_panel * n_tx);
}

}  // namespace los

// Two-state blockage: blockers cross the low part of the link at rate
// (2/pi) density V r beta and each blockage lasts mean_duration on average.
inline double blockage_probability(double link_length, double tx_height, double rx_height,
                                   const BlockageParams& p) {
  if (link_length < 0.0) throw std::invalid_argument("link length must be non-negative");
  const double hi = std::max(tx_height, rx_height);
  const double lo = std::min(tx_height, rx_height);
  if (p.blocker_height <= lo || link_length == 0.0 || p.density == 0.0 || p.velocity == 0.0) return 0.0;
  const double beta = hi > lo ? std::clamp((p.blocker_height - lo) / (hi - lo), 0.0, 1.0) : 1.0;
  const double rate = (2.0 / kPi) * p.density * p.velocity * link_length * beta;
  if (p.mean_duration <= 0.0) return 0.0;
  const double mu = 1.0 / p.mean_duration;
  return rate / (rate + mu);
}

inline double blocked_snr(double snr_nominal, double loss_db) { return snr_nominal * db_to_linear(-loss_db); }

inline double long_term_snr(double snr_nominal, double snr_blocked, double p_block) {
  if (p_block < 0.0 || p_block > 1.0) throw std::invalid_argument("blockage probability outside [0,1]");
  return p_block * snr_blocked + (1.0 - p_block) * snr_nominal;
}

inline LinkBudget make_link_budget(double snr_nominal, double p_block, const BlockageParams& p) {
  LinkBudget lb;
  const double blocked = blocked_snr(snr_nominal, p.loss_db);
  lb.snr_nominal_db = linear_to_db(snr_nominal);
  lb.snr_blocked_db = linear_to_db(blocked);
  lb.p_block = p_block;
  lb.snr_longterm_db = linear_to_db(long_term_snr(snr_nominal, blocked, p_block));
  return lb;
}

}  // namespace sre
