#include <gtest/gtest.h>

#include <random>

#include "sre/phy.hpp"

using namespace sre;

namespace {

constexpr double kF0 = 28e9;

CVector random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v(n);
  for (int i = 0; i < n; ++i) v[i] = cd(g(rng), g(rng));
  return v;
}

}  // namespace

TEST(WaveVector, Boresight) {
  const double lambda = wavelength(kF0);
  const Eigen::Vector3d k = wave_vector(0.0, 0.0, lambda);
  EXPECT_NEAR(k.x(), 2 * kPi / lambda, 1e-9);
  EXPECT_NEAR(k.y(), 0.0, 1e-12);
  EXPECT_NEAR(k.z(), 0.0, 1e-12);
}

TEST(WaveVector, Zenith) {
  const Eigen::Vector3d k = wave_vector(0.3, kPi / 2, 1.0);
  EXPECT_NEAR(k.x(), 0.0, 1e-12);
  EXPECT_NEAR(k.y(), 0.0, 1e-12);
  EXPECT_NEAR(k.z(), 2 * kPi, 1e-12);
}

TEST(WaveVector, HandEvaluation) {
  const double lambda = 299792458.0 / 28e9;
  const Eigen::Vector3d k = wave_vector(kPi / 4, kPi / 6, lambda);
  const double s = 2 * kPi / lambda;
  // cos(pi/6) = sqrt(3)/2, cos(pi/4) = sin(pi/4) = sqrt(2)/2, sin(pi/6) = 1/2
  EXPECT_NEAR(k.x() / s, std::sqrt(3.0) / 2 * std::sqrt(2.0) / 2, 1e-12);
  EXPECT_NEAR(k.y() / s, std::sqrt(3.0) / 2 * std::sqrt(2.0) / 2, 1e-12);
  EXPECT_NEAR(k.z() / s, 0.5, 1e-12);
  EXPECT_NEAR(k.norm(), s, 1e-9);
}

TEST(ArrayResponse, SingleElement) {
  const ArrayGeometry g = make_upa(1, 1, 0.005, ElementPattern::isotropic);
  const CVector a = array_response(g, 0.7, 0.2, 0.01);
  ASSERT_EQ(a.size(), 1);
  EXPECT_NEAR(std::abs(a[0] - cd(1, 0)), 0.0, 1e-15);
}

TEST(ArrayResponse, OrthogonalProjectionsGiveOnes) {
  // UPA in the y-z plane seen from boresight.
  const ArrayGeometry g = make_upa(4, 3, 0.005, ElementPattern::isotropic);
  const CVector a = array_response(g, 0.0, 0.0, 0.01);
  for (Eigen::Index i = 0; i < a.size(); ++i) EXPECT_NEAR(std::abs(a[i] - cd(1, 0)), 0.0, 1e-12);
}

TEST(ArrayResponse, HalfWavelengthPair) {
  const double lambda = 0.01;
  ArrayGeometry g;
  g.element_positions = {{0, 0, 0}, {0, lambda / 2, 0}};
  const CVector a = array_response(g, kPi / 2, 0.0, lambda);
  EXPECT_NEAR(std::arg(a[0]), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(std::arg(a[1])), kPi, 1e-9);
}

TEST(ArrayResponse, UnitModulus) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  const ArrayGeometry g = make_upa(12, 16, 0.0053, ElementPattern::sector3gpp);
  for (int i = 0; i < 20; ++i) {
    const CVector a = array_response(g, ang(rng), ang(rng) / 2, 0.0107);
    EXPECT_NEAR(a.squaredNorm(), 192.0, 1e-9);
    for (Eigen::Index l = 0; l < a.size(); ++l) EXPECT_NEAR(std::abs(a[l]), 1.0, 1e-12);
  }
}

TEST(ElementGain, Examples) {
  EXPECT_NEAR(element_gain(ElementPattern::sector3gpp, 0, 0), std::pow(10.0, 0.8), 1e-12);
  EXPECT_NEAR(element_gain(ElementPattern::sector3gpp, 0, 0), 6.309573, 1e-6);
  EXPECT_NEAR(element_gain(ElementPattern::cosine, kPi / 2, 0), 0.0, 1e-15);
  EXPECT_NEAR(element_gain(ElementPattern::cosine, 0, kPi / 2), 0.0, 1e-15);
  EXPECT_NEAR(element_gain(ElementPattern::cosine, 0, 0), 1.0, 1e-15);
  EXPECT_EQ(element_gain(ElementPattern::cosine, kPi, 0), 0.0);
  EXPECT_EQ(element_gain(ElementPattern::isotropic, 1.0, -0.5), 1.0);
}

TEST(ElementGain, SectorHalfPowerAndFloor) {
  // 65 deg half-power beamwidth: -3 dB at 32.5 deg off boresight.
  const double hp = element_gain(ElementPattern::sector3gpp, deg_to_rad(32.5), 0);
  EXPECT_NEAR(linear_to_db(hp), 8.0 - 3.0, 1e-9);
  EXPECT_NEAR(linear_to_db(element_gain(ElementPattern::sector3gpp, kPi, 0)), 8.0 - 30.0, 1e-9);
  EXPECT_NEAR(linear_to_db(element_gain(ElementPattern::sector3gpp, 0, deg_to_rad(32.5))), 5.0, 1e-9);
}

TEST(ElementGain, Ranges) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> az(-kPi, kPi), el(-kPi / 2, kPi / 2);
  for (int i = 0; i < 5000; ++i) {
    const double a = az(rng), e = el(rng);
    const double s = element_gain(ElementPattern::sector3gpp, a, e);
    const double c = element_gain(ElementPattern::cosine, a, e);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, std::pow(10.0, 0.8) + 1e-12);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0);
  }
}

TEST(Channel, SingleIsotropicElements) {
  const ArrayGeometry one = make_upa(1, 1, 0.005, ElementPattern::isotropic);
  const Path p;
  const CMatrix h = build_channel(one, one, std::span<const Path>(&p, 1), 0.01);
  ASSERT_EQ(h.rows(), 1);
  ASSERT_EQ(h.cols(), 1);
  EXPECT_NEAR(std::abs(h(0, 0) - cd(1, 0)), 0.0, 1e-15);
}

TEST(Channel, RankOneFrobeniusNorm) {
  const double lambda = wavelength(kF0);
  const ArrayGeometry tx = make_upa(4, 2, lambda / 2, ElementPattern::isotropic);
  const ArrayGeometry rx = make_upa(3, 1, lambda / 2, ElementPattern::isotropic);
  Path p;
  p.amplitude = cd(0.3, -0.4);
  p.azimuth_tx = 0.4;
  p.elevation_tx = -0.1;
  p.azimuth_rx = -0.7;
  p.elevation_rx = 0.2;
  const CMatrix h = build_channel(tx, rx, std::span<const Path>(&p, 1), lambda);
  EXPECT_EQ(h.rows(), 3);
  EXPECT_EQ(h.cols(), 8);
  EXPECT_NEAR(h.squaredNorm(), 0.25 * 8 * 3, 1e-12);
}

TEST(Channel, DuplicatePathScalesBySqrtTwo) {
  const double lambda = wavelength(kF0);
  const ArrayGeometry tx = make_upa(2, 2, lambda / 2, ElementPattern::sector3gpp);
  const ArrayGeometry rx = make_upa(2, 1, lambda / 2, ElementPattern::isotropic);
  Path p;
  p.amplitude = cd(0.1, 0.2);
  p.azimuth_tx = 0.3;
  const std::vector<Path> two{p, p};
  const CMatrix h1 = build_channel(tx, rx, std::span<const Path>(&p, 1), lambda);
  const CMatrix h2 = build_channel(tx, rx, two, lambda);
  EXPECT_NEAR((h2 - 2.0 * h1 / std::sqrt(2.0)).norm(), 0.0, 1e-14);
}

TEST(Channel, LinearInAmplitude) {
  const double lambda = wavelength(kF0);
  const ArrayGeometry tx = make_upa(3, 2, lambda / 2, ElementPattern::sector3gpp);
  const ArrayGeometry rx = make_upa(2, 2, lambda / 2, ElementPattern::isotropic);
  Path a, b;
  a.amplitude = cd(0.5, 0.1);
  a.azimuth_tx = 0.2;
  b.amplitude = cd(-0.2, 0.3);
  b.azimuth_rx = -0.4;
  b.elevation_tx = 0.1;
  const std::vector<Path> ab{a, b};
  Path a3 = a;
  a3.amplitude *= 3.0;
  const std::vector<Path> a3b{a3, b};
  const CMatrix h_ab = build_channel(tx, rx, ab, lambda);
  const CMatrix h_a3b = build_channel(tx, rx, a3b, lambda);
  const std::vector<Path> a_only{a, Path{cd(0, 0)}};
  const CMatrix h_a = build_channel(tx, rx, a_only, lambda);
  EXPECT_NEAR((h_a3b - h_ab - 2.0 * h_a).norm(), 0.0, 1e-13);
  EXPECT_THROW(build_channel(tx, rx, {}, lambda), std::invalid_argument);
}

TEST(GeometricPath, UnitAmplitudeDistance) {
  const double lambda = wavelength(kF0);
  const Path p = geometric_path({0, 0, 0}, {lambda / (4 * kPi), 0, 0}, kF0, Orientation::Identity(),
                                Orientation::Identity());
  EXPECT_NEAR(std::abs(p.amplitude), 1.0, 1e-12);
}

TEST(GeometricPath, HundredMetresAt28GHz) {
  const Path p = geometric_path({0, 0, 0}, {100, 0, 0}, kF0, Orientation::Identity(), Orientation::Identity());
  const double lambda = 299792458.0 / 28e9;
  const double fspl_db = 20 * std::log10(4 * kPi * 100 / lambda);
  EXPECT_NEAR(20 * std::log10(std::abs(p.amplitude)), -fspl_db, 1e-9);
  EXPECT_NEAR(20 * std::log10(std::abs(p.amplitude)), -101.4, 0.05);
  EXPECT_NEAR(std::arg(p.amplitude * std::polar(1.0, 2 * kPi * 100 / lambda)), 0.0, 1e-6);
}

TEST(GeometricPath, ReciprocalSwap) {
  const Orientation ot = orientation_from_azimuth(0.3, 0.1);
  const Orientation orx = orientation_from_azimuth(2.5);
  const Point3 a(1, 2, 10), b(40, -25, 1.5);
  const Path p = geometric_path(a, b, kF0, ot, orx);
  const Path q = geometric_path(b, a, kF0, orx, ot);
  EXPECT_NEAR(std::abs(p.amplitude), std::abs(q.amplitude), 1e-15);
  EXPECT_NEAR(p.azimuth_tx, q.azimuth_rx, 1e-12);
  EXPECT_NEAR(p.elevation_tx, q.elevation_rx, 1e-12);
  EXPECT_NEAR(p.azimuth_rx, q.azimuth_tx, 1e-12);
  EXPECT_NEAR(p.elevation_rx, q.elevation_tx, 1e-12);
  EXPECT_THROW(geometric_path(a, a, kF0, ot, orx), std::invalid_argument);
}

TEST(RisPhase, AllOnesGivesZeroPhases) {
  const RisConfig c = ris_phase_config(CVector::Ones(9), CVector::Ones(9));
  for (double phi : c.phases) EXPECT_EQ(phi, 0.0);
}

TEST(RisPhase, CoherentCombining) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const CVector hi = random_vector(rng, 25), ho = random_vector(rng, 25);
    const RisConfig c = ris_phase_config(hi, ho);
    const double want = (hi.cwiseAbs().array() * ho.cwiseAbs().array()).sum();
    EXPECT_NEAR(std::abs(ris_cascade(hi, ho, c)), want, 1e-10 * want);
    for (double phi : c.phases) {
      EXPECT_GE(phi, 0.0);
      EXPECT_LT(phi, 2 * kPi);
    }
  }
  EXPECT_THROW(ris_phase_config(CVector::Ones(3), CVector::Ones(4)), std::invalid_argument);
}

TEST(RisPhase, BeatsRandomSearch) {
  std::mt19937_64 rng(16);
  const CVector hi = random_vector(rng, 16), ho = random_vector(rng, 16);
  const double best = std::abs(ris_cascade(hi, ho, ris_phase_config(hi, ho)));
  std::uniform_real_distribution<double> ph(0.0, 2 * kPi);
  double searched = 0.0;
  RisConfig c;
  c.phases.resize(16);
  for (int i = 0; i < 100000; ++i) {
    for (double& p : c.phases) p = ph(rng);
    searched = std::max(searched, std::abs(ris_cascade(hi, ho, c)));
  }
  EXPECT_GE(best, searched);
}

TEST(Mrt, AllOnes) {
  const CVector f = mrt_beamformer(CVector::Ones(4), 4);
  EXPECT_NEAR((f - CVector::Ones(4)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(f.squaredNorm(), 4.0, 1e-12);
  EXPECT_THROW(mrt_beamformer(CVector::Zero(3), 3), std::invalid_argument);
}

TEST(Mrt, CauchySchwarzEquality) {
  std::mt19937_64 rng(23);
  for (int n : {1, 3, 8, 64}) {
    const CVector s = random_vector(rng, n);
    const CVector f = mrt_beamformer(s, static_cast<std::size_t>(n));
    EXPECT_NEAR(std::abs((s.transpose() * f)(0, 0)), std::sqrt(n) * s.norm(), 1e-10 * s.norm());
    EXPECT_NEAR(f.squaredNorm(), n, 1e-10);
  }
}

TEST(Mrt, BeatsRandomSearch) {
  std::mt19937_64 rng(31);
  const CVector a = random_vector(rng, 8);
  // a^H f with f = mrt(conj(a)) is the matched filter for a.
  const CVector f = mrt_beamformer(a.conjugate(), 8);
  const double best = std::norm((a.adjoint() * f)(0, 0)) / f.squaredNorm();
  double searched = 0.0;
  for (int i = 0; i < 10000; ++i) {
    CVector g = random_vector(rng, 8);
    g *= std::sqrt(8.0) / g.norm();
    searched = std::max(searched, std::norm((a.adjoint() * g)(0, 0)) / g.squaredNorm());
  }
  EXPECT_GE(best * (1 + 1e-12), searched);
  EXPECT_NEAR(best, a.squaredNorm(), 1e-10);
}
