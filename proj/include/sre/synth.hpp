#pragma once

// Seeded synthetic city maps: a jittered block grid with one convex building
// per occupied block and the BS on the roof of the most central building.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "sre/config.hpp"
#include "sre/scene.hpp"

namespace sre {

inline Scene generate_synthetic_scene(const GeneratorParams& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int cells = std::max(1, static_cast<int>(std::floor(g.size_m / g.block_m)));
  const double cell = g.size_m / cells;
  const double margin = 0.5 * g.street_m;

  Scene s;
  s.bounds = {0.0, 0.0, g.size_m, g.size_m};
  for (int cy = 0; cy < cells; ++cy) {
    for (int cx = 0; cx < cells; ++cx) {
      if (u(rng) >= g.fill) continue;
      const double x0 = cx * cell + margin, y0 = cy * cell + margin;
      const double w = cell - 2 * margin;
      // Shrink and shift the lot a little so streets are not perfectly regular.
      const double sx = w * (0.65 + 0.35 * u(rng)), sy = w * (0.65 + 0.35 * u(rng));
      const double ox = x0 + (w - sx) * u(rng), oy = y0 + (w - sy) * u(rng);
      std::vector<Vec2> fp;
      if (u(rng) < 0.5) {
        fp = {{ox, oy}, {ox + sx, oy}, {ox + sx, oy + sy}, {ox, oy + sy}};
      } else {
        // Points on an inscribed ellipse at jittered, evenly spread angles.
        const int n = 5 + static_cast<int>(u(rng) * 4);
        const double phase = u(rng) * 2 * kPi;
        for (int k = 0; k < n; ++k) {
          const double a = phase + 2 * kPi * (k + 0.4 * (u(rng) - 0.5)) / n;
          fp.emplace_back(ox + 0.5 * sx * (1 + std::cos(a)), oy + 0.5 * sy * (1 + std::sin(a)));
        }
      }
      s.buildings.push_back(normalized_building(std::move(fp), g.building_height_m));
    }
  }
  const Vec2 mid(0.5 * g.size_m, 0.5 * g.size_m);
  if (s.buildings.empty()) {
    s.bs_position = Point3(mid.x(), mid.y(), g.building_height_m + g.bs_mast_m);
    return s;
  }
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.buildings.size(); ++i) {
    const double d = (s.buildings[i].centroid() - mid).norm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  const Building& b = s.buildings[best];
  s.bs_position = Point3(b.centroid().x(), b.centroid().y(), b.height + g.bs_mast_m);
  s.validate();
  return s;
}

}  // namespace sre
