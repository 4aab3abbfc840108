#pragma once

// 2.5D urban geometry: convex prism buildings, candidate installation sites,
// test points and line-of-sight queries.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sre {

using Point3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

// Linear tolerance in meters for on-surface decisions.
inline constexpr double kGeomEps = 1e-9;

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

struct Rect {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  bool contains(const Vec2& p, double eps = kGeomEps) const {
    return p.x() >= xmin - eps && p.x() <= xmax + eps && p.y() >= ymin - eps && p.y() <= ymax + eps;
  }
  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }

  bool operator==(const Rect&) const = default;
};

struct Building {
  std::vector<Vec2> footprint;  // convex, counter-clockwise
  double height = 6.0;

  std::size_t size() const { return footprint.size(); }
  const Vec2& vertex(std::size_t i) const { return footprint[i % footprint.size()]; }

  // Wall i runs from vertex i to vertex i+1.
  Vec2 wall_direction(std::size_t i) const { return vertex(i + 1) - vertex(i); }

  Vec2 wall_outward_normal(std::size_t i) const {
    const Vec2 e = wall_direction(i);
    return Vec2(e.y(), -e.x()).normalized();
  }

  double signed_area() const {
    double a = 0.0;
    for (std::size_t i = 0; i < size(); ++i) a += cross2(vertex(i), vertex(i + 1));
    return 0.5 * a;
  }

  Vec2 centroid() const {
    const double a = signed_area();
    double cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      const Vec2& p = vertex(i);
      const Vec2& q = vertex(i + 1);
      const double w = cross2(p, q);
      cx += (p.x() + q.x()) * w;
      cy += (p.y() + q.y()) * w;
    }
    return Vec2(cx / (6.0 * a), cy / (6.0 * a));
  }

  // Signed distance-like test: max over walls of n·(p - v). Negative inside.
  double max_wall_offset(const Vec2& p) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i) worst = std::max(worst, wall_outward_normal(i).dot(p - vertex(i)));
    return worst;
  }

  bool strictly_contains(const Vec2& p) const { return max_wall_offset(p) < -kGeomEps; }

  Rect bbox() const {
    Rect r{footprint[0].x(), footprint[0].y(), footprint[0].x(), footprint[0].y()};
    for (const auto& v : footprint) {
      r.xmin = std::min(r.xmin, v.x());
      r.ymin = std::min(r.ymin, v.y());
      r.xmax = std::max(r.xmax, v.x());
      r.ymax = std::max(r.ymax, v.y());
    }
    return r;
  }

  bool operator==(const Building&) const = default;
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Validates a footprint and returns it in counter-clockwise order.
// Throws GeometryError for degenerate or non-convex input.
inline Building normalized_building(std::vector<Vec2> footprint, double height) {
  if (footprint.size() < 3) throw GeometryError("building footprint needs at least 3 vertices");
  if (!(height > 0.0) || !std::isfinite(height)) throw GeometryError("building height must be positive");
  for (const auto& v : footprint)
    if (!v.allFinite()) throw GeometryError("building footprint has non-finite coordinates");
  Building b{std::move(footprint), height};
  const double area = b.signed_area();
  if (std::abs(area) < 1e-9) throw GeometryError("building footprint has zero area");
  if (area < 0.0) std::reverse(b.footprint.begin(), b.footprint.end());
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double turn = cross2(b.wall_direction(i), b.wall_direction(i + 1));
    if (turn <= 1e-12 * b.wall_direction(i).squaredNorm())
      throw GeometryError("building footprint is not strictly convex");
  }
  return b;
}

struct Scene {
  std::vector<Building> buildings;
  Rect bounds;
  Point3 bs_position = Point3::Zero();

  void validate() const {
    if (!(bounds.width() > 0.0 && bounds.height() > 0.0)) throw GeometryError("scene bounds are empty");
    if (!bs_position.allFinite() || !bounds.contains(bs_position.head<2>()))
      throw GeometryError("base station lies outside the scene bounds");
    for (const auto& b : buildings)
      for (const auto& v : b.footprint)
        if (!bounds.contains(v)) throw GeometryError("building footprint exceeds scene bounds");
  }

  bool operator==(const Scene&) const = default;
};

enum class SiteKind { wall, rooftop };

inline const char* to_string(SiteKind k) { return k == SiteKind::wall ? "wall" : "rooftop"; }

struct CandidateSite {
  int id = 0;
  Point3 position = Point3::Zero();
  SiteKind kind = SiteKind::wall;
  Vec2 outward_normal = Vec2::UnitX();
  int building = -1;
  int wall = -1;  // wall index for wall sites, vertex index for rooftop sites
};

struct TestPoint {
  int id = 0;
  Point3 position = Point3::Zero();
};

// True iff the open segment (a, b) passes through the interior of the prism.
inline bool segment_hits_prism(const Point3& a, const Point3& b, const Building& bld) {
  double t0 = 0.0, t1 = 1.0;
  const Point3 d = b - a;
  const double len = d.norm();
  if (len == 0.0) return false;

  // Vertical slab 0 < z < height.
  auto clip = [&](double offset, double rate) {
    // Keep t with offset + t * rate < 0 (offset in meters).
    if (std::abs(rate) < 1e-15) return offset < -kGeomEps;
    const double t = -offset / rate;
    if (rate > 0.0)
      t1 = std::min(t1, t);
    else
      t0 = std::max(t0, t);
    return true;
  };
  if (!clip(a.z() - bld.height, d.z())) return false;
  if (!clip(-a.z(), -d.z())) return false;
  for (std::size_t i = 0; i < bld.size(); ++i) {
    const Vec2 n = bld.wall_outward_normal(i);
    const Vec2 v = bld.vertex(i);
    if (!clip(n.dot(a.head<2>() - v), n.dot(d.head<2>()))) return false;
    if (t1 - t0 <= 0.0) return false;
  }
  return (t1 - t0) * len > kGeomEps;
}

inline bool segment_occluded(const Point3& a, const Point3& b, const Scene& scene) {
  const double xmin = std::min(a.x(), b.x()), xmax = std::max(a.x(), b.x());
  const double ymin = std::min(a.y(), b.y()), ymax = std::max(a.y(), b.y());
  const double zmin = std::min(a.z(), b.z());
  for (const auto& bld : scene.buildings) {
    if (zmin >= bld.height) continue;
    const Rect r = bld.bbox();
    if (r.xmax < xmin || r.xmin > xmax || r.ymax < ymin || r.ymin > ymax) continue;
    if (segment_hits_prism(a, b, bld)) return true;
  }
  return false;
}

// Wall-mounted sites every `spacing` meters of arc length, first one at spacing/2.
inline std::vector<CandidateSite> generate_ris_sites(const Scene& scene, double spacing = 5.0, double height = 5.0,
                                                     int first_id = 0) {
  if (!(spacing > 0.0)) throw std::invalid_argument("RIS site spacing must be positive");
  std::vector<CandidateSite> sites;
  int id = first_id;
  for (std::size_t bi = 0; bi < scene.buildings.size(); ++bi) {
    const Building& b = scene.buildings[bi];
    if (!(height < b.height))
      throw std::invalid_argument("RIS mounting height must be below the building height");
    for (std::size_t w = 0; w < b.size(); ++w) {
      const Vec2 e = b.wall_direction(w);
      const double len = e.norm();
      const auto count = static_cast<int>(std::floor(len / spacing + 1e-9));
      const Vec2 u = e / len;
      for (int k = 0; k < count; ++k) {
        const Vec2 p = b.vertex(w) + u * ((k + 0.5) * spacing);
        CandidateSite s;
        s.id = id++;
        s.position = Point3(p.x(), p.y(), height);
        s.kind = SiteKind::wall;
        s.outward_normal = b.wall_outward_normal(w);
        s.building = static_cast<int>(bi);
        s.wall = static_cast<int>(w);
        sites.push_back(s);
      }
    }
  }
  return sites;
}

// One rooftop site per footprint vertex; the normal bisects the adjacent wall normals.
inline std::vector<CandidateSite> generate_ncr_sites(const Scene& scene, double height = 6.5, int first_id = 0) {
  std::vector<CandidateSite> sites;
  int id = first_id;
  for (std::size_t bi = 0; bi < scene.buildings.size(); ++bi) {
    const Building& b = scene.buildings[bi];
    if (!(height >= b.height))
      throw std::invalid_argument("rooftop site height must not be below the building height");
    for (std::size_t v = 0; v < b.size(); ++v) {
      const Vec2 n_prev = b.wall_outward_normal(v + b.size() - 1);
      const Vec2 n_next = b.wall_outward_normal(v);
      CandidateSite s;
      s.id = id++;
      s.position = Point3(b.vertex(v).x(), b.vertex(v).y(), height);
      s.kind = SiteKind::rooftop;
      s.outward_normal = (n_prev + n_next).normalized();
      s.building = static_cast<int>(bi);
      s.wall = static_cast<int>(v);
      sites.push_back(s);
    }
  }
  return sites;
}

// Inclusive grid over the bounds; the far edges are always sampled.
inline std::vector<double> grid_axis(double lo, double hi, double step) {
  std::vector<double> xs;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) xs.push_back(lo + static_cast<double>(i) * step);
  if (hi - xs.back() > 1e-9) xs.push_back(hi);
  return xs;
}

inline std::vector<TestPoint> generate_test_points(const Scene& scene, double step, double ue_height = 1.5) {
  if (!(step > 0.0)) throw std::invalid_argument("test point step must be positive");
  std::vector<TestPoint> tps;
  const auto xs = grid_axis(scene.bounds.xmin, scene.bounds.xmax, step);
  const auto ys = grid_axis(scene.bounds.ymin, scene.bounds.ymax, step);
  int id = 0;
  for (double y : ys) {
    for (double x : xs) {
      const Vec2 p(x, y);
      const bool inside = std::any_of(scene.buildings.begin(), scene.buildings.end(),
                                      [&](const Building& b) { return b.strictly_contains(p); });
      if (inside) continue;
      tps.push_back(TestPoint{id++, Point3(x, y, ue_height)});
    }
  }
  return tps;
}

}  // namespace sre
