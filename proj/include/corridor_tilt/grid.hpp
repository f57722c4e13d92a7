#pragma once

// User-domain discretization: rectangular ground and corridor regions,
// the two-population mixture density, and the midpoint-rule quadrature
// grid used to integrate mean signal strength. Grid construction is a
// pure function of its inputs; point order is row-major per region with
// regions kept in declaration order.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "corridor_tilt/channel.hpp"
#include "corridor_tilt/errors.hpp"

namespace corridor_tilt::grid {

enum class RegionKind : std::uint8_t { Ground, Corridor };

struct RectRegion {
  RegionKind kind = RegionKind::Ground;
  double x_min_m = 0.0;
  double x_max_m = 0.0;
  double y_min_m = 0.0;
  double y_max_m = 0.0;
  double height_m = 0.0;  // fixed user height over the rectangle

  double area_m2() const { return (x_max_m - x_min_m) * (y_max_m - y_min_m); }

  friend bool operator==(const RectRegion&, const RectRegion&) = default;
};

// Two-population mixture: alpha of the user mass is on the ground,
// (1 - alpha) spread uniformly over the corridor union.
struct MixtureDensity {
  double alpha = 1.0;
};

struct GridPoint {
  channel::Location loc;
  double weight = 0.0;  // probability mass carried by this quadrature node
  RegionKind kind = RegionKind::Ground;
  std::uint16_t region_ordinal = 0;  // 1-based among regions of the same kind
};

struct QuadratureGrid {
  std::vector<GridPoint> points;
  double resolution_ground_m = 0.0;
  double resolution_corridor_m = 0.0;

  std::size_t size() const { return points.size(); }
};

// Display tag used in result tables: "ground" or "corridor<k>".
inline std::string region_tag(const GridPoint& p) {
  if (p.kind == RegionKind::Ground) return "ground";
  return "corridor" + std::to_string(p.region_ordinal);
}

namespace detail {

// Number of lattice cells along one axis; the cell size is span/n, so
// the cells tile the region exactly even when span is not a multiple of
// the requested resolution.
inline std::int64_t axis_cells(double span, double resolution) {
  return std::llround(span / resolution);
}

}  // namespace detail

// Builds the cell-center lattice over every region. Ground points split
// mass alpha evenly; corridor points split (1 - alpha) evenly across the
// whole corridor union. Populations whose mixture weight is zero are
// dropped. Weights are renormalized so they sum to 1.
inline QuadratureGrid discretize(const std::vector<RectRegion>& regions,
                                 MixtureDensity density,
                                 double resolution_ground_m,
                                 double resolution_corridor_m) {
  const double alpha = density.alpha;
  if (alpha < 0.0 || alpha > 1.0)
    throw InvalidMixture("mixture ratio must lie in [0, 1]");
  if (resolution_ground_m <= 0.0 || resolution_corridor_m <= 0.0)
    throw ValidationError("resolution", "must be positive");

  struct Plan {
    const RectRegion* region;
    std::uint16_t ordinal;
    std::int64_t nx, ny;
    double dx, dy;
  };
  std::vector<Plan> plans;
  std::uint16_t ground_seen = 0, corridor_seen = 0;
  std::size_t ground_points = 0, corridor_points = 0;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const RectRegion& reg = regions[r];
    if (reg.x_min_m >= reg.x_max_m || reg.y_min_m >= reg.y_max_m)
      throw ValidationError("regions[" + std::to_string(r) + "]",
                            "empty extent");
    const bool is_ground = reg.kind == RegionKind::Ground;
    const std::uint16_t ordinal = is_ground ? ++ground_seen : ++corridor_seen;
    if (is_ground && alpha == 0.0) continue;
    if (!is_ground && alpha == 1.0) continue;
    const double res = is_ground ? resolution_ground_m : resolution_corridor_m;
    const std::int64_t nx = detail::axis_cells(reg.x_max_m - reg.x_min_m, res);
    const std::int64_t ny = detail::axis_cells(reg.y_max_m - reg.y_min_m, res);
    if (nx <= 0 || ny <= 0)
      throw EmptyRegion("region " + std::to_string(r) +
                        " yields no quadrature cells at resolution " +
                        std::to_string(res));
    plans.push_back({&reg, ordinal, nx, ny,
                     (reg.x_max_m - reg.x_min_m) / static_cast<double>(nx),
                     (reg.y_max_m - reg.y_min_m) / static_cast<double>(ny)});
    (is_ground ? ground_points : corridor_points) +=
        static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
  if (alpha > 0.0 && ground_points == 0)
    throw InvalidMixture("ground mass requested but no ground region");
  if (alpha < 1.0 && corridor_points == 0)
    throw InvalidMixture("corridor mass requested but no corridor region");

  QuadratureGrid out;
  out.resolution_ground_m = resolution_ground_m;
  out.resolution_corridor_m = resolution_corridor_m;
  out.points.reserve(ground_points + corridor_points);
  for (const Plan& pl : plans) {
    const bool is_ground = pl.region->kind == RegionKind::Ground;
    const double w = is_ground
                         ? alpha / static_cast<double>(ground_points)
                         : (1.0 - alpha) / static_cast<double>(corridor_points);
    for (std::int64_t iy = 0; iy < pl.ny; ++iy) {
      const double y =
          pl.region->y_min_m + (static_cast<double>(iy) + 0.5) * pl.dy;
      for (std::int64_t ix = 0; ix < pl.nx; ++ix) {
        const double x =
            pl.region->x_min_m + (static_cast<double>(ix) + 0.5) * pl.dx;
        out.points.push_back({{x, y, pl.region->height_m},
                              w,
                              pl.region->kind,
                              pl.ordinal});
      }
    }
  }

  // Renormalize so the masses sum to 1 regardless of rounding in the
  // per-point division above.
  long double total = 0.0L;
  for (const GridPoint& p : out.points) total += p.weight;
  const double norm = static_cast<double>(total);
  for (GridPoint& p : out.points) p.weight /= norm;
  return out;
}

}  // namespace corridor_tilt::grid
