#pragma once

// Experiment description and construction: the hexagonal multi-sector
// deployment generator, the full scenario configuration (deployment,
// regions, mixture, channel constants, optimizer knobs), validation,
// and assembly into the runtime objects consumed by the evaluator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "corridor_tilt/channel.hpp"
#include "corridor_tilt/errors.hpp"
#include "corridor_tilt/grid.hpp"
#include "corridor_tilt/optimizer.hpp"
#include "corridor_tilt/partition.hpp"

namespace corridor_tilt::scenario {

// Hexagonal lattice of sites, each emitting one station per sector
// azimuth from the same mast.
struct HexSpec {
  double isd_m = 500.0;  // distance between neighboring sites
  std::uint32_t tiers = 2;
  double bs_height_m = 25.0;
  double tx_power_dbm = 43.0;
  std::vector<double> sector_azimuths_deg = {0.0, 120.0, -120.0};

  friend bool operator==(const HexSpec&, const HexSpec&) = default;
};

namespace detail {

// Site centers: the origin plus rings 1..tiers of a triangular lattice
// with basis vectors (isd, 0) and (isd/2, isd*sqrt(3)/2). Ring k holds
// 6k sites; within a ring, sites are ordered counterclockwise starting
// from the positive x axis, which fixes the site numbering.
inline std::vector<std::pair<double, double>> hex_sites(double isd,
                                                        std::uint32_t tiers) {
  std::vector<std::pair<double, double>> sites = {{0.0, 0.0}};
  const double ax = isd, ay = 0.0;
  const double bx = isd * 0.5, by = isd * std::sqrt(3.0) * 0.5;
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  for (std::uint32_t k = 1; k <= tiers; ++k) {
    struct Entry {
      double angle, x, y;
    };
    std::vector<Entry> ring;
    ring.reserve(6 * static_cast<std::size_t>(k));
    std::int64_t m = k, n = 0;
    static constexpr int dirs[6][2] = {{-1, 1}, {-1, 0}, {0, -1},
                                       {1, -1}, {1, 0},  {0, 1}};
    for (const auto& d : dirs) {
      for (std::uint32_t step = 0; step < k; ++step) {
        const double x = static_cast<double>(m) * ax + static_cast<double>(n) * bx;
        const double y = static_cast<double>(m) * ay + static_cast<double>(n) * by;
        double angle = std::atan2(y, x);
        if (angle < 0.0) angle += kTwoPi;
        ring.push_back({angle, x, y});
        m += d[0];
        n += d[1];
      }
    }
    std::sort(ring.begin(), ring.end(),
              [](const Entry& a, const Entry& b) { return a.angle < b.angle; });
    for (const Entry& e : ring) sites.push_back({e.x, e.y});
  }
  return sites;
}

}  // namespace detail

// Expands the lattice spec into stations. Site i (1-based, center first,
// rings ordered as above) with S sectors yields stations with ids
// S*(i-1)+1 .. S*i, sectors in azimuth declaration order.
inline std::vector<channel::BaseStation> hex_deployment(const HexSpec& spec) {
  if (!(spec.isd_m > 0.0))
    throw ValidationError("deployment.hex.isd_m", "must be > 0");
  if (!(spec.bs_height_m > 0.0))
    throw ValidationError("deployment.hex.bs_height_m", "must be > 0");
  if (spec.sector_azimuths_deg.empty())
    throw ValidationError("deployment.hex.sector_azimuths_deg",
                          "must list at least one azimuth");
  for (double a : spec.sector_azimuths_deg)
    if (!(a >= -180.0 && a <= 180.0))
      throw ValidationError("deployment.hex.sector_azimuths_deg",
                            "azimuths must lie in [-180, 180]");
  std::vector<channel::BaseStation> out;
  const auto sites = detail::hex_sites(spec.isd_m, spec.tiers);
  out.reserve(sites.size() * spec.sector_azimuths_deg.size());
  std::int32_t id = 0;
  for (const auto& [x, y] : sites)
    for (double az : spec.sector_azimuths_deg)
      out.push_back({++id, x, y, spec.bs_height_m, az, spec.tx_power_dbm});
  return out;
}

// Complete experiment description. Exactly one of `hex` and `stations`
// describes the deployment.
struct ScenarioConfig {
  std::optional<HexSpec> hex;
  std::vector<channel::BaseStation> stations;  // explicit deployment
  std::vector<grid::RectRegion> regions;
  double alpha = 1.0;
  channel::AntennaPattern pattern;
  channel::PathlossParams pathloss_ground;
  std::optional<channel::PathlossParams> pathloss_uav;
  double resolution_ground_m = 10.0;
  double resolution_corridor_m = 5.0;
  double initial_tilt_deg = 0.0;
  optimizer::OptimizerConfig opt;
  std::uint64_t rss_cache_budget_mb = 512;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;

  void validate() const {
    if (hex.has_value() == !stations.empty())
      throw ValidationError("deployment",
                            "exactly one of hex and stations is required");
    if (!stations.empty()) {
      for (std::size_t n = 0; n < stations.size(); ++n) {
        const channel::BaseStation& bs = stations[n];
        const std::string field = "deployment.stations[" + std::to_string(n) + "]";
        if (bs.id != static_cast<std::int32_t>(n) + 1)
          throw ValidationError(field + ".id",
                                "ids must run 1..N in declaration order");
        if (!(bs.height_m > 0.0))
          throw ValidationError(field + ".height_m", "must be > 0");
        if (!(bs.azimuth_deg >= -180.0 && bs.azimuth_deg <= 180.0))
          throw ValidationError(field + ".azimuth_deg",
                                "must lie in [-180, 180]");
      }
    } else {
      hex_deployment(*hex);  // field checks live with the generator
    }
    if (regions.empty())
      throw ValidationError("regions", "at least one region is required");
    bool any_corridor = false;
    for (std::size_t r = 0; r < regions.size(); ++r) {
      const grid::RectRegion& reg = regions[r];
      const std::string field = "regions[" + std::to_string(r) + "]";
      if (!(reg.x_min_m < reg.x_max_m))
        throw ValidationError(field, "x_min_m must be < x_max_m");
      if (!(reg.y_min_m < reg.y_max_m))
        throw ValidationError(field, "y_min_m must be < y_max_m");
      if (!(reg.height_m >= 0.0))
        throw ValidationError(field + ".height_m", "must be >= 0");
      any_corridor = any_corridor || reg.kind == grid::RegionKind::Corridor;
    }
    if (!(alpha >= 0.0 && alpha <= 1.0))
      throw ValidationError("alpha", "must lie in [0, 1]");
    if (!(pattern.theta_3db_deg > 0.0))
      throw ValidationError("pattern.theta_3db_deg", "must be > 0");
    if (!(pattern.phi_3db_deg > 0.0))
      throw ValidationError("pattern.phi_3db_deg", "must be > 0");
    if (!(pathloss_ground.slope > 0.0))
      throw ValidationError("pathloss_ground.slope", "must be > 0");
    if (alpha < 1.0 && any_corridor && !pathloss_uav.has_value())
      throw ValidationError("pathloss_uav",
                            "required when corridors carry mass");
    if (pathloss_uav && !(pathloss_uav->slope > 0.0))
      throw ValidationError("pathloss_uav.slope", "must be > 0");
    if (!(resolution_ground_m > 0.0))
      throw ValidationError("grid.resolution_ground_m", "must be > 0");
    if (!(resolution_corridor_m > 0.0))
      throw ValidationError("grid.resolution_corridor_m", "must be > 0");
    if (!(initial_tilt_deg >= -90.0 && initial_tilt_deg <= 90.0))
      throw ValidationError("initial_tilt_deg", "must lie in [-90, 90]");
    opt.validate();
  }
};

// Runtime objects assembled from a validated config.
struct Scenario {
  partition::ChannelModel model;
  grid::QuadratureGrid quad;
  optimizer::OptimizerConfig opt;
  double initial_tilt_deg = 0.0;
  std::uint64_t rss_cache_budget_mb = 512;

  partition::TiltVector initial_tilts() const {
    partition::TiltVector t;
    t.deg.assign(model.stations.size(), initial_tilt_deg);
    return t;
  }
};

inline std::vector<channel::BaseStation> build_stations(
    const ScenarioConfig& cfg) {
  if (cfg.hex) return hex_deployment(*cfg.hex);
  return cfg.stations;
}

inline Scenario build_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Scenario s;
  s.model.stations = build_stations(cfg);
  s.model.pattern = cfg.pattern;
  s.model.pathloss_ground = cfg.pathloss_ground;
  // Unused when no corridor carries mass; validation guarantees presence
  // whenever it matters.
  s.model.pathloss_uav = cfg.pathloss_uav.value_or(cfg.pathloss_ground);
  s.quad = grid::discretize(cfg.regions, {cfg.alpha}, cfg.resolution_ground_m,
                            cfg.resolution_corridor_m);
  s.opt = cfg.opt;
  s.initial_tilt_deg = cfg.initial_tilt_deg;
  s.rss_cache_budget_mb = cfg.rss_cache_budget_mb;
  return s;
}

// Bundled desk study: 19 sites x 3 sectors on a 500 m lattice, a
// 1.5 km ground square, four elevated corridors, and the slow-decay
// ascent schedule. Azimuths use the wrapped convention, so the third
// sector's 240-degree bearing is stored as -120.
inline ScenarioConfig case_study_preset() {
  ScenarioConfig cfg;
  cfg.hex = HexSpec{500.0, 2, 25.0, 43.0, {0.0, 120.0, -120.0}};
  cfg.regions = {
      {grid::RegionKind::Ground, -750.0, 750.0, -750.0, 750.0, 1.5},
      {grid::RegionKind::Corridor, -320.0, -280.0, -400.0, 400.0, 150.0},
      {grid::RegionKind::Corridor, -120.0, -80.0, -400.0, 400.0, 120.0},
      {grid::RegionKind::Corridor, 80.0, 120.0, -400.0, 400.0, 120.0},
      {grid::RegionKind::Corridor, 280.0, 320.0, -400.0, 400.0, 150.0},
  };
  cfg.alpha = 0.5;
  cfg.pattern = {14.0, 10.0, 65.0};
  cfg.pathloss_ground = {38.42, 30.0};
  cfg.pathloss_uav = channel::PathlossParams{34.02, 22.0};
  cfg.resolution_ground_m = 10.0;
  cfg.resolution_corridor_m = 5.0;
  cfg.initial_tilt_deg = 0.0;
  cfg.opt = {0.005, 0.999, 1e-8, 1e-9, 10000, 500, 1};
  cfg.rss_cache_budget_mb = 512;
  return cfg;
}

}  // namespace corridor_tilt::scenario
