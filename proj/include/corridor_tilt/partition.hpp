#pragma once

// Cell partitioning and the performance functional: per-point serving-
// station selection by maximum received signal strength, the density-
// weighted mean-RSS objective, and weighted RSS distribution curves.
//
// Reductions are deterministic by construction: grids are cut into
// fixed-size blocks (independent of worker count), each block accumulates
// in extended precision, and block results are combined in block order.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "corridor_tilt/channel.hpp"
#include "corridor_tilt/errors.hpp"
#include "corridor_tilt/grid.hpp"
#include "corridor_tilt/parallel.hpp"

namespace corridor_tilt::partition {

// The decision variable: one vertical tilt per station, in degrees,
// indexed like the station list.
struct TiltVector {
  std::vector<double> deg;

  std::size_t size() const { return deg.size(); }
  channel::Tilt at(std::size_t n) const { return channel::Tilt{deg[n]}; }
};

// Per-grid-point serving station, stored as 0-based positions into the
// station list (station ids are carried by the stations themselves).
struct Partition {
  std::vector<std::uint32_t> assignment;

  std::size_t size() const { return assignment.size(); }
};

// Per-grid-point RSS from the assigned station, in dBm.
struct RssField {
  std::vector<double> rss_dbm;
};

struct CdfPoint {
  double rss_dbm = 0.0;
  double cdf = 0.0;
};

enum class Population : std::uint8_t { Ground, Uav, All };

// Stations plus everything needed to evaluate their signal at a point.
struct ChannelModel {
  std::vector<channel::BaseStation> stations;
  channel::AntennaPattern pattern;
  channel::PathlossParams pathloss_ground;
  channel::PathlossParams pathloss_uav;

  const channel::PathlossParams& params_for(grid::RegionKind kind) const {
    return kind == grid::RegionKind::Ground ? pathloss_ground : pathloss_uav;
  }
};

inline bool population_matches(Population pop, grid::RegionKind kind) {
  return pop == Population::All ||
         (pop == Population::Ground) == (kind == grid::RegionKind::Ground);
}

// Reference definition of the serving-station rule: the argmax of RSS
// over stations, ties broken by the lowest station index so grid points
// on exact boundaries resolve deterministically.
inline std::pair<std::uint32_t, double> best_station(
    const grid::GridPoint& point, const ChannelModel& model,
    const TiltVector& tilts) {
  if (model.stations.empty()) throw Error("no stations");
  const channel::PathlossParams& pl = model.params_for(point.kind);
  std::uint32_t best = 0;
  double best_rss = channel::rss_dbm(model.stations[0], tilts.at(0),
                                     model.pattern, pl, point.loc);
  for (std::uint32_t n = 1; n < model.stations.size(); ++n) {
    const double r = channel::rss_dbm(model.stations[n], tilts.at(n),
                                      model.pattern, pl, point.loc);
    if (r > best_rss) {
      best_rss = r;
      best = n;
    }
  }
  return {best, best_rss};
}

// Evaluates signal strength over a fixed grid and station set. When the
// per-pair geometry table fits the memory budget it is precomputed once;
// the cached path replays the exact operation sequence of rss_dbm, so
// cached and direct evaluation are bit-identical.
class CoverageEvaluator {
 public:
  CoverageEvaluator(const grid::QuadratureGrid& g, const ChannelModel& model,
                    std::size_t threads = 0,
                    std::size_t cache_budget_mb = 512)
      : grid_(&g), model_(&model), threads_(resolve_thread_count(threads)) {
    if (model.stations.empty()) throw Error("no stations");
    if (model.pattern.theta_3db_deg <= 0.0 || model.pattern.phi_3db_deg <= 0.0)
      throw ValidationError("pattern", "beamwidths must be positive");
    const std::size_t pairs = g.size() * model.stations.size();
    const std::size_t bytes = pairs * 3 * sizeof(double);
    p0_.resize(model.stations.size());
    for (std::size_t n = 0; n < model.stations.size(); ++n)
      p0_[n] = model.stations[n].tx_power_dbm + model.pattern.a_max_dbi;
    if (g.size() > 0 && bytes <= cache_budget_mb * std::size_t{1024} * 1024) {
      build_cache();
    }
  }

  const grid::QuadratureGrid& grid() const { return *grid_; }
  const ChannelModel& model() const { return *model_; }
  std::size_t station_count() const { return model_->stations.size(); }
  std::size_t threads() const { return threads_; }
  bool cached() const { return !cache_.empty(); }

  // RSS from station n at grid point p under the given tilt.
  double rss(std::size_t p, std::size_t n, channel::Tilt tilt) const {
    if (!cache_.empty()) {
      const double* e = &cache_[(p * station_count() + n) * 3];
      double v = p0_[n];
      v += channel::vertical_gain_db(model_->pattern, tilt, e[0]);
      v += e[1];
      v -= e[2];
      return v;
    }
    const grid::GridPoint& gp = grid_->points[p];
    return channel::rss_dbm(model_->stations[n], tilt, model_->pattern,
                            model_->params_for(gp.kind), gp.loc);
  }

  // Tilt-independent per-pair terms (cached or recomputed; identical
  // values either way since both paths call the same pure functions).
  double elevation(std::size_t p, std::size_t n) const {
    if (!cache_.empty()) return cache_[(p * station_count() + n) * 3];
    return channel::elevation_angle_deg(model_->stations[n],
                                        grid_->points[p].loc);
  }
  double horizontal_gain(std::size_t p, std::size_t n) const {
    if (!cache_.empty()) return cache_[(p * station_count() + n) * 3 + 1];
    const channel::BaseStation& bs = model_->stations[n];
    return channel::horizontal_gain_db(
        model_->pattern, bs.azimuth_deg,
        channel::azimuth_angle_deg(bs, grid_->points[p].loc));
  }
  double pathloss(std::size_t p, std::size_t n) const {
    if (!cache_.empty()) return cache_[(p * station_count() + n) * 3 + 2];
    const grid::GridPoint& gp = grid_->points[p];
    return channel::pathloss_db(model_->params_for(gp.kind),
                                model_->stations[n], gp.loc);
  }
  double boresight_power(std::size_t n) const { return p0_[n]; }

  std::pair<std::uint32_t, double> best(std::size_t p,
                                        const TiltVector& tilts) const {
    std::uint32_t best_n = 0;
    double best_rss = rss(p, 0, tilts.at(0));
    for (std::uint32_t n = 1; n < station_count(); ++n) {
      const double r = rss(p, n, tilts.at(n));
      if (r > best_rss) {
        best_rss = r;
        best_n = n;
      }
    }
    return {best_n, best_rss};
  }

  // Assigns every grid point to its maximum-RSS station (lowest index on
  // ties). Deterministic and independent of the worker count.
  Partition compute_partition(const TiltVector& tilts) const {
    check_tilts(tilts);
    Partition part;
    part.assignment.resize(grid_->size());
    for_each_block(grid_->size(), threads_,
                   [&](std::size_t, std::size_t begin, std::size_t end) {
                     for (std::size_t p = begin; p < end; ++p)
                       part.assignment[p] = best(p, tilts).first;
                   });
    return part;
  }

  RssField rss_field(const Partition& part, const TiltVector& tilts) const {
    check_partition(part);
    check_tilts(tilts);
    RssField field;
    field.rss_dbm.resize(grid_->size());
    for_each_block(grid_->size(), threads_,
                   [&](std::size_t, std::size_t begin, std::size_t end) {
                     for (std::size_t p = begin; p < end; ++p) {
                       const std::uint32_t n = part.assignment[p];
                       field.rss_dbm[p] = rss(p, n, tilts.at(n));
                     }
                   });
    return field;
  }

  // Density-weighted mean RSS in dBm under the given assignment. The
  // per-point terms weight * rss are monotone in rss and the extended-
  // precision block sums combine in fixed order, so for identical tilts
  // the value under the argmax partition dominates the value under any
  // other partition exactly, not merely within a tolerance.
  long double performance_precise(const Partition& part,
                                  const TiltVector& tilts) const {
    check_partition(part);
    check_tilts(tilts);
    const std::size_t nblocks = block_count(grid_->size());
    std::vector<long double> partial(nblocks, 0.0L);
    for_each_block(grid_->size(), threads_,
                   [&](std::size_t b, std::size_t begin, std::size_t end) {
                     long double acc = 0.0L;
                     for (std::size_t p = begin; p < end; ++p) {
                       const std::uint32_t n = part.assignment[p];
                       acc += static_cast<long double>(grid_->points[p].weight) *
                              rss(p, n, tilts.at(n));
                     }
                     partial[b] = acc;
                   });
    long double total = 0.0L;
    for (long double v : partial) total += v;
    return total;
  }

  double performance(const Partition& part, const TiltVector& tilts) const {
    return static_cast<double>(performance_precise(part, tilts));
  }

 private:
  void build_cache() {
    const std::size_t N = station_count();
    cache_.resize(grid_->size() * N * 3);
    for_each_block(grid_->size(), threads_,
                   [&](std::size_t, std::size_t begin, std::size_t end) {
                     for (std::size_t p = begin; p < end; ++p) {
                       const grid::GridPoint& gp = grid_->points[p];
                       const channel::PathlossParams& pl =
                           model_->params_for(gp.kind);
                       for (std::size_t n = 0; n < N; ++n) {
                         const channel::BaseStation& bs = model_->stations[n];
                         double* e = &cache_[(p * N + n) * 3];
                         e[0] = channel::elevation_angle_deg(bs, gp.loc);
                         e[1] = channel::horizontal_gain_db(
                             model_->pattern, bs.azimuth_deg,
                             channel::azimuth_angle_deg(bs, gp.loc));
                         e[2] = channel::pathloss_db(pl, bs, gp.loc);
                       }
                     }
                   });
  }

  void check_tilts(const TiltVector& tilts) const {
    if (tilts.size() != station_count())
      throw ValidationError("tilts", "length does not match station count");
  }
  void check_partition(const Partition& part) const {
    if (part.size() != grid_->size())
      throw ValidationError("partition", "length does not match grid size");
    for (std::uint32_t n : part.assignment)
      if (n >= station_count())
        throw ValidationError("partition", "station index out of range");
  }

  const grid::QuadratureGrid* grid_;
  const ChannelModel* model_;
  std::size_t threads_;
  std::vector<double> p0_;     // per station: tx power + boresight gain
  std::vector<double> cache_;  // point-major {elevation, hgain, pathloss}
};

// Weighted empirical distribution of the assigned-station RSS over one
// population. Points with exactly equal RSS merge into one step, making
// the curve independent of traversal order; the last cumulative value
// is exactly 1.
inline std::vector<CdfPoint> rss_cdf(const grid::QuadratureGrid& g,
                                     const RssField& field, Population pop) {
  if (field.rss_dbm.size() != g.size())
    throw ValidationError("rss_field", "length does not match grid size");
  std::vector<std::pair<double, double>> samples;  // (rss, weight)
  for (std::size_t p = 0; p < g.size(); ++p)
    if (population_matches(pop, g.points[p].kind))
      samples.push_back({field.rss_dbm[p], g.points[p].weight});
  long double mass = 0.0L;
  for (const auto& s : samples) mass += s.second;
  if (samples.empty() || !(static_cast<double>(mass) > 0.0))
    throw EmptyPopulation("selected population carries no mass");
  std::sort(samples.begin(), samples.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<CdfPoint> out;
  out.reserve(samples.size());
  long double cum = 0.0L;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    cum += samples[i].second;
    if (i + 1 < samples.size() && samples[i + 1].first == samples[i].first)
      continue;
    out.push_back({samples[i].first, static_cast<double>(cum / mass)});
  }
  return out;
}

inline double population_mass(const grid::QuadratureGrid& g, Population pop) {
  long double mass = 0.0L;
  for (const grid::GridPoint& p : g.points)
    if (population_matches(pop, p.kind)) mass += p.weight;
  return static_cast<double>(mass);
}

// Mean RSS over one population (normalized by that population's mass).
inline double population_mean_rss(const grid::QuadratureGrid& g,
                                  const RssField& field, Population pop) {
  if (field.rss_dbm.size() != g.size())
    throw ValidationError("rss_field", "length does not match grid size");
  long double mass = 0.0L, sum = 0.0L;
  for (std::size_t p = 0; p < g.size(); ++p)
    if (population_matches(pop, g.points[p].kind)) {
      mass += g.points[p].weight;
      sum += static_cast<long double>(g.points[p].weight) * field.rss_dbm[p];
    }
  if (!(static_cast<double>(mass) > 0.0))
    throw EmptyPopulation("selected population carries no mass");
  return static_cast<double>(sum / mass);
}

}  // namespace corridor_tilt::partition
