// Serving-station selection, the performance functional, and RSS
// distribution curves: brute-force parity, the exact optimality of the
// argmax partition, cache/thread bit-level parity, and the CDF shapes.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <vector>

#include "corridor_tilt/errors.hpp"
#include "corridor_tilt/optimizer.hpp"
#include "corridor_tilt/partition.hpp"
#include "corridor_tilt/scenario.hpp"
#include "helpers.hpp"

namespace ct = corridor_tilt;
namespace cp = corridor_tilt::partition;
using Catch::Matchers::WithinAbs;

namespace {

// A tiny scenario whose ground region discretizes to exactly nx * ny
// points at resolution 10, centered on the origin.
ct::scenario::ScenarioConfig line_scenario(int nx, int ny,
                                           double station_azimuth = 0.0) {
  ct::scenario::ScenarioConfig cfg;
  cfg.stations = {{1, 0.0, 0.0, 25.0, station_azimuth, 43.0}};
  cfg.regions = {{ct::grid::RegionKind::Ground, 20.0, 20.0 + 10.0 * nx,
                  -5.0 * ny, 5.0 * ny, 1.5}};
  cfg.alpha = 1.0;
  cfg.pattern = {14.0, 10.0, 65.0};
  cfg.pathloss_ground = {38.42, 30.0};
  cfg.resolution_ground_m = 10.0;
  cfg.resolution_corridor_m = 10.0;
  return cfg;
}

}  // namespace

TEST_CASE("computed partition matches the brute-force argmax oracle") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const ct::scenario::ScenarioConfig cfg = testutil::random_scenario(rng);
    const testutil::TestRig rig = testutil::make_rig(cfg);
    const cp::TiltVector tilts =
        testutil::random_tilts(rng, rig.s->model.stations.size());
    const cp::Partition part = rig.ev->compute_partition(tilts);
    const cp::RssField field = rig.ev->rss_field(part, tilts);
    for (std::size_t p = 0; p < rig.s->quad.size(); ++p) {
      // independent per-point scan using the closed-form signal model
      std::uint32_t expect = 0;
      double expect_rss = -1e300;
      for (std::uint32_t n = 0; n < rig.s->model.stations.size(); ++n) {
        const double r = ct::channel::rss_dbm(
            rig.s->model.stations[n], tilts.at(n), rig.s->model.pattern,
            rig.s->model.params_for(rig.s->quad.points[p].kind),
            rig.s->quad.points[p].loc);
        if (r > expect_rss) {
          expect_rss = r;
          expect = n;
        }
      }
      REQUIRE(part.assignment[p] == expect);
      REQUIRE(field.rss_dbm[p] == expect_rss);
      const auto ref =
          cp::best_station(rig.s->quad.points[p], rig.s->model, tilts);
      REQUIRE(ref.first == expect);
      REQUIRE(ref.second == expect_rss);
    }
  }
}

TEST_CASE("ties break toward the lowest station index") {
  ct::scenario::ScenarioConfig cfg = line_scenario(4, 3);
  // two stations with identical geometry: every RSS comparison ties
  cfg.stations = {{1, 0.0, 0.0, 25.0, 0.0, 43.0},
                  {2, 0.0, 0.0, 25.0, 0.0, 43.0}};
  const testutil::TestRig rig = testutil::make_rig(cfg);
  cp::TiltVector tilts;
  tilts.deg = {-5.0, -5.0};
  const cp::Partition part = rig.ev->compute_partition(tilts);
  for (std::uint32_t n : part.assignment) CHECK(n == 0);
}

TEST_CASE("argmax partition dominates every random partition exactly") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 5; ++trial) {
    const ct::scenario::ScenarioConfig cfg = testutil::random_scenario(rng);
    const testutil::TestRig rig = testutil::make_rig(cfg);
    const std::size_t N = rig.s->model.stations.size();
    const cp::TiltVector tilts = testutil::random_tilts(rng, N);
    const cp::Partition best = rig.ev->compute_partition(tilts);
    const double phi_best = rig.ev->performance(best, tilts);
    for (int w = 0; w < 100; ++w) {
      const cp::Partition random = ct::optimizer::random_partition(
          N, rig.s->quad.size(), rng());
      // exact comparison: identical accumulation order on both sides
      CHECK(phi_best >= rig.ev->performance(random, tilts));
    }
  }
}

TEST_CASE("re-partitioning never decreases the objective") {
  std::mt19937_64 rng(33);
  const ct::scenario::ScenarioConfig cfg = testutil::random_scenario(rng);
  const testutil::TestRig rig = testutil::make_rig(cfg);
  const std::size_t N = rig.s->model.stations.size();
  for (int trial = 0; trial < 20; ++trial) {
    const cp::TiltVector tilts = testutil::random_tilts(rng, N);
    const cp::Partition old =
        ct::optimizer::random_partition(N, rig.s->quad.size(), rng());
    const cp::Partition fresh = rig.ev->compute_partition(tilts);
    CHECK(rig.ev->performance(fresh, tilts) >=
          rig.ev->performance(old, tilts));
  }
}

TEST_CASE("performance of a single point is that point's signal strength") {
  const ct::scenario::ScenarioConfig cfg = line_scenario(1, 1);
  const testutil::TestRig rig = testutil::make_rig(cfg);
  REQUIRE(rig.s->quad.size() == 1);
  REQUIRE(rig.s->quad.points[0].weight == 1.0);
  cp::TiltVector tilts;
  tilts.deg = {-7.0};
  const cp::Partition part = rig.ev->compute_partition(tilts);
  CHECK(rig.ev->performance(part, tilts) == rig.ev->rss(0, 0, tilts.at(0)));
}

TEST_CASE("performance is the weight-weighted mean of assigned signals") {
  std::mt19937_64 rng(34);
  const ct::scenario::ScenarioConfig cfg = testutil::random_scenario(rng);
  const testutil::TestRig rig = testutil::make_rig(cfg);
  const cp::TiltVector tilts =
      testutil::random_tilts(rng, rig.s->model.stations.size());
  const cp::Partition part = rig.ev->compute_partition(tilts);
  const cp::RssField field = rig.ev->rss_field(part, tilts);
  long double mean = 0.0L;
  for (std::size_t p = 0; p < rig.s->quad.size(); ++p)
    mean += static_cast<long double>(rig.s->quad.points[p].weight) *
            field.rss_dbm[p];
  CHECK_THAT(rig.ev->performance(part, tilts),
             WithinAbs(static_cast<double>(mean), 1e-10));
  CHECK(rig.ev->performance(part, tilts) ==
        static_cast<double>(rig.ev->performance_precise(part, tilts)));
  // equal-weight two-point mean: the arithmetic average
  const ct::scenario::ScenarioConfig pair_cfg = line_scenario(2, 1);
  const testutil::TestRig pair = testutil::make_rig(pair_cfg);
  REQUIRE(pair.s->quad.size() == 2);
  cp::TiltVector zero;
  zero.deg = {0.0};
  const cp::Partition pair_part = pair.ev->compute_partition(zero);
  const double r0 = pair.ev->rss(0, 0, zero.at(0));
  const double r1 = pair.ev->rss(1, 0, zero.at(0));
  CHECK_THAT(pair.ev->performance(pair_part, zero),
             WithinAbs(0.5 * r0 + 0.5 * r1, 1e-12));
}

TEST_CASE("distribution curve over three distinct signal levels") {
  const ct::scenario::ScenarioConfig cfg = line_scenario(3, 1);
  const testutil::TestRig rig = testutil::make_rig(cfg);
  REQUIRE(rig.s->quad.size() == 3);
  cp::TiltVector tilts;
  tilts.deg = {0.0};
  const cp::Partition part = rig.ev->compute_partition(tilts);
  const cp::RssField field = rig.ev->rss_field(part, tilts);
  const std::vector<cp::CdfPoint> cdf =
      cp::rss_cdf(rig.s->quad, field, cp::Population::All);
  REQUIRE(cdf.size() == 3);
  CHECK_THAT(cdf[0].cdf, WithinAbs(1.0 / 3.0, 1e-12));
  CHECK_THAT(cdf[1].cdf, WithinAbs(2.0 / 3.0, 1e-12));
  CHECK(cdf[2].cdf == 1.0);
  CHECK(cdf[0].rss_dbm < cdf[1].rss_dbm);
  CHECK(cdf[1].rss_dbm < cdf[2].rss_dbm);
  CHECK(cdf[0].rss_dbm ==
        *std::min_element(field.rss_dbm.begin(), field.rss_dbm.end()));
  CHECK(cdf[2].rss_dbm ==
        *std::max_element(field.rss_dbm.begin(), field.rss_dbm.end()));
}

TEST_CASE("distribution curve merges exactly equal signal levels") {
  // two points mirrored about a north-facing station: identical RSS
  ct::scenario::ScenarioConfig cfg;
  cfg.stations = {{1, 0.0, 0.0, 25.0, 90.0, 43.0}};
  cfg.regions = {{ct::grid::RegionKind::Ground, -10.0, 10.0, -5.0, 5.0, 1.5}};
  cfg.alpha = 1.0;
  cfg.pattern = {14.0, 10.0, 65.0};
  cfg.pathloss_ground = {38.42, 30.0};
  cfg.resolution_ground_m = 10.0;
  cfg.resolution_corridor_m = 10.0;
  const testutil::TestRig rig = testutil::make_rig(cfg);
  REQUIRE(rig.s->quad.size() == 2);
  cp::TiltVector tilts;
  tilts.deg = {-3.0};
  const cp::Partition part = rig.ev->compute_partition(tilts);
  const cp::RssField field = rig.ev->rss_field(part, tilts);
  REQUIRE(field.rss_dbm[0] == field.rss_dbm[1]);
  const std::vector<cp::CdfPoint> cdf =
      cp::rss_cdf(rig.s->quad, field, cp::Population::All);
  REQUIRE(cdf.size() == 1);
  CHECK(cdf[0].cdf == 1.0);
}

TEST_CASE("population selection and empty populations") {
  std::mt19937_64 rng(35);
  const ct::scenario::ScenarioConfig cfg = testutil::random_scenario(rng);
  const testutil::TestRig rig = testutil::make_rig(cfg);
  const cp::TiltVector tilts =
      testutil::random_tilts(rng, rig.s->model.stations.size());
  const cp::Partition part = rig.ev->compute_partition(tilts);
  const cp::RssField field = rig.ev->rss_field(part, tilts);

  CHECK_THAT(cp::population_mass(rig.s->quad, cp::Population::Ground),
             WithinAbs(cfg.alpha, 1e-12));
  CHECK_THAT(cp::population_mass(rig.s->quad, cp::Population::Uav),
             WithinAbs(1.0 - cfg.alpha, 1e-12));

  for (const cp::Population pop :
       {cp::Population::Ground, cp::Population::Uav, cp::Population::All}) {
    const std::vector<cp::CdfPoint> cdf = cp::rss_cdf(rig.s->quad, field, pop);
    REQUIRE(!cdf.empty());
    CHECK(cdf.back().cdf == 1.0);
    for (std::size_t i = 1; i < cdf.size(); ++i) {
      CHECK(cdf[i - 1].rss_dbm < cdf[i].rss_dbm);
      CHECK(cdf[i - 1].cdf < cdf[i].cdf);
    }
    // weighted mean from the curve's increments matches the direct mean
    long double mean = 0.0L, prev = 0.0L;
    for (const cp::CdfPoint& c : cdf) {
      mean += (static_cast<long double>(c.cdf) - prev) * c.rss_dbm;
      prev = c.cdf;
    }
    CHECK_THAT(cp::population_mean_rss(rig.s->quad, field, pop),
               WithinAbs(static_cast<double>(mean), 1e-9));
  }

  // a ground-only grid has no aerial population to summarize
  const ct::scenario::ScenarioConfig ground_cfg = line_scenario(3, 2);
  const testutil::TestRig ground = testutil::make_rig(ground_cfg);
  cp::TiltVector zero;
  zero.deg = {0.0};
  const cp::Partition gpart = ground.ev->compute_partition(zero);
  const cp::RssField gfield = ground.ev->rss_field(gpart, zero);
  CHECK_THROWS_AS(cp::rss_cdf(ground.s->quad, gfield, cp::Population::Uav),
                  ct::EmptyPopulation);
}

TEST_CASE("cached and direct evaluation agree bit for bit") {
  std::mt19937_64 rng(36);
  const ct::scenario::ScenarioConfig cfg = testutil::random_scenario(rng);
  const testutil::TestRig cached = testutil::make_rig(cfg, 1, 512);
  const testutil::TestRig direct = testutil::make_rig(cfg, 1, 0);
  REQUIRE(cached.ev->cached());
  REQUIRE(!direct.ev->cached());
  const std::size_t N = cfg.stations.size();
  for (int trial = 0; trial < 5; ++trial) {
    const cp::TiltVector tilts = testutil::random_tilts(rng, N);
    const cp::Partition a = cached.ev->compute_partition(tilts);
    const cp::Partition b = direct.ev->compute_partition(tilts);
    REQUIRE(a.assignment == b.assignment);
    CHECK(cached.ev->performance(a, tilts) == direct.ev->performance(b, tilts));
    const cp::RssField fa = cached.ev->rss_field(a, tilts);
    const cp::RssField fb = direct.ev->rss_field(b, tilts);
    REQUIRE(fa.rss_dbm == fb.rss_dbm);
  }
  for (std::size_t p = 0; p < cached.s->quad.size(); ++p)
    for (std::size_t n = 0; n < N; ++n) {
      CHECK(cached.ev->elevation(p, n) == direct.ev->elevation(p, n));
      CHECK(cached.ev->horizontal_gain(p, n) == direct.ev->horizontal_gain(p, n));
      CHECK(cached.ev->pathloss(p, n) == direct.ev->pathloss(p, n));
    }
}

TEST_CASE("results are independent of the worker count, bit for bit") {
  std::mt19937_64 rng(37);
  const ct::scenario::ScenarioConfig cfg = testutil::random_scenario(rng);
  const testutil::TestRig one = testutil::make_rig(cfg, 1);
  const testutil::TestRig four = testutil::make_rig(cfg, 4);
  const std::size_t N = cfg.stations.size();
  for (int trial = 0; trial < 5; ++trial) {
    const cp::TiltVector tilts = testutil::random_tilts(rng, N);
    const cp::Partition a = one.ev->compute_partition(tilts);
    const cp::Partition b = four.ev->compute_partition(tilts);
    REQUIRE(a.assignment == b.assignment);
    CHECK(one.ev->performance(a, tilts) == four.ev->performance(b, tilts));
  }
}

TEST_CASE("dimension mismatches are rejected") {
  const ct::scenario::ScenarioConfig cfg = line_scenario(3, 2);
  const testutil::TestRig rig = testutil::make_rig(cfg);
  cp::TiltVector wrong;
  wrong.deg = {0.0, 0.0};
  CHECK_THROWS_AS(rig.ev->compute_partition(wrong), ct::ValidationError);
  cp::TiltVector ok;
  ok.deg = {0.0};
  cp::Partition bad;
  bad.assignment.assign(rig.s->quad.size(), 5);  // index out of range
  CHECK_THROWS_AS(rig.ev->performance(bad, ok), ct::ValidationError);
  cp::Partition short_part;
  short_part.assignment.assign(2, 0);
  CHECK_THROWS_AS(rig.ev->rss_field(short_part, ok), ct::ValidationError);
}
