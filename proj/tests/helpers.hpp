#pragma once

// Shared test utilities: deterministic random scenario generation, a
// process runner for the command-line driver, temp-dir management, and
// small parsing helpers for driver output.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "corridor_tilt/partition.hpp"
#include "corridor_tilt/scenario.hpp"

namespace testutil {

namespace ct = corridor_tilt;

// Platform-stable uniform draw: 53 random bits scaled into [0, 1).
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

// A small random-but-valid scenario: explicit stations, one ground
// rectangle, one or two corridors, mixed population. Region spans are
// divided into a handful of cells so the grids stay tiny.
inline ct::scenario::ScenarioConfig random_scenario(std::mt19937_64& rng,
                                                    std::size_t min_stations = 3,
                                                    std::size_t max_stations = 12) {
  ct::scenario::ScenarioConfig cfg;
  const std::size_t n_stations =
      min_stations + uniform_index(rng, max_stations - min_stations + 1);
  for (std::size_t n = 0; n < n_stations; ++n) {
    ct::channel::BaseStation bs;
    bs.id = static_cast<std::int32_t>(n) + 1;
    bs.x_m = uniform(rng, -600.0, 600.0);
    bs.y_m = uniform(rng, -600.0, 600.0);
    bs.height_m = uniform(rng, 20.0, 45.0);
    bs.azimuth_deg = uniform(rng, -180.0, 180.0);
    bs.tx_power_dbm = uniform(rng, 40.0, 46.0);
    cfg.stations.push_back(bs);
  }

  const double gx = uniform(rng, -200.0, 200.0);
  const double gy = uniform(rng, -200.0, 200.0);
  const double gw = uniform(rng, 300.0, 800.0);
  const double gh = uniform(rng, 300.0, 800.0);
  cfg.regions.push_back({ct::grid::RegionKind::Ground, gx - gw / 2,
                         gx + gw / 2, gy - gh / 2, gy + gh / 2, 1.5});
  const std::size_t n_corridors = 1 + uniform_index(rng, 2);
  for (std::size_t c = 0; c < n_corridors; ++c) {
    const double cx = uniform(rng, -300.0, 300.0);
    const double cy = uniform(rng, -300.0, 300.0);
    const double cw = uniform(rng, 60.0, 200.0);
    const double ch = uniform(rng, 200.0, 600.0);
    cfg.regions.push_back({ct::grid::RegionKind::Corridor, cx - cw / 2,
                           cx + cw / 2, cy - ch / 2, cy + ch / 2,
                           uniform(rng, 80.0, 160.0)});
  }

  cfg.alpha = uniform(rng, 0.05, 0.95);
  cfg.pattern = {uniform(rng, 12.0, 16.0), uniform(rng, 6.0, 14.0),
                 uniform(rng, 50.0, 80.0)};
  cfg.pathloss_ground = {uniform(rng, 30.0, 40.0), uniform(rng, 25.0, 35.0)};
  cfg.pathloss_uav =
      ct::channel::PathlossParams{uniform(rng, 30.0, 38.0),
                                  uniform(rng, 18.0, 26.0)};
  // ~8 cells per axis per region keeps every fuzzed grid near 100 points
  cfg.resolution_ground_m = std::max(gw, gh) / 8.0;
  cfg.resolution_corridor_m = 25.0;
  // larger steps and looser caps than the desk preset so property tests
  // over full optimization runs stay fast
  cfg.opt = {0.05, 0.999, 1e-9, 1e-9, 3000, 80, 1};
  return cfg;
}

// Single three-sector site over a small ground square and one corridor;
// converges by threshold in a handful of outer passes.
inline ct::scenario::ScenarioConfig smoke_scenario() {
  ct::scenario::ScenarioConfig cfg;
  cfg.hex = ct::scenario::HexSpec{};
  cfg.hex->tiers = 0;
  cfg.regions = {
      {ct::grid::RegionKind::Ground, -300.0, 300.0, -300.0, 300.0, 1.5},
      {ct::grid::RegionKind::Corridor, 60.0, 100.0, -200.0, 200.0, 120.0},
  };
  cfg.alpha = 0.5;
  cfg.pattern = {14.0, 10.0, 65.0};
  cfg.pathloss_ground = {38.42, 30.0};
  cfg.pathloss_uav = ct::channel::PathlossParams{34.02, 22.0};
  cfg.resolution_ground_m = 40.0;
  cfg.resolution_corridor_m = 10.0;
  cfg.opt = {0.1, 0.9995, 1e-12, 1e-10, 20000, 60, 1};
  return cfg;
}

inline ct::partition::TiltVector random_tilts(std::mt19937_64& rng,
                                              std::size_t n, double lo = -15.0,
                                              double hi = 15.0) {
  ct::partition::TiltVector t;
  t.deg.resize(n);
  for (std::size_t i = 0; i < n; ++i) t.deg[i] = uniform(rng, lo, hi);
  return t;
}

// Owns the scenario and an evaluator over it; unique_ptr keeps the
// evaluator's internal pointers valid if the rig itself moves.
struct TestRig {
  std::unique_ptr<ct::scenario::Scenario> s;
  std::unique_ptr<ct::partition::CoverageEvaluator> ev;
};

inline TestRig make_rig(const ct::scenario::ScenarioConfig& cfg,
                        std::size_t threads = 1,
                        std::size_t cache_budget_mb = 512) {
  TestRig rig;
  rig.s = std::make_unique<ct::scenario::Scenario>(
      ct::scenario::build_scenario(cfg));
  rig.ev = std::make_unique<ct::partition::CoverageEvaluator>(
      rig.s->quad, rig.s->model, threads, cache_budget_mb);
  return rig;
}

struct TempDir {
  std::string path;

  TempDir() {
    std::string tmpl = "/tmp/corridor_tilt_test_XXXXXX";
    char* p = ::mkdtemp(tmpl.data());
    if (!p) throw std::runtime_error("mkdtemp failed");
    path = p;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const {
    return (std::filesystem::path(path) / name).string();
  }
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path);
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the driver binary with the given arguments, capturing stdout,
// stderr, and the exit code.
inline CliResult run_cli(const std::vector<std::string>& args,
                         const TempDir& scratch) {
  const std::string out_path = scratch.file("stdout.txt");
  const std::string err_path = scratch.file("stderr.txt");
  std::string cmd = std::string("'") + CORRIDOR_TILT_CLI_PATH + "'";
  for (const std::string& a : args) cmd += " '" + a + "'";
  cmd += " > '" + out_path + "' 2> '" + err_path + "'";
  const int rc = std::system(cmd.c_str());
  CliResult res;
  if (rc == -1)
    res.exit_code = -1;
  else if (WIFEXITED(rc))
    res.exit_code = WEXITSTATUS(rc);
  else
    res.exit_code = 128;
  res.out = read_file(out_path);
  res.err = read_file(err_path);
  return res;
}

// Extracts the value after "key=" from driver stdout.
inline std::string stdout_value(const std::string& out,
                                const std::string& key) {
  std::istringstream in(out);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  throw std::runtime_error("missing '" + key + "=' in driver output");
}

}  // namespace testutil
