#pragma once

// JSON wire format for scenario configurations: strict parsing (unknown
// keys are rejected by name, types are checked with full paths in error
// messages), canonical serialization with a fixed key order, and dotted
// key=value overrides applied to the document before typed parsing.

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "corridor_tilt/errors.hpp"
#include "corridor_tilt/scenario.hpp"

namespace corridor_tilt::config {

using ordered_json = nlohmann::ordered_json;

inline constexpr std::int64_t kFormatVersion = 1;

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ParseError("config: " + path + " " + what);
}

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline void require_object(const ordered_json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "must be an object");
}

inline void require_array(const ordered_json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "must be an array");
}

// Every present key must be known; missing optional keys are fine.
inline void check_keys(const ordered_json& j, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ParseError("config: unknown key '" + join(path, it.key()) + "'");
  }
}

inline const ordered_json* find(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

inline const ordered_json& member(const ordered_json& j,
                                  const std::string& path, const char* key) {
  const ordered_json* m = find(j, key);
  if (!m) fail(join(path, key), "is required");
  return *m;
}

inline double as_double(const ordered_json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "must be a number");
  return j.get<double>();
}

inline std::int64_t as_int(const ordered_json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "must be an integer");
  return j.get<std::int64_t>();
}

inline std::uint64_t as_uint(const ordered_json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "must be an integer");
  if (j.is_number_integer() && !j.is_number_unsigned() &&
      j.get<std::int64_t>() < 0)
    fail(path, "must be >= 0");
  return j.get<std::uint64_t>();
}

inline std::string as_string(const ordered_json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "must be a string");
  return j.get<std::string>();
}

inline double get_double(const ordered_json& j, const std::string& path,
                         const char* key) {
  return as_double(member(j, path, key), join(path, key));
}

inline double get_double_or(const ordered_json& j, const std::string& path,
                            const char* key, double fallback) {
  const ordered_json* m = find(j, key);
  return m ? as_double(*m, join(path, key)) : fallback;
}

inline channel::PathlossParams parse_pathloss(const ordered_json& j,
                                              const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"intercept_db", "slope"});
  channel::PathlossParams p;
  p.intercept_db = get_double(j, path, "intercept_db");
  p.slope = get_double(j, path, "slope");
  return p;
}

inline ordered_json pathloss_json(const channel::PathlossParams& p) {
  ordered_json j;
  j["intercept_db"] = p.intercept_db;
  j["slope"] = p.slope;
  return j;
}

}  // namespace detail

inline scenario::ScenarioConfig from_json(const ordered_json& doc) {
  using namespace detail;
  require_object(doc, "root");
  check_keys(doc, "",
             {"format_version", "deployment", "regions", "alpha", "pattern",
              "pathloss_ground", "pathloss_uav", "grid", "initial_tilt_deg",
              "optimizer", "rss_cache_budget_mb"});
  const std::int64_t version =
      as_int(member(doc, "", "format_version"), "format_version");
  if (version != kFormatVersion)
    fail("format_version",
         "unsupported (this build reads version " +
             std::to_string(kFormatVersion) + ")");

  scenario::ScenarioConfig cfg;

  const ordered_json& dep = member(doc, "", "deployment");
  require_object(dep, "deployment");
  check_keys(dep, "deployment", {"hex", "stations"});
  if (const ordered_json* hex = find(dep, "hex")) {
    const std::string path = "deployment.hex";
    require_object(*hex, path);
    check_keys(*hex, path,
               {"isd_m", "tiers", "bs_height_m", "tx_power_dbm",
                "sector_azimuths_deg"});
    scenario::HexSpec spec;
    spec.isd_m = get_double(*hex, path, "isd_m");
    spec.tiers = static_cast<std::uint32_t>(
        as_uint(member(*hex, path, "tiers"), path + ".tiers"));
    spec.bs_height_m = get_double(*hex, path, "bs_height_m");
    spec.tx_power_dbm = get_double(*hex, path, "tx_power_dbm");
    const ordered_json& az = member(*hex, path, "sector_azimuths_deg");
    require_array(az, path + ".sector_azimuths_deg");
    spec.sector_azimuths_deg.clear();
    for (std::size_t i = 0; i < az.size(); ++i)
      spec.sector_azimuths_deg.push_back(as_double(
          az[i], path + ".sector_azimuths_deg[" + std::to_string(i) + "]"));
    cfg.hex = spec;
  }
  if (const ordered_json* stations = find(dep, "stations")) {
    const std::string path = "deployment.stations";
    require_array(*stations, path);
    for (std::size_t i = 0; i < stations->size(); ++i) {
      const std::string sp = path + "[" + std::to_string(i) + "]";
      const ordered_json& s = (*stations)[i];
      require_object(s, sp);
      check_keys(s, sp,
                 {"id", "x_m", "y_m", "height_m", "azimuth_deg",
                  "tx_power_dbm"});
      channel::BaseStation bs;
      const std::int64_t id = as_int(member(s, sp, "id"), sp + ".id");
      if (id < 1 || id > std::numeric_limits<std::int32_t>::max())
        fail(sp + ".id", "must be a positive 32-bit integer");
      bs.id = static_cast<std::int32_t>(id);
      bs.x_m = get_double(s, sp, "x_m");
      bs.y_m = get_double(s, sp, "y_m");
      bs.height_m = get_double(s, sp, "height_m");
      bs.azimuth_deg = get_double(s, sp, "azimuth_deg");
      bs.tx_power_dbm = get_double(s, sp, "tx_power_dbm");
      cfg.stations.push_back(bs);
    }
  }

  const ordered_json& regions = member(doc, "", "regions");
  detail::require_array(regions, "regions");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const std::string rp = "regions[" + std::to_string(i) + "]";
    const ordered_json& r = regions[i];
    require_object(r, rp);
    check_keys(r, rp,
               {"kind", "x_min_m", "x_max_m", "y_min_m", "y_max_m",
                "height_m"});
    grid::RectRegion reg;
    const std::string kind = as_string(member(r, rp, "kind"), rp + ".kind");
    if (kind == "ground")
      reg.kind = grid::RegionKind::Ground;
    else if (kind == "corridor")
      reg.kind = grid::RegionKind::Corridor;
    else
      fail(rp + ".kind", "must be \"ground\" or \"corridor\"");
    reg.x_min_m = get_double(r, rp, "x_min_m");
    reg.x_max_m = get_double(r, rp, "x_max_m");
    reg.y_min_m = get_double(r, rp, "y_min_m");
    reg.y_max_m = get_double(r, rp, "y_max_m");
    reg.height_m = get_double(r, rp, "height_m");
    cfg.regions.push_back(reg);
  }

  cfg.alpha = get_double_or(doc, "", "alpha", cfg.alpha);

  {
    const ordered_json& pat = member(doc, "", "pattern");
    require_object(pat, "pattern");
    check_keys(pat, "pattern", {"a_max_dbi", "theta_3db_deg", "phi_3db_deg"});
    cfg.pattern.a_max_dbi = get_double(pat, "pattern", "a_max_dbi");
    cfg.pattern.theta_3db_deg = get_double(pat, "pattern", "theta_3db_deg");
    cfg.pattern.phi_3db_deg = get_double(pat, "pattern", "phi_3db_deg");
  }

  cfg.pathloss_ground =
      parse_pathloss(member(doc, "", "pathloss_ground"), "pathloss_ground");
  if (const ordered_json* uav = find(doc, "pathloss_uav"))
    cfg.pathloss_uav = parse_pathloss(*uav, "pathloss_uav");

  if (const ordered_json* g = find(doc, "grid")) {
    require_object(*g, "grid");
    check_keys(*g, "grid", {"resolution_ground_m", "resolution_corridor_m"});
    cfg.resolution_ground_m = get_double_or(*g, "grid", "resolution_ground_m",
                                            cfg.resolution_ground_m);
    cfg.resolution_corridor_m = get_double_or(
        *g, "grid", "resolution_corridor_m", cfg.resolution_corridor_m);
  }

  cfg.initial_tilt_deg =
      get_double_or(doc, "", "initial_tilt_deg", cfg.initial_tilt_deg);

  if (const ordered_json* opt = find(doc, "optimizer")) {
    require_object(*opt, "optimizer");
    check_keys(*opt, "optimizer",
               {"eta0", "kappa", "eps1", "eps2", "max_inner_iters",
                "max_outer_iters", "seed"});
    cfg.opt.eta0 = get_double_or(*opt, "optimizer", "eta0", cfg.opt.eta0);
    cfg.opt.kappa = get_double_or(*opt, "optimizer", "kappa", cfg.opt.kappa);
    cfg.opt.eps1 = get_double_or(*opt, "optimizer", "eps1", cfg.opt.eps1);
    cfg.opt.eps2 = get_double_or(*opt, "optimizer", "eps2", cfg.opt.eps2);
    if (const ordered_json* m = find(*opt, "max_inner_iters"))
      cfg.opt.max_inner_iters = static_cast<std::uint32_t>(
          as_uint(*m, "optimizer.max_inner_iters"));
    if (const ordered_json* m = find(*opt, "max_outer_iters"))
      cfg.opt.max_outer_iters = static_cast<std::uint32_t>(
          as_uint(*m, "optimizer.max_outer_iters"));
    if (const ordered_json* m = find(*opt, "seed"))
      cfg.opt.seed = as_uint(*m, "optimizer.seed");
  }

  if (const ordered_json* m = find(doc, "rss_cache_budget_mb"))
    cfg.rss_cache_budget_mb = as_uint(*m, "rss_cache_budget_mb");

  cfg.validate();
  return cfg;
}

inline ordered_json to_json(const scenario::ScenarioConfig& cfg) {
  ordered_json doc;
  doc["format_version"] = kFormatVersion;
  ordered_json dep;
  if (cfg.hex) {
    ordered_json hex;
    hex["isd_m"] = cfg.hex->isd_m;
    hex["tiers"] = cfg.hex->tiers;
    hex["bs_height_m"] = cfg.hex->bs_height_m;
    hex["tx_power_dbm"] = cfg.hex->tx_power_dbm;
    hex["sector_azimuths_deg"] = cfg.hex->sector_azimuths_deg;
    dep["hex"] = hex;
  } else {
    ordered_json stations = ordered_json::array();
    for (const channel::BaseStation& bs : cfg.stations) {
      ordered_json s;
      s["id"] = bs.id;
      s["x_m"] = bs.x_m;
      s["y_m"] = bs.y_m;
      s["height_m"] = bs.height_m;
      s["azimuth_deg"] = bs.azimuth_deg;
      s["tx_power_dbm"] = bs.tx_power_dbm;
      stations.push_back(s);
    }
    dep["stations"] = stations;
  }
  doc["deployment"] = dep;
  ordered_json regions = ordered_json::array();
  for (const grid::RectRegion& r : cfg.regions) {
    ordered_json reg;
    reg["kind"] = r.kind == grid::RegionKind::Ground ? "ground" : "corridor";
    reg["x_min_m"] = r.x_min_m;
    reg["x_max_m"] = r.x_max_m;
    reg["y_min_m"] = r.y_min_m;
    reg["y_max_m"] = r.y_max_m;
    reg["height_m"] = r.height_m;
    regions.push_back(reg);
  }
  doc["regions"] = regions;
  doc["alpha"] = cfg.alpha;
  ordered_json pat;
  pat["a_max_dbi"] = cfg.pattern.a_max_dbi;
  pat["theta_3db_deg"] = cfg.pattern.theta_3db_deg;
  pat["phi_3db_deg"] = cfg.pattern.phi_3db_deg;
  doc["pattern"] = pat;
  doc["pathloss_ground"] = detail::pathloss_json(cfg.pathloss_ground);
  if (cfg.pathloss_uav)
    doc["pathloss_uav"] = detail::pathloss_json(*cfg.pathloss_uav);
  ordered_json g;
  g["resolution_ground_m"] = cfg.resolution_ground_m;
  g["resolution_corridor_m"] = cfg.resolution_corridor_m;
  doc["grid"] = g;
  doc["initial_tilt_deg"] = cfg.initial_tilt_deg;
  ordered_json opt;
  opt["eta0"] = cfg.opt.eta0;
  opt["kappa"] = cfg.opt.kappa;
  opt["eps1"] = cfg.opt.eps1;
  opt["eps2"] = cfg.opt.eps2;
  opt["max_inner_iters"] = cfg.opt.max_inner_iters;
  opt["max_outer_iters"] = cfg.opt.max_outer_iters;
  opt["seed"] = cfg.opt.seed;
  doc["optimizer"] = opt;
  doc["rss_cache_budget_mb"] = cfg.rss_cache_budget_mb;
  return doc;
}

// Two-space indentation and a trailing newline; doubles print in their
// shortest round-trippable form, so serialize(parse(s)) is a fixed point.
inline std::string serialize(const scenario::ScenarioConfig& cfg) {
  return to_json(cfg).dump(2) + "\n";
}

inline ordered_json parse_document(const std::string& text) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: invalid JSON: ") + e.what());
  }
}

inline scenario::ScenarioConfig parse(const std::string& text) {
  return from_json(parse_document(text));
}

inline ordered_json load_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_document(buf.str());
}

// Applies "dotted.path=value" to the document. Path segments index into
// arrays when they are non-negative integers; the value is parsed as a
// JSON literal when possible and used as a string otherwise, so
// alpha=0.25 assigns a number and regions.0.kind=corridor a string.
inline void apply_override(ordered_json& doc, const std::string& spec) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ParseError("override '" + spec + "' must look like key=value");
  const std::string path = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);

  std::vector<std::string> segments;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    segments.push_back(path.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (const std::string& s : segments)
    if (s.empty())
      throw ParseError("override '" + spec + "' has an empty path segment");

  ordered_json value;
  try {
    value = ordered_json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    value = raw;
  }

  ordered_json* cur = &doc;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const std::string& seg = segments[i];
    const bool last = i + 1 == segments.size();
    if (cur->is_array()) {
      std::size_t idx = 0;
      try {
        std::size_t consumed = 0;
        idx = std::stoul(seg, &consumed);
        if (consumed != seg.size()) throw std::invalid_argument(seg);
      } catch (const std::exception&) {
        throw ParseError("override '" + spec + "': '" + seg +
                         "' is not an array index");
      }
      if (idx >= cur->size())
        throw ParseError("override '" + spec + "': index " + seg +
                         " is out of range");
      cur = &(*cur)[idx];
    } else if (cur->is_object() || cur->is_null()) {
      cur = &(*cur)[seg];  // creates missing object members
    } else {
      throw ParseError("override '" + spec + "': '" + seg +
                       "' descends into a non-container value");
    }
    if (last) *cur = value;
  }
}

}  // namespace corridor_tilt::config
