#pragma once

// Closed-form link model: elevation/azimuth geometry, the quadratic
// single-lobe antenna gains, log-distance pathloss, and their dB-domain
// composition into a received signal strength. All angles are degrees,
// all gains dB, powers dBm. Every function here is pure.

#include <cmath>
#include <cstdint>

#include "corridor_tilt/errors.hpp"

namespace corridor_tilt::channel {

inline constexpr double kDegPerRad = 57.295779513082320876798154814105;

struct AntennaPattern {
  double a_max_dbi = 0.0;      // boresight gain
  double theta_3db_deg = 0.0;  // vertical half-power beamwidth
  double phi_3db_deg = 0.0;    // horizontal half-power beamwidth

  friend bool operator==(const AntennaPattern&, const AntennaPattern&) = default;
};

struct BaseStation {
  std::int32_t id = 0;  // 1-based station index
  double x_m = 0.0;
  double y_m = 0.0;
  double height_m = 0.0;
  double azimuth_deg = 0.0;  // boresight bearing in [-180, 180]
  double tx_power_dbm = 0.0;

  friend bool operator==(const BaseStation&, const BaseStation&) = default;
};

// Vertical boresight tilt; positive is uptilt.
struct Tilt {
  double deg = 0.0;
};

struct Location {
  double x_m = 0.0;
  double y_m = 0.0;
  double height_m = 0.0;
};

struct PathlossParams {
  double intercept_db = 0.0;  // loss at 1 m
  double slope = 0.0;         // dB per decade of 3D distance

  friend bool operator==(const PathlossParams&, const PathlossParams&) = default;
};

// Wraps an angle into (-180, 180]; +180 maps to itself.
inline double wrap_angle_deg(double x) {
  while (x > 180.0) x -= 360.0;
  while (x <= -180.0) x += 360.0;
  return x;
}

// Angle above the antenna's horizontal plane toward the location.
// Directly above/below (zero ground distance) yields +-90; a point at
// the antenna's own height and position yields 0.
inline double elevation_angle_deg(const BaseStation& bs, const Location& loc) {
  const double dx = loc.x_m - bs.x_m;
  const double dy = loc.y_m - bs.y_m;
  const double dh = loc.height_m - bs.height_m;
  const double ground = std::sqrt(dx * dx + dy * dy);
  if (ground == 0.0) return dh > 0.0 ? 90.0 : (dh < 0.0 ? -90.0 : 0.0);
  return std::atan2(dh, ground) * kDegPerRad;
}

// Bearing from station to location, expressed so that the horizontal
// mismatch (result - azimuth) lies in (-180, 180]. A 2D-colocated point
// has no defined bearing; it gets the boresight itself (zero mismatch).
inline double azimuth_angle_deg(const BaseStation& bs, const Location& loc) {
  const double dx = loc.x_m - bs.x_m;
  const double dy = loc.y_m - bs.y_m;
  if (dx == 0.0 && dy == 0.0) return bs.azimuth_deg;
  const double bearing = std::atan2(dy, dx) * kDegPerRad;
  return bs.azimuth_deg + wrap_angle_deg(bearing - bs.azimuth_deg);
}

// Quadratic main-lobe roll-off; no sidelobe floor, so the gain keeps
// falling as the square of the mismatch.
inline double vertical_gain_db(const AntennaPattern& p, Tilt tilt,
                               double elevation_deg) {
  const double miss = elevation_deg - tilt.deg;
  return -12.0 * miss * miss / (p.theta_3db_deg * p.theta_3db_deg);
}

inline double horizontal_gain_db(const AntennaPattern& p, double bs_azimuth_deg,
                                 double loc_azimuth_deg) {
  const double miss = loc_azimuth_deg - bs_azimuth_deg;
  return -12.0 * miss * miss / (p.phi_3db_deg * p.phi_3db_deg);
}

inline double pathloss_db(const PathlossParams& params, const BaseStation& bs,
                          const Location& loc) {
  const double dx = loc.x_m - bs.x_m;
  const double dy = loc.y_m - bs.y_m;
  const double dh = loc.height_m - bs.height_m;
  const double d3_sq = dx * dx + dy * dy + dh * dh;
  if (d3_sq == 0.0)
    throw DegenerateGeometry("pathloss undefined at zero 3D distance");
  return params.intercept_db + params.slope * std::log10(std::sqrt(d3_sq));
}

// Received signal strength in dBm. The summation order below is the
// reference composition: any cached evaluation path must reproduce it
// term for term to stay bit-identical.
inline double rss_dbm(const BaseStation& bs, Tilt tilt, const AntennaPattern& p,
                      const PathlossParams& params, const Location& loc) {
  double v = bs.tx_power_dbm + p.a_max_dbi;
  v += vertical_gain_db(p, tilt, elevation_angle_deg(bs, loc));
  v += horizontal_gain_db(p, bs.azimuth_deg, azimuth_angle_deg(bs, loc));
  v -= pathloss_db(params, bs, loc);
  return v;
}

}  // namespace corridor_tilt::channel
