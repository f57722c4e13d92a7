#pragma once

// Tilt optimization: the analytic gradient of the mean-RSS objective,
// decayed-step gradient ascent over a fixed partition, and the outer
// alternation with optimal re-partitioning, plus a finite-difference
// validation harness.
//
// For a fixed partition the objective is an exact quadratic in each
// tilt, so per-cell aggregate sums (mass, weighted elevation, weighted
// squared elevation, tilt-free signal part) make every inner iteration
// O(stations) instead of O(grid). The public gradient() evaluates the
// per-point formula directly; the aggregate form is algebraically equal.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "corridor_tilt/errors.hpp"
#include "corridor_tilt/parallel.hpp"
#include "corridor_tilt/partition.hpp"

namespace corridor_tilt::optimizer {

struct OptimizerConfig {
  double eta0 = 0.005;   // initial learning rate, in (0, 1)
  double kappa = 0.999;  // per-step decay factor, in (0, 1)
  double eps1 = 1e-8;    // inner relative-improvement threshold
  double eps2 = 1e-9;    // outer relative-improvement threshold
  std::uint32_t max_inner_iters = 10000;
  std::uint32_t max_outer_iters = 500;
  std::uint64_t seed = 1;  // seeds the random initial partition

  void validate() const {
    if (!(eta0 > 0.0 && eta0 < 1.0))
      throw ValidationError("optimizer.eta0", "must lie in (0, 1)");
    if (!(kappa > 0.0 && kappa < 1.0))
      throw ValidationError("optimizer.kappa", "must lie in (0, 1)");
    if (!(eps1 > 0.0)) throw ValidationError("optimizer.eps1", "must be > 0");
    if (!(eps2 > 0.0)) throw ValidationError("optimizer.eps2", "must be > 0");
    if (max_inner_iters < 1)
      throw ValidationError("optimizer.max_inner_iters", "must be >= 1");
    if (max_outer_iters < 1)
      throw ValidationError("optimizer.max_outer_iters", "must be >= 1");
  }

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

enum class StopReason : std::uint8_t { Threshold, IterationCap };

struct InnerStep {
  std::uint32_t outer_pass = 0;  // 1-based outer pass this step belongs to
  double phi_dbm = 0.0;          // objective after the step (aggregate form)
  double grad_norm = 0.0;        // L2 norm of the gradient used for the step
  double eta = 0.0;              // learning rate used for the step
};

struct ConvergenceTrace {
  // Index 0 holds the objective under the seeded random initial
  // partition; entry k holds it after outer pass k.
  std::vector<double> outer_phi_dbm;
  // Largest |tilt - cell centroid| over nonzero-mass cells after each
  // inner loop (the inner ascent's fixed-point residual).
  std::vector<double> outer_centroid_gap_deg;
  std::vector<std::uint32_t> inner_counts;  // inner iterations per pass
  std::vector<InnerStep> inner_steps;
  partition::TiltVector final_tilts;
  std::uint32_t outer_iterations = 0;
  StopReason stop_reason = StopReason::IterationCap;
  bool inner_cap_hit = false;      // any inner loop stopped by its cap
  bool tilts_within_range = true;  // final tilts inside [-90, +90]
  // Objective after the closing re-partition that aligns the reported
  // partition with the final tilts; never below the last outer entry.
  double final_phi_dbm = 0.0;
};

struct OptimizeResult {
  partition::TiltVector tilts;
  partition::Partition cells;
  ConvergenceTrace trace;
};

// Relative gain used by both stopping rules. The objective is a mean of
// dBm values and thus negative in practice, so the literal ratio
// (new - old)/old would flip sign; dividing by |old| preserves the
// intent (stop once the relative improvement is small).
inline double relative_gain(double phi_old, double phi_new) {
  const double denom = std::abs(phi_old);
  if (denom == 0.0) return 0.0;
  return (phi_new - phi_old) / denom;
}

// Per-cell sums over the current partition. For cell n with tilt t the
// objective contributes fixed[n] - beta*(s2[n] - 2t*s1[n] + t*t*mass[n])
// and the gradient is 2*beta*(s1[n] - t*mass[n]).
struct CellAggregates {
  std::vector<double> mass;   // total density weight
  std::vector<double> s1;     // weight * elevation
  std::vector<double> s2;     // weight * elevation^2
  std::vector<double> fixed;  // weight * (boresight power + hgain - pathloss)
  double beta = 0.0;          // 12 / theta_3db^2

  static CellAggregates from(const partition::CoverageEvaluator& ev,
                             const partition::Partition& part) {
    const std::size_t N = ev.station_count();
    const std::size_t P = ev.grid().size();
    if (part.size() != P)
      throw ValidationError("partition", "length does not match grid size");
    const std::size_t nblocks = block_count(P);
    // Block-local partials merged in block order keep the sums
    // bit-identical for any worker count.
    std::vector<long double> partial(nblocks * N * 4, 0.0L);
    for_each_block(P, ev.threads(),
                   [&](std::size_t b, std::size_t begin, std::size_t end) {
                     long double* acc = &partial[b * N * 4];
                     for (std::size_t p = begin; p < end; ++p) {
                       const std::uint32_t n = part.assignment[p];
                       const double w = ev.grid().points[p].weight;
                       const double e = ev.elevation(p, n);
                       const double f = (ev.boresight_power(n) +
                                         ev.horizontal_gain(p, n)) -
                                        ev.pathloss(p, n);
                       acc[n * 4 + 0] += w;
                       acc[n * 4 + 1] += static_cast<long double>(w) * e;
                       acc[n * 4 + 2] +=
                           static_cast<long double>(w) * e * e;
                       acc[n * 4 + 3] += static_cast<long double>(w) * f;
                     }
                   });
    CellAggregates agg;
    agg.mass.assign(N, 0.0);
    agg.s1.assign(N, 0.0);
    agg.s2.assign(N, 0.0);
    agg.fixed.assign(N, 0.0);
    for (std::size_t n = 0; n < N; ++n) {
      long double m = 0.0L, a1 = 0.0L, a2 = 0.0L, fx = 0.0L;
      for (std::size_t b = 0; b < nblocks; ++b) {
        const long double* acc = &partial[(b * N + n) * 4];
        m += acc[0];
        a1 += acc[1];
        a2 += acc[2];
        fx += acc[3];
      }
      agg.mass[n] = static_cast<double>(m);
      agg.s1[n] = static_cast<double>(a1);
      agg.s2[n] = static_cast<double>(a2);
      agg.fixed[n] = static_cast<double>(fx);
    }
    const double t3 = ev.model().pattern.theta_3db_deg;
    agg.beta = 12.0 / (t3 * t3);
    return agg;
  }

  std::size_t size() const { return mass.size(); }

  double phi(const partition::TiltVector& tilts) const {
    long double acc = 0.0L;
    for (std::size_t n = 0; n < size(); ++n) {
      const double t = tilts.deg[n];
      acc += fixed[n] - beta * (s2[n] - 2.0 * t * s1[n] + t * t * mass[n]);
    }
    return static_cast<double>(acc);
  }

  // Empty cells have mass == 0 and s1 == 0, so their component is an
  // exact 0 and their tilt never moves.
  std::vector<double> gradient(const partition::TiltVector& tilts) const {
    std::vector<double> g(size());
    for (std::size_t n = 0; n < size(); ++n)
      g[n] = 2.0 * beta * (s1[n] - tilts.deg[n] * mass[n]);
    return g;
  }

  // Weighted mean elevation of cell n; the stationary point of the
  // objective in that cell's tilt.
  double centroid(std::size_t n) const { return s1[n] / mass[n]; }
};

// Analytic gradient of the objective with respect to each tilt, summed
// per point: 24/theta_3db^2 * sum over the cell of weight * (elevation -
// tilt). Deterministic blocked reduction; empty cells get an exact 0.
inline std::vector<double> gradient(const partition::CoverageEvaluator& ev,
                                    const partition::Partition& part,
                                    const partition::TiltVector& tilts) {
  const std::size_t N = ev.station_count();
  const std::size_t P = ev.grid().size();
  if (part.size() != P)
    throw ValidationError("partition", "length does not match grid size");
  if (tilts.size() != N)
    throw ValidationError("tilts", "length does not match station count");
  const std::size_t nblocks = block_count(P);
  std::vector<long double> partial(nblocks * N, 0.0L);
  for_each_block(P, ev.threads(),
                 [&](std::size_t b, std::size_t begin, std::size_t end) {
                   long double* acc = &partial[b * N];
                   for (std::size_t p = begin; p < end; ++p) {
                     const std::uint32_t n = part.assignment[p];
                     const double w = ev.grid().points[p].weight;
                     acc[n] += static_cast<long double>(w) *
                               (ev.elevation(p, n) - tilts.deg[n]);
                   }
                 });
  const double t3 = ev.model().pattern.theta_3db_deg;
  const double scale = 24.0 / (t3 * t3);
  std::vector<double> g(N);
  for (std::size_t n = 0; n < N; ++n) {
    long double acc = 0.0L;
    for (std::size_t b = 0; b < nblocks; ++b) acc += partial[b * N + n];
    g[n] = scale * static_cast<double>(acc);
  }
  return g;
}

// Per-cell weighted mean elevation; cells with no mass keep their
// current tilt.
inline partition::TiltVector centroid_tilts(
    const partition::CoverageEvaluator& ev, const partition::Partition& part,
    const partition::TiltVector& current) {
  const CellAggregates agg = CellAggregates::from(ev, part);
  partition::TiltVector out = current;
  for (std::size_t n = 0; n < agg.size(); ++n)
    if (agg.mass[n] > 0.0) out.deg[n] = agg.centroid(n);
  return out;
}

// Uniform random assignment of every grid point to a station. Uses a
// fixed 64-bit generator and a modulo draw so the result is identical
// on every platform; the modulo bias is far below any quantity of
// interest here.
inline partition::Partition random_partition(std::size_t stations,
                                             std::size_t grid_points,
                                             std::uint64_t seed) {
  if (stations == 0) throw Error("no stations");
  std::mt19937_64 rng(seed);
  partition::Partition part;
  part.assignment.resize(grid_points);
  for (std::size_t p = 0; p < grid_points; ++p)
    part.assignment[p] = static_cast<std::uint32_t>(rng() % stations);
  return part;
}

struct InnerResult {
  std::uint32_t iterations = 0;
  bool cap_hit = false;
};

// Gradient ascent over a fixed partition. The learning rate starts at
// eta0 and is decayed by kappa before every step, so the first step
// uses eta0*kappa; the loop body always executes at least once and
// repeats while the per-iteration relative improvement stays at or
// above eps1 (and the iteration cap is not reached).
inline InnerResult gradient_ascent_inner(const CellAggregates& agg,
                                         partition::TiltVector& tilts,
                                         const OptimizerConfig& cfg,
                                         ConvergenceTrace* trace = nullptr,
                                         std::uint32_t outer_pass = 0) {
  if (tilts.size() != agg.size())
    throw ValidationError("tilts", "length does not match station count");
  double eta = cfg.eta0;
  double phi_s = agg.phi(tilts);
  InnerResult res;
  for (;;) {
    ++res.iterations;
    const std::vector<double> g = agg.gradient(tilts);
    eta *= cfg.kappa;
    for (std::size_t n = 0; n < g.size(); ++n) tilts.deg[n] += eta * g[n];
    const double phi_e = agg.phi(tilts);
    if (trace) {
      long double nrm = 0.0L;
      for (double v : g) nrm += static_cast<long double>(v) * v;
      trace->inner_steps.push_back(
          {outer_pass, phi_e,
           static_cast<double>(std::sqrt(static_cast<double>(nrm))), eta});
    }
    const double improve = relative_gain(phi_s, phi_e);
    phi_s = phi_e;
    if (!(improve >= cfg.eps1)) break;
    if (res.iterations >= cfg.max_inner_iters) {
      res.cap_hit = true;
      break;
    }
  }
  return res;
}

// The full alternation: evaluate the seeded random initial partition,
// then repeatedly re-partition optimally and run the inner ascent until
// the outer relative improvement falls below eps2 or the pass cap is
// reached. A closing re-partition aligns the returned partition with
// the final tilts (it can only improve the objective).
inline OptimizeResult bs_vat(const partition::CoverageEvaluator& ev,
                             const OptimizerConfig& cfg,
                             const partition::TiltVector& initial_tilts) {
  cfg.validate();
  const std::size_t N = ev.station_count();
  if (initial_tilts.size() != N)
    throw ValidationError("tilts", "length does not match station count");
  OptimizeResult out;
  out.tilts = initial_tilts;
  out.trace.stop_reason = StopReason::IterationCap;

  partition::Partition part = random_partition(N, ev.grid().size(), cfg.seed);
  double phi_old = ev.performance(part, out.tilts);
  out.trace.outer_phi_dbm.push_back(phi_old);

  std::uint32_t pass = 0;
  while (pass < cfg.max_outer_iters) {
    ++pass;
    part = ev.compute_partition(out.tilts);
    const CellAggregates agg = CellAggregates::from(ev, part);
    const InnerResult inner =
        gradient_ascent_inner(agg, out.tilts, cfg, &out.trace, pass);
    out.trace.inner_counts.push_back(inner.iterations);
    out.trace.inner_cap_hit = out.trace.inner_cap_hit || inner.cap_hit;

    const double phi_new = ev.performance(part, out.tilts);
    out.trace.outer_phi_dbm.push_back(phi_new);
    double gap = 0.0;
    for (std::size_t n = 0; n < N; ++n)
      if (agg.mass[n] > 0.0)
        gap = std::max(gap, std::abs(out.tilts.deg[n] - agg.centroid(n)));
    out.trace.outer_centroid_gap_deg.push_back(gap);

    if (relative_gain(phi_old, phi_new) < cfg.eps2) {
      out.trace.stop_reason = StopReason::Threshold;
      break;
    }
    phi_old = phi_new;
  }

  out.cells = ev.compute_partition(out.tilts);
  out.trace.final_phi_dbm = ev.performance(out.cells, out.tilts);
  out.trace.final_tilts = out.tilts;
  out.trace.outer_iterations = pass;
  for (double t : out.tilts.deg)
    if (!(t >= -90.0 && t <= 90.0)) out.trace.tilts_within_range = false;
  return out;
}

// Compares the analytic gradient against central differences of the
// extended-precision objective with the partition held fixed. Returns
// the largest relative component error over stations whose analytic
// component exceeds 1e-12 in magnitude. The objective is an exact
// quadratic in each tilt, so the central difference has no truncation
// term and the residual is rounding noise alone.
inline double finite_diff_check(const partition::CoverageEvaluator& ev,
                                const partition::Partition& part,
                                const partition::TiltVector& tilts,
                                double step_deg) {
  if (!(step_deg > 0.0)) throw ValidationError("step_deg", "must be > 0");
  const std::vector<double> g = gradient(ev, part, tilts);
  double max_rel = 0.0;
  partition::TiltVector probe = tilts;
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (std::abs(g[n]) <= 1e-12) continue;
    const double base = tilts.deg[n];
    probe.deg[n] = base + step_deg;
    const long double up = ev.performance_precise(part, probe);
    probe.deg[n] = base - step_deg;
    const long double down = ev.performance_precise(part, probe);
    probe.deg[n] = base;
    const long double fd = (up - down) / (2.0L * step_deg);
    const double rel = static_cast<double>(
        std::abs(fd - static_cast<long double>(g[n])) / std::abs(g[n]));
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace corridor_tilt::optimizer
