#pragma once

// Discrete search along primitive directions of the integer variables.

#include "gdfl/core.hpp"
#include "gdfl/qmc.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>

namespace gdfl {

/// Directions added per enrichment event.
inline constexpr std::size_t kEnrichmentBatch = 2;
/// Candidate draws per enrichment event before the set is declared saturated
/// at the current point.
inline constexpr int kEnrichmentDraws = 4096;

struct DsOutcome {
  MixedPoint point;
  double f = 0.0;
  bool improved = false;
  bool xi_reduced = false;
  /// Sweep failed and every probed direction has stepsize memory 1.
  bool all_unit = false;
  /// Enrichment could not add any direction (cap reached or none found).
  bool saturated = false;
  std::size_t probed = 0;
  std::size_t added = 0;
};

/// Largest integer a >= 0 with lz <= z + a*d <= uz.
inline std::int64_t max_feasible_step(const IntVector& z, const IntVector& d, const Box& box) {
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] > 0)
      best = std::min(best, (box.uz()[i] - z[i]) / d[i]);
    else if (d[i] < 0)
      best = std::min(best, (z[i] - box.lz()[i]) / (-d[i]));
  }
  return best;
}

/// Adds up to kEnrichmentBatch new directions that are feasible at z.
/// Returns the number added.
inline std::size_t enrich_directions(PrimitiveSet& dirs, const IntVector& z, const Box& box) {
  std::size_t added = 0;
  DirectionIndex rejected;
  auto known = [&](const IntVector& d) { return dirs.contains(d) || rejected.count(d) > 0; };
  for (int draw = 0; draw < kEnrichmentDraws && added < kEnrichmentBatch && !dirs.full(); ++draw) {
    IntVector d;
    try {
      d = dirs.generator().next(known);
    } catch (const DirectionsExhausted&) {
      break;
    }
    if (box.contains_z(z + d)) {
      dirs.insert(d);
      ++added;
    } else {
      rejected.insert(d);
    }
  }
  return added;
}

/// One discrete search from p (f_p = f(p)).
///
/// Directions are tried in stored order. The initial step is the smaller of
/// the direction's stepsize memory and the largest feasible integer step;
/// directions with no feasible step are skipped and keep their memory. The
/// first step achieving f <= f_p - xi is doubled while it stays feasible and
/// keeps the decrease, stored as the new memory, and returned. A failed probe
/// halves the memory (never below 1). After a failed sweep in which every
/// probed memory is 1, xi is multiplied by eta and the set is enriched; when
/// directions were added, all memories reset to 1. `dirs` is updated in place.
inline DsOutcome discrete_search(Evaluator& ev, const MixedPoint& p, double f_p, PrimitiveSet& dirs, double eta) {
  const Box& box = ev.box();
  DsOutcome out;
  out.point = p;
  out.f = f_p;
  const double target = f_p - dirs.xi();
  bool all_unit = true;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const IntVector& d = dirs.direction(i);
    const std::int64_t a_max = max_feasible_step(p.z, d, box);
    if (a_max <= 0) continue;
    ++out.probed;
    const std::int64_t a_ini = std::min(dirs.alpha(i), a_max);
    IntVector zt = p.z + a_ini * d;
    const double ft = ev.f(p.x, zt);
    if (ft <= target) {
      std::int64_t a = a_ini;
      double f_best = ft;
      while (a <= a_max / 2) {
        IntVector z2 = p.z + (2 * a) * d;
        const double f2 = ev.f(p.x, z2);
        if (!(f2 <= target)) break;
        a *= 2;
        zt = std::move(z2);
        f_best = f2;
      }
      dirs.set_alpha(i, a);
      out.point.z = std::move(zt);
      out.f = f_best;
      out.improved = true;
      return out;
    }
    const std::int64_t halved = std::max<std::int64_t>(1, dirs.alpha(i) / 2);
    dirs.set_alpha(i, halved);
    if (halved != 1) all_unit = false;
  }
  out.all_unit = all_unit;
  if (!all_unit) return out;

  dirs.set_xi(eta * dirs.xi());
  out.xi_reduced = true;
  out.added = enrich_directions(dirs, p.z, box);
  out.saturated = out.added == 0;
  if (out.added > 0) dirs.reset_alphas();
  return out;
}

}  // namespace gdfl
