// laminations.hpp
// Translate orbits of computed minimizers, recurrent-hull approximations,
// and the foliation/lamination dichotomy read off from the orbit values at
// the origin.  Everything here is a finite, stabilized approximation of a
// limit object: gaps are reported together with the shift bound they were
// enumerated at, and classification requires persistence under a larger
// bound rather than asserting the true closure.

#pragma once

#include "mblab/solvers.hpp"

namespace mblab {

struct OrbitSample {
  Field base;
  int shift_bound = 0;
  std::vector<std::pair<IntVec, double>> shifts;  // (kbar, T_kbar u (0))
  std::vector<double> sorted_values;              // deduplicated
};

inline OrbitSample build_orbit(const Field& u, int shift_bound, double dedup_tol = 1e-12) {
  const DomainSpec& dom = u.domain();
  for (int d = 0; d < dom.n2; ++d)
    if (shift_bound > std::min(-dom.lo[d], dom.hi[d]))
      throw ShiftTooLarge("orbit shift bound " + std::to_string(shift_bound) +
                          " exceeds the truncated domain");
  OrbitSample orb;
  orb.base = u;
  orb.shift_bound = shift_bound;

  std::vector<long long> origin(dom.n, 0);
  for (int d = 0; d < dom.n2; ++d) origin[d] = -static_cast<long long>(dom.lo[d]) * dom.m;

  IntVec k(dom.n + 1, -shift_bound);
  while (true) {
    orb.shifts.emplace_back(k, 0.0);
    int d = 0;
    for (; d <= dom.n; ++d) {
      if (++k[d] <= shift_bound) break;
      k[d] = -shift_bound;
    }
    if (d > dom.n) break;
  }
  parallel_for(static_cast<long long>(orb.shifts.size()), [&](long long s) {
    const IntVec& kk = orb.shifts[s].first;
    std::vector<long long> at(dom.n);
    for (int d = 0; d < dom.n; ++d) at[d] = origin[d] - kk[d] * dom.m;
    orb.shifts[s].second = u.value_at(at) + static_cast<double>(kk[dom.n]);
  });
  for (const auto& [kk, val] : orb.shifts) orb.sorted_values.push_back(val);
  std::sort(orb.sorted_values.begin(), orb.sorted_values.end());
  auto last = std::unique(orb.sorted_values.begin(), orb.sorted_values.end(),
                          [&](double a, double b) { return std::abs(a - b) <= dedup_tol; });
  orb.sorted_values.erase(last, orb.sorted_values.end());
  return orb;
}

enum class HullSign { sup_below, inf_above };

// Nodewise sup of T_kbar u over kbar . a^1 < 0 (resp. inf over > 0); the sign
// test is exact in the quadratic field.  The vertical translate u -+ 1 is
// always admissible, so the hull is defined at every node.
inline Field recurrent_hull(const Field& u, const DirectionSystem& sys, HullSign sign,
                            int shift_bound) {
  const DomainSpec& dom = u.domain();
  for (int d = 0; d < dom.n2; ++d)
    if (shift_bound >= dom.hi[d] - dom.lo[d])
      throw ShiftTooLarge("hull shift bound exceeds the truncated span");
  bool below = sign == HullSign::sup_below;
  Field hull(dom, 0.0);
  for (long long i = 0; i < hull.size(); ++i) hull[i] = u[i] + (below ? -1.0 : 1.0);

  IntVec k(dom.n + 1, -shift_bound);
  std::vector<long long> at(dom.n);
  while (true) {
    int s = dot(sys.dir1, k).sign();
    if ((below && s < 0) || (!below && s > 0)) {
      for_each_node(dom, [&](long long flat, const std::vector<long long>& idx) {
        if (!translate_in_range(dom, k, idx)) return;
        for (int d = 0; d < dom.n; ++d) at[d] = idx[d] - k[d] * dom.m;
        double cand = u.value_at(at) + static_cast<double>(k[dom.n]);
        if (below)
          hull[flat] = std::max(hull[flat], cand);
        else
          hull[flat] = std::min(hull[flat], cand);
      });
    }
    int d = 0;
    for (; d <= dom.n; ++d) {
      if (++k[d] <= shift_bound) break;
      k[d] = -shift_bound;
    }
    if (d > dom.n) break;
  }
  return hull;
}

struct Gap {
  double lower = 0.0;
  double upper = 0.0;
  double width = 0.0;
  IntVec rep_lower;  // shifts whose origin values bound the gap
  IntVec rep_upper;
};

enum class GapClass { foliation_like, lamination_like, undetermined };

inline std::string to_string(GapClass c) {
  switch (c) {
    case GapClass::foliation_like: return "foliation_like";
    case GapClass::lamination_like: return "lamination_like";
    default: return "undetermined";
  }
}

struct GapReport {
  std::vector<Gap> gaps;
  double max_width = 0.0;
  GapClass classification = GapClass::undetermined;
  int shift_bound = 0;
  int persistence_bound = 0;
};

namespace detail_lam {

// Orbit values folded to the unit circle (quotient by vertical integer
// shifts), with a representative shift per folded value.
struct CircleValues {
  std::vector<double> values;  // sorted in [0,1)
  std::vector<IntVec> reps;
};

inline CircleValues fold(const OrbitSample& orb, double dedup_tol) {
  std::vector<std::pair<double, IntVec>> pts;
  for (const auto& [k, val] : orb.shifts) {
    double f = val - std::floor(val);
    IntVec rep = k;
    rep[rep.size() - 1] -= static_cast<long long>(std::floor(val));
    pts.emplace_back(f, rep);
  }
  std::sort(pts.begin(), pts.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  CircleValues cv;
  for (const auto& [f, rep] : pts) {
    if (!cv.values.empty() && f - cv.values.back() <= dedup_tol) continue;
    // also merge across the wrap
    if (!cv.values.empty() && (1.0 - f) + cv.values.front() <= dedup_tol) continue;
    cv.values.push_back(f);
    cv.reps.push_back(rep);
  }
  return cv;
}

inline std::vector<Gap> gaps_of(const CircleValues& cv, double min_width) {
  std::vector<Gap> out;
  size_t nv = cv.values.size();
  if (nv == 0) return out;
  for (size_t i = 0; i < nv; ++i) {
    size_t j = (i + 1) % nv;
    double lo = cv.values[i];
    double hi = (j == 0) ? cv.values[j] + 1.0 : cv.values[j];
    double w = hi - lo;
    if (w > min_width) {
      Gap g;
      g.lower = lo;
      g.upper = hi;
      g.width = w;
      g.rep_lower = cv.reps[i];
      g.rep_upper = cv.reps[j];
      if (j == 0) g.rep_upper[g.rep_upper.size() - 1] += 1;
      out.push_back(g);
    }
  }
  return out;
}

}  // namespace detail_lam

struct GapDetectConfig {
  double resolution_floor = 1e-9;
  int persistence_step = 2;
  double dedup_tol = 1e-9;
};

// Consecutive orbit values (on the vertical unit circle) further apart than
// max(tol, resolution floor) are gaps.  foliation_like when nothing exceeds
// tol; lamination_like when the dominant gap survives a larger shift bound.
inline GapReport detect_gaps(const OrbitSample& orbit, double tol,
                             const GapDetectConfig& gcfg = {}) {
  GapReport rep;
  rep.shift_bound = orbit.shift_bound;
  auto cv = detail_lam::fold(orbit, gcfg.dedup_tol);
  rep.gaps = detail_lam::gaps_of(cv, std::max(tol, gcfg.resolution_floor));
  for (const auto& g : rep.gaps) rep.max_width = std::max(rep.max_width, g.width);

  if (rep.gaps.empty() || rep.max_width < tol) {
    rep.classification = GapClass::foliation_like;
    return rep;
  }
  // persistence probe at a larger bound
  rep.persistence_bound = orbit.shift_bound + gcfg.persistence_step;
  GapReport wide;
  try {
    auto orbit2 = build_orbit(orbit.base, rep.persistence_bound, gcfg.dedup_tol);
    auto cv2 = detail_lam::fold(orbit2, gcfg.dedup_tol);
    wide.gaps = detail_lam::gaps_of(cv2, std::max(tol, gcfg.resolution_floor));
  } catch (const ShiftTooLarge&) {
    rep.classification = GapClass::undetermined;
    return rep;
  }
  const Gap* dominant = nullptr;
  for (const auto& g : rep.gaps)
    if (!dominant || g.width > dominant->width) dominant = &g;
  bool persists = false;
  for (const auto& g : wide.gaps) {
    bool overlap = g.lower < dominant->upper && dominant->lower < g.upper;
    if (overlap && g.width >= tol) persists = true;
  }
  rep.classification = persists ? GapClass::lamination_like : GapClass::undetermined;
  return rep;
}

// Materialized representative pair of a gap: the two translates of the orbit
// base whose origin values bound it.
inline ConstraintPair gap_representatives(const OrbitSample& orbit, const Gap& gap) {
  ConstraintPair pair{translate(orbit.base, gap.rep_lower),
                      translate(orbit.base, gap.rep_upper)};
  return pair;
}

struct RecurrentApproximation {
  std::vector<RotationVector> stage_rotations;  // convergent rotation per stage
  std::vector<SolveResult> stages;
  std::vector<double> c0_deltas;  // C0 distance of consecutive stages on [0,1]^n
};

// Approximates M^rec(a^1) along continued-fraction convergents: each stage
// minimizes on the fundamental torus of the convergent rotation, normalized
// to value in [0, 1) at the origin; the reported C0 deltas monitor the
// Cauchy behavior the compactness lemma suggests.
inline RecurrentApproximation approximate_recurrent(const RotationVector& alpha, int depth,
                                                    const PotentialSpec& pot, int m,
                                                    const SolverConfig& cfg) {
  if (depth < 1) throw std::invalid_argument("depth >= 1 required");
  bool any_irrational = false;
  for (const auto& a : alpha.entries) any_irrational |= !a.is_rational();
  if (!any_irrational) throw RationalInput();

  RecurrentApproximation out;
  for (int k = 1; k <= depth; ++k) {
    RotationVector ak;
    for (const auto& a : alpha.entries) {
      if (a.is_rational()) {
        ak.entries.push_back(a);
      } else {
        auto cs = convergents(a, k);
        ak.entries.push_back(QuadraticNumber(cs.back()));
      }
    }
    auto dom = periodic_domain_for(ak, m);
    auto res = minimize_periodic(pot, ak, dom, cfg);
    double at0 = res.field.value_at_origin();
    double shift = std::floor(at0);
    if (shift != 0.0)
      for (long long i = 0; i < res.field.size(); ++i) res.field[i] -= shift;
    out.stage_rotations.push_back(ak);
    out.stages.push_back(std::move(res));
  }

  // pairwise C0 distances of consecutive stages over the window [0,1]^n
  for (size_t s = 0; s + 1 < out.stages.size(); ++s) {
    const Field& a = out.stages[s].field;
    const Field& b = out.stages[s + 1].field;
    int n = a.domain().n;
    std::vector<long long> idx(n, 0);
    double worst = 0.0;
    bool done = false;
    while (!done) {
      double va = a.value_at(idx), vb = b.value_at(idx);
      worst = std::max(worst, std::abs(va - vb));
      int d = 0;
      for (; d < n; ++d) {
        if (++idx[d] <= m) break;
        idx[d] = 0;
      }
      done = d == n;
    }
    out.c0_deltas.push_back(worst);
  }
  return out;
}

}  // namespace mblab
