// solvers.hpp
// Constrained minimization of the discrete energy by nodewise relaxation:
// each update solves the one-dimensional local problem exactly (safeguarded
// Newton when the local energy is strictly convex, global sampling otherwise)
// and projects into the obstacle interval.  Updates never increase the global
// energy; with relaxation <= 1 and convex local solves the sweep map is
// monotone, the discrete counterpart of the comparison structure the
// continuum arguments use.
//
// Residuals are reported as sup |-sum_k (1/lambda_k) D^2_k u + F_u| over
// interior nodes; the convergence control uses its KKT projection, which
// ignores the one-sided part at obstacle-contact nodes.

#pragma once

#include <random>

#include "mblab/functionals.hpp"

namespace mblab {

struct GapConditionViolated : std::runtime_error {
  explicit GapConditionViolated(const std::string& w) : std::runtime_error(w) {}
};

enum class Scheme { gauss_seidel_monotone, projected_gradient };

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "gauss_seidel_monotone") return Scheme::gauss_seidel_monotone;
  if (s == "projected_gradient") return Scheme::projected_gradient;
  throw ParseError("unknown scheme '" + s + "'");
}

struct SolverConfig {
  long long max_iters = 200000;  // sweeps
  double residual_tol = 1e-8;
  double energy_tol = 1e-10;
  Scheme scheme = Scheme::gauss_seidel_monotone;
  double relaxation = 1.0;
  unsigned long long seed = 0;
};

struct SolveResult {
  Field field;
  RenormValue energy;
  double residual = 0.0;
  long long iterations = 0;
  bool converged = false;
};

using ProgressFn =
    std::function<void(long long iter, double energy, double residual, long long contacts)>;

namespace relax {

// Precomputed per-node stencil data: neighbor indices with seam offsets,
// per-edge quadratic coefficients, and the node's F-quadrature weight.
struct Workspace {
  DomainSpec dom;
  PotentialSpec pot;
  int n = 0;
  long long nodes = 0;
  std::vector<long long> nb_idx;   // nodes x 2n, -1 if absent
  std::vector<double> nb_add;      // seam offset added to the neighbor value
  std::vector<double> edge_coeff;  // nodes x 2n, kappa_e
  std::vector<double> fweight;     // nodes, weight of F(x_i, u_i)
  std::vector<double> coords;      // nodes x n
  std::vector<double> A;           // nodes, 2 sum kappa
  std::vector<char> active;        // 0 = held fixed
  double fuu_sup = 0.0;

  explicit Workspace(const DomainSpec& d, const PotentialSpec& p) : dom(d), pot(p) {
    n = dom.n;
    nodes = dom.total_nodes();
    nb_idx.assign(nodes * 2 * n, -1);
    nb_add.assign(nodes * 2 * n, 0.0);
    edge_coeff.assign(nodes * 2 * n, 0.0);
    fweight.assign(nodes, 0.0);
    coords.assign(nodes * n, 0.0);
    A.assign(nodes, 0.0);
    active.assign(nodes, 1);
    fuu_sup = sup_norm_Fuu(pot);

    double h = dom.h();
    double voln = 1.0;
    for (int d2 = 0; d2 < n; ++d2) voln *= h;
    double base_edge = voln / (h * h) / (1 << n);

    std::vector<long long> nb(n);
    for_each_node(dom, [&](long long flat, const std::vector<long long>& idx) {
      // cell-sharing options per dimension (1 at a truncated wall, else 2)
      std::vector<int> opts(n, 2);
      double fw = voln;
      for (int d2 = 0; d2 < n; ++d2) {
        coords[flat * n + d2] = dom.coord(d2, idx[d2]);
        if (d2 < dom.n2 && (idx[d2] == 0 || idx[d2] == dom.node_count(d2) - 1)) opts[d2] = 1;
        fw *= opts[d2] / 2.0;
      }
      fweight[flat] = fw;
      for (int k = 0; k < n; ++k) {
        double share = 1.0;
        for (int d2 = 0; d2 < n; ++d2)
          if (d2 != k) share *= opts[d2];
        for (int side = 0; side < 2; ++side) {
          long long pos = flat * 2 * n + 2 * k + side;
          nb = idx;
          nb[k] += side ? 1 : -1;
          double add = 0.0;
          if (k < dom.n2) {
            if (nb[k] < 0 || nb[k] >= dom.node_count(k)) continue;
          } else {
            long long nk = dom.node_count(k);
            if (nb[k] < 0) {
              nb[k] += nk;
              add = -dom.seam_jump[k - dom.n2];
            } else if (nb[k] >= nk) {
              nb[k] -= nk;
              add = dom.seam_jump[k - dom.n2];
            }
          }
          long long f = 0;
          for (int d2 = 0; d2 < n; ++d2) f = f * dom.node_count(d2) + nb[d2];
          nb_idx[pos] = f;
          nb_add[pos] = add;
          edge_coeff[pos] = share * base_edge / dom.lambdas[k];
        }
      }
      double a = 0.0;
      for (int k = 0; k < 2 * n; ++k) a += edge_coeff[flat * 2 * n + k];
      A[flat] = 2.0 * a;
    });
  }

  // local energy restricted to node i as a function of its value s
  double local_energy(const std::vector<double>& u, long long i, double s,
                      std::vector<double>& xbuf) const {
    double e = 0.0;
    for (int k = 0; k < 2 * n; ++k) {
      long long pos = i * 2 * n + k;
      if (nb_idx[pos] < 0) continue;
      double diff = s - (u[nb_idx[pos]] + nb_add[pos]);
      e += edge_coeff[pos] * diff * diff;
    }
    if (!pot.terms.empty()) {
      for (int d2 = 0; d2 < n; ++d2) xbuf[d2] = coords[i * n + d2];
      e += fweight[i] * eval_F(pot, xbuf, s);
    }
    return e;
  }

  // interior PDE residual -Delta_lambda u + F_u; quiet NaN if not interior
  double node_residual(const std::vector<double>& u, long long i,
                       std::vector<double>& xbuf) const {
    double g = 0.0;
    for (int k = 0; k < 2 * n; ++k) {
      long long pos = i * 2 * n + k;
      if (nb_idx[pos] < 0) return std::numeric_limits<double>::quiet_NaN();
      g += 2.0 * edge_coeff[pos] * (u[i] - (u[nb_idx[pos]] + nb_add[pos]));
    }
    double fu = 0.0;
    if (!pot.terms.empty()) {
      for (int d2 = 0; d2 < n; ++d2) xbuf[d2] = coords[i * n + d2];
      fu = eval_Fu(pot, xbuf, u[i]);
    }
    // g = voln * (-Delta_lambda u) up to the boundary share factors; divide
    // by the node's F weight to recover the PDE scaling
    return g / fweight[i] + fu;
  }
};

// Exact minimizer of the local energy over [lo, hi]; smallest minimizer wins
// ties.  A strictly convex local energy gets safeguarded Newton on e';
// otherwise coarse sampling plus polish.
inline double line_minimize(const Workspace& ws, const std::vector<double>& u, long long i,
                            double lo, double hi, std::vector<double>& xbuf) {
  double a = ws.A[i];
  double b = 0.0;
  for (int k = 0; k < 2 * ws.n; ++k) {
    long long pos = i * 2 * ws.n + k;
    if (ws.nb_idx[pos] < 0) continue;
    b += 2.0 * ws.edge_coeff[pos] * (u[ws.nb_idx[pos]] + ws.nb_add[pos]);
  }
  bool has_pot = !ws.pot.terms.empty();
  if (has_pot)
    for (int d2 = 0; d2 < ws.n; ++d2) xbuf[d2] = ws.coords[i * ws.n + d2];
  double wf = ws.fweight[i];

  auto grad = [&](double s) {
    double g = a * s - b;
    if (has_pot) g += wf * eval_Fu(ws.pot, xbuf, s);
    return g;
  };
  auto hess = [&](double s) {
    double h = a;
    if (has_pot) h += wf * eval_Fuu(ws.pot, xbuf, s);
    return h;
  };

  bool convex = a > wf * ws.fuu_sup;
  auto newton = [&](double s, double blo, double bhi) {
    for (int it = 0; it < 60; ++it) {
      double g = grad(s);
      if (g > 0)
        bhi = s;
      else
        blo = s;
      double hh = hess(s);
      double step = hh > 0 ? g / hh : 0.0;
      double snew = s - step;
      if (!(snew > blo && snew < bhi)) snew = 0.5 * (blo + bhi);
      if (std::abs(snew - s) < 1e-15 * (1.0 + std::abs(s))) return snew;
      s = snew;
    }
    return s;
  };

  if (convex) {
    // root of grad lies within (b - wf sup|F_u|)/a .. (b + ...)/a
    double fs = has_pot ? sup_norm_Fu(ws.pot) : 0.0;
    double blo = (b - wf * fs) / a - 1.0, bhi = (b + wf * fs) / a + 1.0;
    if (grad(lo) >= 0.0) return lo;
    if (grad(hi) <= 0.0) return hi;
    double s = newton(std::clamp(u[i], lo, hi), std::max(blo, lo), std::min(bhi, hi));
    return std::clamp(s, lo, hi);
  }

  // nonconvex: global search over the obstacle interval
  const int samples = 32;
  double best_s = lo;
  double best_e = ws.local_energy(u, i, lo, xbuf);
  auto consider = [&](double s) {
    double e = ws.local_energy(u, i, s, xbuf);
    if (e < best_e - 1e-15 || (std::abs(e - best_e) <= 1e-15 && s < best_s)) {
      best_e = e;
      best_s = s;
    }
  };
  consider(hi);
  for (int k = 0; k <= samples; ++k) {
    double s0 = lo + (hi - lo) * k / samples;
    double s = newton(s0, lo, hi);
    consider(std::clamp(s, lo, hi));
  }
  return best_s;
}

struct SweepStats {
  double max_update = 0.0;
  long long contacts = 0;
};

inline SweepStats sweep(const Workspace& ws, std::vector<double>& u, const ConstraintPair* pair,
                        double omega, std::vector<double>& xbuf) {
  SweepStats st;
  bool relaxed = omega != 1.0;
  for (long long i = 0; i < ws.nodes; ++i) {
    if (!ws.active[i]) continue;
    double lo = pair ? pair->lower.values()[i] : -1e100;
    double hi = pair ? pair->upper.values()[i] : 1e100;
    double sstar = line_minimize(ws, u, i, lo, hi, xbuf);
    double snew = sstar;
    if (relaxed) {
      snew = std::clamp(u[i] + omega * (sstar - u[i]), lo, hi);
      // keep the sweep energy-monotone whatever omega does: the relaxed
      // point must not lie above the node's current energy
      if (ws.local_energy(u, i, snew, xbuf) > ws.local_energy(u, i, u[i], xbuf)) snew = sstar;
    }
    st.max_update = std::max(st.max_update, std::abs(snew - u[i]));
    u[i] = snew;
    if (pair && (u[i] <= lo || u[i] >= hi)) ++st.contacts;
  }
  return st;
}

// KKT-projected residual: one-sided at contact nodes, sup over active
// interior nodes.
inline double projected_residual(const Workspace& ws, const std::vector<double>& u,
                                 const ConstraintPair* pair, std::vector<double>& xbuf) {
  double worst = 0.0;
  for (long long i = 0; i < ws.nodes; ++i) {
    if (!ws.active[i]) continue;
    double r = ws.node_residual(u, i, xbuf);
    if (std::isnan(r)) continue;
    if (pair) {
      if (u[i] <= pair->lower.values()[i]) r = std::min(r, 0.0);
      if (u[i] >= pair->upper.values()[i]) r = std::max(r, 0.0);
    }
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

inline long long count_contacts(const std::vector<double>& u, const ConstraintPair* pair,
                                const Workspace& ws) {
  if (!pair) return 0;
  long long c = 0;
  for (long long i = 0; i < ws.nodes; ++i)
    if (ws.active[i] &&
        (u[i] <= pair->lower.values()[i] || u[i] >= pair->upper.values()[i]))
      ++c;
  return c;
}

// Shared driver: iterate sweeps (or projected-gradient steps) to the
// projected-residual tolerance.
inline std::pair<long long, bool> drive(const Workspace& ws, Field& u, const ConstraintPair* pair,
                                        const SolverConfig& cfg,
                                        const ProgressFn& progress = nullptr) {
  std::vector<double> xbuf(ws.n);
  std::vector<double>& vals = u.values();
  // relaxation > 1 stays energy-monotone through the sweep safeguard; the
  // nodewise comparison principle is guaranteed for omega <= 1
  double omega = cfg.relaxation;

  double lipschitz = 0.0;
  if (cfg.scheme == Scheme::projected_gradient) {
    for (long long i = 0; i < ws.nodes; ++i)
      lipschitz = std::max(lipschitz, ws.A[i] + ws.fweight[i] * ws.fuu_sup);
  }

  long long it = 0;
  bool converged = false;
  double last_energy = std::numeric_limits<double>::infinity();
  int check_every = 16;
  for (; it < cfg.max_iters; ++it) {
    SweepStats st;
    if (cfg.scheme == Scheme::gauss_seidel_monotone) {
      st = sweep(ws, vals, pair, omega, xbuf);
    } else {
      // projected gradient with the 1/L step
      std::vector<double> g(ws.nodes, 0.0);
      for (long long i = 0; i < ws.nodes; ++i) {
        if (!ws.active[i]) continue;
        double gi = ws.A[i] * vals[i];
        double bi = 0.0;
        for (int k = 0; k < 2 * ws.n; ++k) {
          long long pos = i * 2 * ws.n + k;
          if (ws.nb_idx[pos] < 0) continue;
          bi += 2.0 * ws.edge_coeff[pos] * (vals[ws.nb_idx[pos]] + ws.nb_add[pos]);
        }
        gi -= bi;
        if (!ws.pot.terms.empty()) {
          for (int d2 = 0; d2 < ws.n; ++d2) xbuf[d2] = ws.coords[i * ws.n + d2];
          gi += ws.fweight[i] * eval_Fu(ws.pot, xbuf, vals[i]);
        }
        g[i] = gi;
      }
      for (long long i = 0; i < ws.nodes; ++i) {
        if (!ws.active[i]) continue;
        double snew = vals[i] - g[i] / lipschitz;
        if (pair) snew = std::clamp(snew, pair->lower.values()[i], pair->upper.values()[i]);
        st.max_update = std::max(st.max_update, std::abs(snew - vals[i]));
        vals[i] = snew;
      }
    }

    bool probe = (it % check_every == check_every - 1) || st.max_update < 1e-15;
    if (probe) {
      double res = projected_residual(ws, vals, pair, xbuf);
      if (progress) {
        double e = total_energy(u, ws.pot);
        progress(it + 1, e, res, count_contacts(vals, pair, ws));
        if (std::abs(last_energy - e) < cfg.energy_tol && res <= cfg.residual_tol) {
          converged = true;
          ++it;
          break;
        }
        last_energy = e;
      }
      if (res <= cfg.residual_tol) {
        converged = true;
        ++it;
        break;
      }
      if (st.max_update < 1e-15) break;  // stalled at machine precision
    }
  }
  return {it, converged};
}

}  // namespace relax

inline double residual(const Field& u, const PotentialSpec& pot) {
  relax::Workspace ws(u.domain(), pot);
  std::vector<double> xbuf(ws.n);
  double worst = 0.0;
  for (long long i = 0; i < ws.nodes; ++i) {
    double r = ws.node_residual(u.values(), i, xbuf);
    if (!std::isnan(r)) worst = std::max(worst, std::abs(r));
  }
  return worst;
}

inline Field random_feasible(const ConstraintPair& pair, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Field u(pair.lower.domain());
  for (long long i = 0; i < u.size(); ++i)
    u[i] = pair.lower[i] + unif(rng) * (pair.upper[i] - pair.lower[i]);
  return u;
}

inline Field affine_field(const DomainSpec& dom, const std::vector<double>& slope,
                          double offset = 0.0) {
  Field u(dom);
  for_each_node(dom, [&](long long flat, const std::vector<long long>& idx) {
    double s = offset;
    for (int d = 0; d < dom.n; ++d) s += slope[d] * dom.coord(d, idx[d]);
    u[flat] = s;
  });
  return u;
}

// Fundamental-torus domain of Lambda_2 for a rational rotation vector:
// period = denominator, seam jump = numerator per direction.
inline DomainSpec periodic_domain_for(const RotationVector& alpha, int m,
                                      std::vector<double> lambdas = {},
                                      std::vector<int> fold = {}) {
  int n = alpha.n();
  std::vector<int> periods(n), jumps(n);
  for (int d = 0; d < n; ++d) {
    const QuadraticNumber& a = alpha.entries[d];
    if (!a.is_rational())
      throw std::invalid_argument("periodic domain needs a rational rotation vector");
    int q = static_cast<int>(a.rational_part().den());
    int p = static_cast<int>(a.rational_part().num());
    int f = fold.empty() ? 1 : fold[d];
    periods[d] = q * f;
    jumps[d] = p * f;
  }
  return DomainSpec::torus(n, periods, jumps, m, std::move(lambdas));
}

// Periodic minimizer u = alpha . x + p(x) on the fundamental torus.
inline SolveResult minimize_periodic(const PotentialSpec& pot, const RotationVector& alpha,
                                     const DomainSpec& dom, const SolverConfig& cfg,
                                     const Field* init = nullptr,
                                     const ProgressFn& progress = nullptr) {
  if (dom.n2 != 0)
    throw std::invalid_argument("minimize_periodic expects a fully periodic domain");
  for (int d = 0; d < dom.n; ++d) {
    QuadraticNumber t = alpha.entries[d] * QuadraticNumber(Rational(dom.periods[d]));
    if (!t.is_rational() || t.rational_part().den() != 1 ||
        t.rational_part().num() != dom.seam_jump[d])
      throw std::invalid_argument("domain periods/jumps do not match the rotation vector");
  }
  SolveResult out;
  if (init) {
    out.field = *init;
  } else {
    std::vector<double> slope(dom.n);
    for (int d = 0; d < dom.n; ++d) slope[d] = alpha.entries[d].to_double();
    out.field = affine_field(dom, slope);
  }
  relax::Workspace ws(dom, pot);
  auto [iters, conv] = relax::drive(ws, out.field, nullptr, cfg, progress);
  out.iterations = iters;
  out.converged = conv;
  out.residual = residual(out.field, pot);
  out.energy.total = total_energy(out.field, pot);
  out.energy.window_terms[{}] = out.energy.total;
  out.energy.converged = conv;
  return out;
}

// J1 minimization in the gap [v, w] from a feasible initializer.  On
// truncated directions the outermost node layers are held at v, the discrete
// form of the cut-off construction that makes c_1 = 0 meaningful on a finite
// window (free boundaries would let the minimizer detach and undercut it).
inline SolveResult minimize_J1(const PotentialSpec& pot, const ConstraintPair& pair,
                               const Field& init, const SolverConfig& cfg,
                               const ProgressFn& progress = nullptr) {
  auto mem = membership(init, ConstraintClass::Gamma1, pair, 1e-9);
  if (!mem.ok) throw NotInGamma1(mem.first_violation);
  SolveResult out;
  out.field = clamp(init, pair);
  relax::Workspace ws(init.domain(), pot);
  const DomainSpec& dom = init.domain();
  for_each_node(dom, [&](long long flat, const std::vector<long long>& idx) {
    for (int d = 0; d < dom.n2; ++d)
      if (idx[d] == 0 || idx[d] == dom.node_count(d) - 1) {
        ws.active[flat] = 0;
        out.field[flat] = pair.lower[flat];
      }
  });
  auto [iters, conv] = relax::drive(ws, out.field, &pair, cfg, progress);
  out.iterations = iters;
  out.converged = conv;
  std::vector<double> xbuf(ws.n);
  out.residual = relax::projected_residual(ws, out.field.values(), &pair, xbuf);
  out.energy = J1(out.field, pair.lower, pot, pair, cfg.residual_tol);
  return out;
}

namespace detail_j2 {

// Phase-normalization box integrals: mean of u over [0,1]^{n2'} x [i, i+1] x periodic.
inline double box_integral(const Field& u, int i) {
  const DomainSpec& dom = u.domain();
  int sd = strip_dir(dom);
  detail_fun::Box box;
  for (int d = 0; d < dom.n2; ++d) {
    box.a.push_back(d == sd ? i : 0);
    box.b.push_back(d == sd ? i : 0);
  }
  quad::CellCorners cc;
  return detail_fun::sum_over_box(dom, box, [&](const std::vector<long long>& c) {
    quad::gather(u, c, cc);
    int corners = 1 << dom.n;
    double vol = 1.0;
    for (int d = 0; d < dom.n; ++d) vol *= dom.h();
    double acc = 0.0;
    for (int b = 0; b < corners; ++b) acc += cc.value[b];
    return acc * vol / corners;
  });
}

}  // namespace detail_j2

// Heteroclinic minimizer of J2 between the adjacent pair (v, w), boundary
// strips held at v (left) and w (right), interface phase pinned by the
// box-integral sandwich.
inline SolveResult minimize_J2(const PotentialSpec& pot, const ConstraintPair& pair,
                               const Field& init, const SolverConfig& cfg,
                               const ProgressFn& progress = nullptr) {
  const DomainSpec& dom = init.domain();
  int sd = strip_dir(dom);
  double h = dom.h();

  double gap_sup = 0.0, gap_over = 0.0;
  for (long long i = 0; i < pair.lower.size(); ++i) {
    gap_sup = std::max(gap_sup, pair.upper[i] - pair.lower[i]);
    gap_over = std::max(gap_over, pair.upper[i] - pair.lower[i] - 1.0);
  }
  if (gap_sup <= 10.0 * cfg.residual_tol)
    throw GapConditionViolated("empty gap: sup(w - v) = " + std::to_string(gap_sup));
  if (gap_over > 10.0 * h)
    throw GapConditionViolated("pair violates w - v <= 1, excess " + std::to_string(gap_over));

  auto mem = membership(init, ConstraintClass::Gamma1, pair, 1e-9);
  if (!mem.ok) throw NotInGamma2(mem.first_violation);

  SolveResult out;
  out.field = clamp(init, pair);
  relax::Workspace ws(dom, pot);
  // clamp the outermost strips: x_sd <= lo+1 to v, x_sd >= hi-1 to w
  for_each_node(dom, [&](long long flat, const std::vector<long long>& idx) {
    long long pos = idx[sd];
    if (pos <= dom.m) {
      ws.active[flat] = 0;
      out.field[flat] = pair.lower[flat];
    } else if (pos >= static_cast<long long>(dom.node_count(sd)) - 1 - dom.m) {
      ws.active[flat] = 0;
      out.field[flat] = pair.upper[flat];
    }
  });

  auto [iters, conv] = relax::drive(ws, out.field, &pair, cfg, progress);
  out.iterations = iters;
  out.converged = conv;

  // phase normalization: pick the integer strip shift putting the interface
  // across 0, i.e. mean over S_{-1} <= (v+w)/2 mean over S_0 <= mean over S_0
  if (dom.lo[sd] <= -1 && dom.hi[sd] >= 1) {
    double target = 0.5 * (detail_j2::box_integral(pair.lower, 0) +
                           detail_j2::box_integral(pair.upper, 0));
    int span = dom.hi[sd] - dom.lo[sd];
    int best_j = 0;
    bool found = false;
    for (int dist = 0; dist < span && !found; ++dist)
      for (int sign = 1; sign >= -1 && !found; sign -= 2) {
        int j = sign * dist;
        if (-1 + j < dom.lo[sd] || j > dom.hi[sd] - 1) continue;
        if (std::abs(j) >= span - 1) continue;  // translate must stay in range
        double a_m1 = detail_j2::box_integral(out.field, -1 + j);
        double a_0 = detail_j2::box_integral(out.field, 0 + j);
        if (a_m1 <= target + 1e-12 && target <= a_0 + 1e-12) {
          best_j = j;
          found = true;
        }
        if (dist == 0) break;  // j = +0 equals -0
      }
    if (found && best_j != 0) {
      // move strips (-1+j, 0+j) onto (-1, 0): U_new(x) = U(x + j e_sd)
      IntVec kbar(dom.n + 1, 0);
      kbar[sd] = -best_j;
      out.field = translate(out.field, kbar);
      for_each_node(dom, [&](long long flat, const std::vector<long long>& idx) {
        long long pos = idx[sd];
        if (pos <= dom.m) out.field[flat] = pair.lower[flat];
        if (pos >= static_cast<long long>(dom.node_count(sd)) - 1 - dom.m)
          out.field[flat] = pair.upper[flat];
      });
    }
  }

  std::vector<double> xbuf(ws.n);
  out.residual = relax::projected_residual(ws, out.field.values(), &pair, xbuf);
  if (out.residual > cfg.residual_tol) out.converged = false;
  out.energy = J2(out.field, pair, pot, std::max(10.0 * h, 1e-3));

  // certify the heteroclinic asymptotics and the monotone ordering 3.2(c)
  double tol = std::max(10.0 * h, 1e-3);
  double left = strip_L2(out.field, pair.lower, dom.lo[sd]);
  double right = strip_L2(out.field, pair.upper, dom.hi[sd] - 1);
  IntVec up(dom.n + 1, 0);
  up[sd] = -1;
  Field tau = translate(out.field, up);
  double order_viol = 0.0;
  for_each_node(dom, [&](long long flat, const std::vector<long long>& idx) {
    if (!translate_in_range(dom, up, idx)) return;
    order_viol = std::max(order_viol, out.field[flat] - tau[flat]);
  });
  if (left > tol || right > tol || order_viol > 10.0 * cfg.residual_tol) out.converged = false;
  return out;
}

}  // namespace mblab
