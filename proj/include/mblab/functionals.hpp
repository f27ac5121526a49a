// functionals.hpp
// Discrete renormalized functionals.  The cell quadrature pairs forward
// differences per cell edge for the gradient with the corner average for the
// potential; with this choice meet/join splits the F-part exactly nodewise
// and the Dirichlet part is submodular, so
//   J(min(a,b)) + J(max(a,b)) <= J(a) + J(b)
// holds on the grid up to roundoff, the discrete form of the splitting
// identity the minimization arguments rest on.
//
// J1 windows are unions of unit boxes T_k in the truncated directions;
// J2 sums J1 of unit strips in the last truncated direction.

#pragma once

#include <map>
#include <optional>

#include "mblab/grid.hpp"
#include "mblab/potential.hpp"

namespace mblab {

struct WindowOutOfRange : std::runtime_error {
  WindowOutOfRange() : std::runtime_error("window outside the truncated domain") {}
};
struct NotInGamma1 : std::runtime_error {
  explicit NotInGamma1(const std::string& w) : std::runtime_error("not in Gamma_1: " + w) {}
};
struct NotInGamma2 : std::runtime_error {
  explicit NotInGamma2(const std::string& w) : std::runtime_error("not in Gamma_2: " + w) {}
};

struct RenormValue {
  double total = 0.0;
  std::map<std::vector<int>, double> window_terms;
  double tail_bound = 0.0;
  bool converged = false;
};

struct BoundConstants {
  double K1 = 0.0;
  double K2 = 0.0;
  double C_alpha = 0.0;
  double Fu_sup = 0.0;
  double gap_L1 = 0.0;
};

namespace quad {

// Per-cell corner bookkeeping: node index and additive seam offset per corner.
struct CellCorners {
  int n = 0;
  std::array<long long, 8> flat{};
  std::array<double, 8> add{};
  std::array<double, 8> value{};
  std::vector<double> x0;  // base corner coordinates
};

inline void gather(const Field& u, const std::vector<long long>& cell, CellCorners& cc) {
  const DomainSpec& dom = u.domain();
  int n = dom.n;
  cc.n = n;
  cc.x0.resize(n);
  std::array<long long, 4> i0{}, i1{};
  std::array<double, 4> a1{};
  for (int d = 0; d < n; ++d) {
    long long nd = dom.node_count(d);
    i0[d] = cell[d];
    long long nxt = cell[d] + 1;
    double add = 0.0;
    if (d >= dom.n2 && nxt >= nd) {
      nxt -= nd;
      add = dom.seam_jump[d - dom.n2];
    }
    i1[d] = nxt;
    a1[d] = add;
    cc.x0[d] = dom.coord(d, cell[d]);
  }
  int corners = 1 << n;
  for (int b = 0; b < corners; ++b) {
    long long flat = 0;
    double add = 0.0;
    for (int d = 0; d < n; ++d) {
      bool hi = (b >> d) & 1;
      flat = flat * dom.node_count(d) + (hi ? i1[d] : i0[d]);
      add += hi ? a1[d] : 0.0;
    }
    cc.flat[b] = flat;
    cc.add[b] = add;
    cc.value[b] = u[flat] + add;
  }
}

}  // namespace quad

// Midpoint-free cell Lagrangian: (1/2) sum_k (1/lambda_k) <(D_k u)^2>_edges
// plus the corner average of F, times the cell volume.
inline double cell_energy(const Field& u, const PotentialSpec& pot,
                          const std::vector<long long>& cell) {
  const DomainSpec& dom = u.domain();
  int n = dom.n;
  double h = dom.h();
  quad::CellCorners cc;
  quad::gather(u, cell, cc);
  int corners = 1 << n;

  double vol = 1.0;
  for (int d = 0; d < n; ++d) vol *= h;

  double dirichlet = 0.0;
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    for (int b = 0; b < corners; ++b) {
      if ((b >> k) & 1) continue;
      double diff = (cc.value[b | (1 << k)] - cc.value[b]) / h;
      acc += diff * diff;
    }
    dirichlet += acc / (corners / 2) / dom.lambdas[k];
  }
  dirichlet *= 0.5 * vol;

  double fpart = 0.0;
  if (!pot.terms.empty()) {
    std::vector<double> x(n);
    for (int b = 0; b < corners; ++b) {
      for (int d = 0; d < n; ++d) x[d] = cc.x0[d] + (((b >> d) & 1) ? h : 0.0);
      fpart += eval_F(pot, x, cc.value[b]);
    }
    fpart *= vol / corners;
  }
  return dirichlet + fpart;
}

inline double local_lagrangian(const Field& u, const PotentialSpec& pot,
                               const std::vector<long long>& cell) {
  return cell_energy(u, pot, cell);
}

inline void for_each_cell(const DomainSpec& dom,
                          const std::function<void(const std::vector<long long>&)>& f) {
  std::vector<long long> c(dom.n, 0);
  long long total = dom.total_cells();
  for (long long i = 0; i < total; ++i) {
    f(c);
    for (int d = dom.n - 1; d >= 0; --d) {
      if (++c[d] < dom.cell_count(d)) break;
      c[d] = 0;
    }
  }
}

// Total discrete energy over the whole grid.
inline double total_energy(const Field& u, const PotentialSpec& pot) {
  std::vector<double> cells;
  cells.reserve(u.domain().total_cells());
  for_each_cell(u.domain(), [&](const std::vector<long long>& c) {
    cells.push_back(cell_energy(u, pot, c));
  });
  return pairwise_sum(cells);
}

namespace detail_fun {

// Lattice box [a, b] (unit-box indices, inclusive) in the truncated dims.
struct Box {
  std::vector<int> a, b;
};

inline Box whole_domain_box(const DomainSpec& dom) {
  Box box;
  for (int d = 0; d < dom.n2; ++d) {
    box.a.push_back(dom.lo[d]);
    box.b.push_back(dom.hi[d] - 1);
  }
  return box;
}

inline void check_box(const DomainSpec& dom, const Box& box) {
  if (static_cast<int>(box.a.size()) != dom.n2) throw WindowOutOfRange();
  for (int d = 0; d < dom.n2; ++d)
    if (box.a[d] < dom.lo[d] || box.b[d] + 1 > dom.hi[d] || box.a[d] > box.b[d])
      throw WindowOutOfRange();
}

// Sum over the cells of all unit boxes in [a, b] of f(cell).
inline double sum_over_box(const DomainSpec& dom, const Box& box,
                           const std::function<double(const std::vector<long long>&)>& f) {
  check_box(dom, box);
  std::vector<long long> c(dom.n, 0);
  std::vector<long long> lo(dom.n, 0), hi(dom.n, 0);
  for (int d = 0; d < dom.n; ++d) {
    if (d < dom.n2) {
      lo[d] = static_cast<long long>(box.a[d] - dom.lo[d]) * dom.m;
      hi[d] = static_cast<long long>(box.b[d] + 1 - dom.lo[d]) * dom.m;
    } else {
      lo[d] = 0;
      hi[d] = dom.cell_count(d);
    }
    c[d] = lo[d];
  }
  std::vector<double> vals;
  while (true) {
    vals.push_back(f(c));
    int d = dom.n - 1;
    for (; d >= 0; --d) {
      if (++c[d] < hi[d]) break;
      c[d] = lo[d];
    }
    if (d < 0) break;
  }
  return pairwise_sum(vals);
}

}  // namespace detail_fun

// J_{1;p,q}(u) = sum over unit boxes T_k, k in [p,q], of [L(u) - L(v)].
inline double J1_window(const Field& u, const Field& v, const PotentialSpec& pot,
                        const std::vector<int>& p, const std::vector<int>& q) {
  if (u.domain() != v.domain()) throw DomainMismatch();
  detail_fun::Box box{p, q};
  return detail_fun::sum_over_box(u.domain(), box, [&](const std::vector<long long>& c) {
    return cell_energy(u, pot, c) - cell_energy(v, pot, c);
  });
}

// L^2 and W^{1,2} norms of (u - v) over one unit box, cell quadrature.
inline double box_L2sq(const Field& u, const Field& v, const std::vector<int>& k) {
  const DomainSpec& dom = u.domain();
  detail_fun::Box box{k, k};
  quad::CellCorners cu, cv;
  return detail_fun::sum_over_box(dom, box, [&](const std::vector<long long>& c) {
    quad::gather(u, c, cu);
    quad::gather(v, c, cv);
    int corners = 1 << dom.n;
    double vol = 1.0;
    for (int d = 0; d < dom.n; ++d) vol *= dom.h();
    double acc = 0.0;
    for (int b = 0; b < corners; ++b) {
      double diff = cu.value[b] - cv.value[b];
      acc += diff * diff;
    }
    return acc * vol / corners;
  });
}

inline double box_W12sq(const Field& u, const Field& v, const std::vector<int>& k) {
  const DomainSpec& dom = u.domain();
  detail_fun::Box box{k, k};
  quad::CellCorners cu, cv;
  double h = dom.h();
  return detail_fun::sum_over_box(dom, box, [&](const std::vector<long long>& c) {
    quad::gather(u, c, cu);
    quad::gather(v, c, cv);
    int corners = 1 << dom.n;
    double vol = 1.0;
    for (int d = 0; d < dom.n; ++d) vol *= h;
    double acc = 0.0;
    for (int b = 0; b < corners; ++b) {
      double diff = cu.value[b] - cv.value[b];
      acc += diff * diff / corners;
    }
    for (int kk = 0; kk < dom.n; ++kk) {
      double gacc = 0.0;
      for (int b = 0; b < corners; ++b) {
        if ((b >> kk) & 1) continue;
        double du = (cu.value[b | (1 << kk)] - cu.value[b]) / h;
        double dv = (cv.value[b | (1 << kk)] - cv.value[b]) / h;
        gacc += (du - dv) * (du - dv);
      }
      acc += gacc / (corners / 2);
    }
    return acc * vol;
  });
}

// Trapezoid-weighted L^1 / L^2 of (w - v) over the whole grid.
inline double gap_norm(const Field& v, const Field& w, int power) {
  const DomainSpec& dom = v.domain();
  if (dom != w.domain()) throw DomainMismatch();
  double voln = 1.0;
  for (int d = 0; d < dom.n; ++d) voln *= dom.h();
  std::vector<double> vals;
  vals.reserve(v.size());
  for_each_node(dom, [&](long long flat, const std::vector<long long>& idx) {
    double wgt = voln;
    for (int d = 0; d < dom.n2; ++d)
      if (idx[d] == 0 || idx[d] == dom.node_count(d) - 1) wgt *= 0.5;
    double diff = w[flat] - v[flat];
    vals.push_back(wgt * (power == 1 ? std::abs(diff) : diff * diff));
  });
  return pairwise_sum(vals);
}

enum class ConstraintClass { Gamma1, Gamma1_l, Gamma2, Gamma2_tilde };

struct MembershipResult {
  bool ok = true;
  std::string first_violation;
};

inline int strip_dir(const DomainSpec& dom) {
  if (dom.n2 < 1) throw StripOutOfRange(0);
  return dom.n2 - 1;
}

inline double strip_L2(const Field& u, const Field& ref, int i) {
  const DomainSpec& dom = u.domain();
  int sd = strip_dir(dom);
  // L2 over the strip = sum of box L2 over all boxes with strip index i
  detail_fun::Box box = detail_fun::whole_domain_box(dom);
  box.a[sd] = i;
  box.b[sd] = i;
  quad::CellCorners cu, cv;
  double total = detail_fun::sum_over_box(dom, box, [&](const std::vector<long long>& c) {
    quad::gather(u, c, cu);
    quad::gather(ref, c, cv);
    int corners = 1 << dom.n;
    double vol = 1.0;
    for (int d = 0; d < dom.n; ++d) vol *= dom.h();
    double acc = 0.0;
    for (int b = 0; b < corners; ++b) {
      double diff = cu.value[b] - cv.value[b];
      acc += diff * diff;
    }
    return acc * vol / corners;
  });
  return std::sqrt(total);
}

// Constraint-class membership with diagnostics; checks are nodewise with
// tolerance, strip asymptotics against tol at the outermost strips.
inline MembershipResult membership(const Field& u, ConstraintClass cls,
                                   const ConstraintPair& pair, double tol,
                                   const Field* tilde_v = nullptr) {
  MembershipResult res;
  auto fail = [&](const std::string& why) {
    res.ok = false;
    if (res.first_violation.empty()) res.first_violation = why;
  };
  if (u.domain() != pair.lower.domain()) {
    fail("domain mismatch with the constraint pair");
    return res;
  }
  for (long long i = 0; i < u.size() && res.ok; ++i) {
    if (u[i] < pair.lower[i] - tol) fail("u < v at node " + std::to_string(i));
    if (u[i] > pair.upper[i] + tol) fail("u > w at node " + std::to_string(i));
  }
  if (!res.ok) return res;

  if (cls == ConstraintClass::Gamma2) {
    const DomainSpec& dom = u.domain();
    int sd = strip_dir(dom);
    double left = strip_L2(u, pair.lower, dom.lo[sd]);
    double right = strip_L2(u, pair.upper, dom.hi[sd] - 1);
    if (left > tol)
      fail("||u - v||_{L2} = " + std::to_string(left) + " at the left strip");
    if (right > tol)
      fail("||u - w||_{L2} = " + std::to_string(right) + " at the right strip");
  } else if (cls == ConstraintClass::Gamma2_tilde) {
    if (tilde_v == nullptr) {
      fail("Gamma_2(v~) requires the reference field");
      return res;
    }
    const DomainSpec& dom = u.domain();
    int sd = strip_dir(dom);
    double left = strip_L2(u, *tilde_v, dom.lo[sd]);
    double right = strip_L2(u, *tilde_v, dom.hi[sd] - 1);
    bool branch_a = left <= tol && right <= tol;
    // branch (b): u - v~ supported away from a 2-strip margin
    bool branch_b = true;
    for (int i = dom.lo[sd]; i < dom.hi[sd] && branch_b; ++i) {
      bool margin = i < dom.lo[sd] + 2 || i >= dom.hi[sd] - 2;
      if (!margin) continue;
      if (strip_L2(u, *tilde_v, i) > tol) branch_b = false;
    }
    if (!branch_a && !branch_b)
      fail("u matches v~ under neither the asymptotic nor the compact-support branch");
  }
  return res;
}

// J1 with expanding-window bookkeeping.  total always sums every unit box of
// the truncated domain; converged reports whether the last shell and the
// tail decay proxy fell below tail_tol.
inline RenormValue J1(const Field& u, const Field& v, const PotentialSpec& pot,
                      const ConstraintPair& pair, double tail_tol,
                      double membership_tol = 1e-7) {
  auto mem = membership(u, ConstraintClass::Gamma1, pair, membership_tol);
  if (!mem.ok) throw NotInGamma1(mem.first_violation);
  const DomainSpec& dom = u.domain();
  RenormValue rv;
  if (dom.n2 == 0) {
    rv.total = J1_window(u, v, pot, {}, {});
    rv.window_terms[{}] = rv.total;
    rv.tail_bound = 0.0;
    rv.converged = true;
    return rv;
  }

  // per-box terms
  std::vector<int> k(dom.n2);
  std::function<void(int)> rec = [&](int d) {
    if (d == dom.n2) {
      std::vector<int> q = k;
      rv.window_terms[k] = J1_window(u, v, pot, k, q);
      return;
    }
    for (k[d] = dom.lo[d]; k[d] < dom.hi[d]; ++k[d]) rec(d + 1);
  };
  rec(0);

  std::vector<double> terms;
  for (const auto& [key, val] : rv.window_terms) terms.push_back(val);
  rv.total = pairwise_sum(terms);

  // expanding shells: radius r covers boxes with max(|k|, |k+1|) <= r
  auto radius = [&](const std::vector<int>& key) {
    long long r = 0;
    for (int d = 0; d < dom.n2; ++d)
      r = std::max({r, std::llabs(static_cast<long long>(key[d])),
                    std::llabs(static_cast<long long>(key[d]) + 1)});
    return r;
  };
  long long rmax = 0;
  for (const auto& [key, val] : rv.window_terms) rmax = std::max(rmax, radius(key));
  double last_shell = 0.0;
  double decay = 0.0;
  for (const auto& [key, val] : rv.window_terms) {
    if (radius(key) != rmax) continue;
    last_shell += std::abs(val);
    decay = std::max(decay, std::sqrt(box_W12sq(u, v, key)));
  }
  rv.tail_bound = last_shell + decay;
  rv.converged = last_shell < tail_tol && decay < tail_tol;
  return rv;
}

// Measured constants of the lower-bound propositions.  K1 follows the proof
// of the window bound; K2 adds the two strip faces to the lateral one.
inline BoundConstants K1_bound(const Field& v, const Field& w, const PotentialSpec& pot) {
  BoundConstants bc;
  const DomainSpec& dom = v.domain();
  double h = dom.h();
  double gmax = 0.0;
  std::vector<long long> nb(dom.n);
  for_each_node(dom, [&](long long flat, const std::vector<long long>& idx) {
    double acc = 0.0;
    for (int d = 0; d < dom.n; ++d) {
      nb = idx;
      nb[d] += 1;
      if (d < dom.n2 && nb[d] >= dom.node_count(d)) continue;
      double diff = (v.value_at(nb) - v[flat]) / h;
      acc += diff * diff;
    }
    gmax = std::max(gmax, acc);
  });
  bc.C_alpha = std::sqrt(gmax);
  bc.Fu_sup = sup_norm_Fu(pot);
  bc.gap_L1 = gap_norm(v, w, 1);
  bc.K1 = bc.C_alpha + 2.0 * bc.Fu_sup * bc.gap_L1;
  bc.K2 = 3.0 * bc.C_alpha + 2.0 * bc.Fu_sup * bc.gap_L1;
  return bc;
}

// J_{2,i}: J1 of the strip S_i relative to v.
inline double J2_strip(const Field& u, const ConstraintPair& pair, const PotentialSpec& pot,
                       int i) {
  const DomainSpec& dom = u.domain();
  int sd = strip_dir(dom);
  if (i < dom.lo[sd] || i + 1 > dom.hi[sd]) throw StripOutOfRange(i);
  detail_fun::Box box = detail_fun::whole_domain_box(dom);
  box.a[sd] = i;
  box.b[sd] = i;
  return detail_fun::sum_over_box(dom, box, [&](const std::vector<long long>& c) {
    return cell_energy(u, pot, c) - cell_energy(pair.lower, pot, c);
  });
}

inline RenormValue J2(const Field& u, const ConstraintPair& pair, const PotentialSpec& pot,
                      double tail_tol, double membership_tol = 1e-7) {
  auto mem = membership(u, ConstraintClass::Gamma2, pair, std::max(tail_tol, membership_tol));
  if (!mem.ok) throw NotInGamma2(mem.first_violation);
  const DomainSpec& dom = u.domain();
  int sd = strip_dir(dom);
  RenormValue rv;
  std::vector<double> terms;
  for (int i = dom.lo[sd]; i < dom.hi[sd]; ++i) {
    double ji = J2_strip(u, pair, pot, i);
    rv.window_terms[{i}] = ji;
    terms.push_back(ji);
  }
  rv.total = pairwise_sum(terms);
  double jlo = std::abs(rv.window_terms.begin()->second);
  double jhi = std::abs(rv.window_terms.rbegin()->second);
  rv.tail_bound = jlo + jhi;
  rv.converged = jlo < tail_tol && jhi < tail_tol;
  return rv;
}

}  // namespace mblab
