// lattice.hpp
// Rotation vectors over a quadratic field, the integer lattices
// Lambda_s = Z^{n+1} cap <a^1,...,a^{s-1}>^perp, admissibility of invariant
// direction systems, the orthogonal-integer-basis coordinate reduction, and
// continued-fraction convergents of quadratic irrationals.
//
// Directions are kept unnormalized: every predicate below is a sign or zero
// test of an exact inner product, invariant under positive scaling.

#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

#include "mblab/numbers.hpp"

namespace mblab {

struct SecondInvariantUnavailable : std::runtime_error {
  SecondInvariantUnavailable() : std::runtime_error("rank(Lambda_2) = 0: no second invariant") {}
};
struct ReductionUnavailable : std::runtime_error {
  explicit ReductionUnavailable(const std::string& w) : std::runtime_error(w) {}
};
struct RationalInput : std::runtime_error {
  RationalInput() : std::runtime_error("continued fraction requested for a rational input") {}
};

using IntVec = std::vector<long long>;
using QVec = std::vector<QuadraticNumber>;

struct RotationVector {
  QVec entries;
  int n() const { return static_cast<int>(entries.size()); }

  static RotationVector parse(const std::vector<std::string>& texts) {
    RotationVector rv;
    long long d = 0;
    for (const auto& t : texts) {
      QuadraticNumber q = parse_quadratic(t);
      if (q.radicand() != 0) {
        if (d != 0 && q.radicand() != d)
          throw ParseError("rotation entries must share one quadratic field");
        d = q.radicand();
      }
      rv.entries.push_back(q);
    }
    return rv;
  }
};

inline QuadraticNumber dot(const QVec& a, const IntVec& k) {
  QuadraticNumber s(0);
  for (size_t i = 0; i < a.size(); ++i) s = s + a[i] * QuadraticNumber(Rational(k[i]));
  return s;
}

// Basis vectors are stored as columns; rank = number of columns.  The basis
// is the column Hermite form of the kernel, a deterministic choice.
struct IntegerLattice {
  int dim = 0;
  std::vector<IntVec> basis;  // each IntVec has size dim
  int rank() const { return static_cast<int>(basis.size()); }
  bool is_zero() const { return basis.empty(); }
};

namespace hnf {

// Column-style Hermite reduction of A (rows x cols) with the unimodular
// transform accumulated in U: on exit W = A*U is in column echelon form and
// the columns of U matching zero columns of W span ker(A) over Z.
struct ColumnReduction {
  std::vector<IntVec> W;  // rows x cols
  std::vector<IntVec> U;  // cols x cols
};

inline ColumnReduction column_reduce(std::vector<IntVec> A, int cols) {
  int rows = static_cast<int>(A.size());
  ColumnReduction cr;
  cr.W = std::move(A);
  cr.U.assign(cols, IntVec(cols, 0));
  for (int j = 0; j < cols; ++j) cr.U[j][j] = 1;

  auto colop = [&](int dst, int src, long long f) {
    // col_dst += f * col_src
    for (int r = 0; r < rows; ++r)
      cr.W[r][dst] = detail::narrow(detail::i128(cr.W[r][dst]) + detail::i128(f) * cr.W[r][src],
                                    "hnf entry");
    for (int r = 0; r < cols; ++r)
      cr.U[r][dst] = detail::narrow(detail::i128(cr.U[r][dst]) + detail::i128(f) * cr.U[r][src],
                                    "hnf transform");
  };
  auto colswap = [&](int a, int b) {
    for (int r = 0; r < rows; ++r) std::swap(cr.W[r][a], cr.W[r][b]);
    for (int r = 0; r < cols; ++r) std::swap(cr.U[r][a], cr.U[r][b]);
  };
  auto colneg = [&](int a) {
    for (int r = 0; r < rows; ++r) cr.W[r][a] = -cr.W[r][a];
    for (int r = 0; r < cols; ++r) cr.U[r][a] = -cr.U[r][a];
  };

  int lead = 0;
  for (int i = 0; i < rows && lead < cols; ++i) {
    // Euclid on row i over columns lead..cols-1 until one nonzero remains.
    while (true) {
      int nz = -1;
      for (int j = lead; j < cols; ++j)
        if (cr.W[i][j] != 0 && (nz < 0 || std::llabs(cr.W[i][j]) < std::llabs(cr.W[i][nz])))
          nz = j;
      if (nz < 0) break;  // row i is zero on the active block
      bool done = true;
      for (int j = lead; j < cols; ++j) {
        if (j == nz || cr.W[i][j] == 0) continue;
        colop(j, nz, -(cr.W[i][j] / cr.W[i][nz]));
        if (cr.W[i][j] != 0) done = false;
      }
      if (done) {
        colswap(lead, nz);
        if (cr.W[i][lead] < 0) colneg(lead);
        ++lead;
        break;
      }
    }
  }
  return cr;
}

// Row Hermite form used to canonicalize a kernel basis (vectors as rows).
inline std::vector<IntVec> row_hermite(std::vector<IntVec> M) {
  if (M.empty()) return M;
  int rows = static_cast<int>(M.size());
  int cols = static_cast<int>(M[0].size());
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    while (true) {
      int piv = -1;
      for (int i = r; i < rows; ++i)
        if (M[i][c] != 0 && (piv < 0 || std::llabs(M[i][c]) < std::llabs(M[piv][c]))) piv = i;
      if (piv < 0) break;
      std::swap(M[r], M[piv]);
      bool clean = true;
      for (int i = r + 1; i < rows; ++i) {
        if (M[i][c] == 0) continue;
        long long f = M[i][c] / M[r][c];
        for (int j = 0; j < cols; ++j)
          M[i][j] = detail::narrow(detail::i128(M[i][j]) - detail::i128(f) * M[r][j], "hnf row");
        if (M[i][c] != 0) clean = false;
      }
      if (clean) {
        if (M[r][c] < 0)
          for (int j = 0; j < cols; ++j) M[r][j] = -M[r][j];
        // reduce the rows above
        for (int i = 0; i < r; ++i) {
          long long f = M[i][c] / M[r][c];
          if (M[i][c] % M[r][c] != 0 && (M[i][c] < 0) != (M[r][c] < 0)) --f;
          if (f != 0)
            for (int j = 0; j < cols; ++j)
              M[i][j] = detail::narrow(detail::i128(M[i][j]) - detail::i128(f) * M[r][j],
                                       "hnf row");
        }
        ++r;
        break;
      }
    }
  }
  M.resize(r);
  return M;
}

}  // namespace hnf

// Z-kernel of the exact linear forms given by `directions` on Z^dim.  Each
// quadratic-field form splits into its rational and surd components, giving
// up to two rational forms; denominators are cleared and the stacked integer
// matrix is reduced by Hermite column operations.
inline IntegerLattice integer_orthogonal_lattice(const std::vector<QVec>& directions, int dim) {
  std::vector<IntVec> forms;
  for (const QVec& dir : directions) {
    if (static_cast<int>(dir.size()) != dim)
      throw std::invalid_argument("direction dimension mismatch");
    detail::i128 denr = 1, dens = 1;
    for (const auto& q : dir) {
      denr = denr / detail::igcd(denr, q.rational_part().den()) * q.rational_part().den();
      dens = dens / detail::igcd(dens, q.surd_part().den()) * q.surd_part().den();
    }
    IntVec fr(dim), fs(dim);
    bool anyr = false, anys = false;
    for (int i = 0; i < dim; ++i) {
      fr[i] = detail::narrow(detail::i128(dir[i].rational_part().num()) *
                                 (denr / dir[i].rational_part().den()),
                             "cleared form");
      fs[i] = detail::narrow(detail::i128(dir[i].surd_part().num()) *
                                 (dens / dir[i].surd_part().den()),
                             "cleared form");
      anyr |= fr[i] != 0;
      anys |= fs[i] != 0;
    }
    if (anyr) forms.push_back(fr);
    if (anys) forms.push_back(fs);
  }

  IntegerLattice lat;
  lat.dim = dim;
  if (forms.empty()) {
    for (int j = 0; j < dim; ++j) {
      IntVec e(dim, 0);
      e[j] = 1;
      lat.basis.push_back(e);
    }
    return lat;
  }

  auto cr = hnf::column_reduce(forms, dim);
  std::vector<IntVec> kernel_rows;
  for (int j = 0; j < dim; ++j) {
    bool zero = true;
    for (const auto& row : cr.W) zero &= row[j] == 0;
    if (!zero) continue;
    IntVec v(dim);
    for (int r = 0; r < dim; ++r) v[r] = cr.U[r][j];
    kernel_rows.push_back(v);
  }
  kernel_rows = hnf::row_hermite(std::move(kernel_rows));
  lat.basis = std::move(kernel_rows);
  return lat;
}

// Is the rational vector rhs in the Q-span of the (integer) basis?
inline bool in_rational_span(const std::vector<IntVec>& basis, std::vector<Rational> rhs) {
  size_t dim = rhs.size();
  std::vector<std::vector<Rational>> rows;
  for (const auto& b : basis) {
    std::vector<Rational> r(dim);
    for (size_t i = 0; i < dim; ++i) r[i] = Rational(b[i]);
    rows.push_back(std::move(r));
  }
  size_t lead = 0;
  for (auto& row : rows) {
    size_t piv = lead;
    while (piv < dim && row[piv].is_zero()) ++piv;
    if (piv == dim) continue;
    std::swap(row[lead], row[piv]);
    for (auto& other : rows)
      if (&other != &row) std::swap(other[lead], other[piv]);
    std::swap(rhs[lead], rhs[piv]);
    for (auto& other : rows) {
      if (&other == &row || other[lead].is_zero()) continue;
      Rational f = other[lead] / row[lead];
      for (size_t j = 0; j < dim; ++j) other[j] -= f * row[j];
    }
    if (!rhs[lead].is_zero()) {
      Rational f = rhs[lead] / row[lead];
      for (size_t j = 0; j < dim; ++j) rhs[j] -= f * row[j];
    }
    ++lead;
  }
  for (const auto& x : rhs)
    if (!x.is_zero()) return false;
  return true;
}

// Q-span membership of a quadratic vector: with a rational basis this splits
// into independent checks of the rational and surd component vectors.
inline bool in_span(const IntegerLattice& lat, const QVec& v) {
  std::vector<Rational> vr(lat.dim), vs(lat.dim);
  bool any_surd = false;
  for (int i = 0; i < lat.dim; ++i) {
    vr[i] = v[i].rational_part();
    vs[i] = v[i].surd_part();
    any_surd |= !vs[i].is_zero();
  }
  if (!in_rational_span(lat.basis, vr)) return false;
  if (any_surd && !in_rational_span(lat.basis, vs)) return false;
  return true;
}

struct DirectionSystem {
  int t = 1;                          // number of invariants (1 or 2)
  QVec dir1;                          // (-alpha, 1), unnormalized
  std::optional<IntVec> dir2;        // +-e^{n2+1} in Z^{n+1}
  std::vector<IntegerLattice> lattices;  // Lambda_1, ..., Lambda_{t+1}
  int n = 0;                          // alpha lives in R^n; directions in R^{n+1}

  const IntegerLattice& lambda(int s) const { return lattices.at(s - 1); }
  // Math-side count of unbounded directions: n2 = n - rank(Lambda_2).
  int n2() const { return n - lattices.at(1).rank(); }
};

inline IntegerLattice full_lattice(int dim) {
  IntegerLattice lat;
  lat.dim = dim;
  for (int j = 0; j < dim; ++j) {
    IntVec e(dim, 0);
    e[j] = 1;
    lat.basis.push_back(e);
  }
  return lat;
}

inline QVec dir1_of(const RotationVector& alpha) {
  QVec d;
  for (const auto& a : alpha.entries) d.push_back(-a);
  d.push_back(QuadraticNumber(1));
  return d;
}

inline DirectionSystem make_direction_system(const RotationVector& alpha, bool with_second) {
  DirectionSystem sys;
  sys.n = alpha.n();
  sys.dir1 = dir1_of(alpha);
  sys.lattices.push_back(full_lattice(sys.n + 1));
  sys.lattices.push_back(integer_orthogonal_lattice({sys.dir1}, sys.n + 1));
  if (!with_second) return sys;

  const IntegerLattice& l2 = sys.lattices[1];
  if (l2.rank() == 0) throw SecondInvariantUnavailable();
  // a^2 = -e^{j*} with j* the first coordinate direction inside span(Lambda_2)
  int jstar = -1;
  for (int j = 0; j < sys.n && jstar < 0; ++j) {
    QVec e(sys.n + 1, QuadraticNumber(0));
    e[j] = QuadraticNumber(1);
    if (in_span(l2, e)) jstar = j;
  }
  if (jstar < 0) throw SecondInvariantUnavailable();
  IntVec a2(sys.n + 1, 0);
  a2[jstar] = -1;
  sys.dir2 = a2;
  sys.t = 2;
  QVec a2q(sys.n + 1);
  for (int i = 0; i <= sys.n; ++i) a2q[i] = QuadraticNumber(Rational(a2[i]));
  sys.lattices.push_back(integer_orthogonal_lattice({sys.dir1, a2q}, sys.n + 1));
  return sys;
}

inline bool is_admissible(const DirectionSystem& sys) {
  if (sys.dir1.empty()) return false;
  if (sys.dir1.back().sign() <= 0) return false;  // a^1 . e^{n+1} > 0
  if (sys.t >= 2) {
    if (!sys.dir2) return false;
    QVec a2(sys.n + 1);
    for (int i = 0; i <= sys.n; ++i) a2[i] = QuadraticNumber(Rational((*sys.dir2)[i]));
    if (!in_span(sys.lattices.at(1), a2)) return false;
    QuadraticNumber o = dot(sys.dir1, *sys.dir2);
    if (!o.is_zero()) return false;
  }
  return true;
}

// Exact classification of a shift against the invariant directions:
// above iff exists s with k in Lambda_s and k . a^s > 0; equal iff k in
// Lambda_{t+1}; below otherwise symmetric.
enum class ShiftOrder { above, below, equal };

inline ShiftOrder predict_shift_order(const DirectionSystem& sys, const IntVec& kbar) {
  int s1 = dot(sys.dir1, kbar).sign();
  if (s1 > 0) return ShiftOrder::above;
  if (s1 < 0) return ShiftOrder::below;
  // k . a^1 = 0 and k integral, so k is in Lambda_2 by definition
  if (sys.t >= 2 && sys.dir2) {
    detail::i128 s2 = 0;
    for (size_t i = 0; i < kbar.size(); ++i) s2 += detail::i128((*sys.dir2)[i]) * kbar[i];
    if (s2 > 0) return ShiftOrder::above;
    if (s2 < 0) return ShiftOrder::below;
  }
  return ShiftOrder::equal;
}

struct CoordinateReduction {
  std::vector<IntVec> B;        // n x n, columns are the orthogonal basis omega^k
  std::vector<long long> lambdas;  // |omega^k|^2
  QVec new_rotation;            // alpha * B
  int n2 = 0;                   // dim(V_2^perp) = number of leading columns
};

namespace detail_reduce {

// All primitive vectors (up to sign) expressible as small integer
// combinations of `gens`, sorted by (|v|^2, lexicographic).
inline std::vector<IntVec> short_vectors(const std::vector<IntVec>& gens, int dim,
                                         long long coeff_bound) {
  std::vector<IntVec> out;
  int g = static_cast<int>(gens.size());
  std::vector<long long> c(g, -coeff_bound);
  if (g == 0) return out;
  while (true) {
    IntVec v(dim, 0);
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < dim; ++j) v[j] += c[i] * gens[i][j];
    bool nonzero = false;
    for (long long x : v) nonzero |= x != 0;
    if (nonzero) {
      long long gc = 0;
      for (long long x : v) gc = std::llabs(std::gcd(gc, x));
      for (auto& x : v) x /= gc;
      // canonical sign: first nonzero entry positive
      for (long long x : v) {
        if (x == 0) continue;
        if (x < 0)
          for (auto& y : v) y = -y;
        break;
      }
      out.push_back(v);
    }
    int i = 0;
    for (; i < g; ++i) {
      if (++c[i] <= coeff_bound) break;
      c[i] = -coeff_bound;
    }
    if (i == g) break;
  }
  std::sort(out.begin(), out.end(), [](const IntVec& a, const IntVec& b) {
    detail::i128 na = 0, nb = 0;
    for (long long x : a) na += detail::i128(x) * x;
    for (long long x : b) nb += detail::i128(x) * x;
    if (na != nb) return na < nb;
    return a < b;
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Greedy orthogonal selection among the enumerated short vectors.
inline std::vector<IntVec> orthogonal_basis(const std::vector<IntVec>& gens, int dim,
                                            int want, long long coeff_bound) {
  auto cand = short_vectors(gens, dim, coeff_bound);
  std::vector<IntVec> picked;
  for (const auto& v : cand) {
    bool ok = true;
    for (const auto& p : picked) {
      detail::i128 dp = 0;
      for (int j = 0; j < dim; ++j) dp += detail::i128(v[j]) * p[j];
      if (dp != 0) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    picked.push_back(v);
    if (static_cast<int>(picked.size()) == want) break;
  }
  return picked;
}

}  // namespace detail_reduce

inline CoordinateReduction reduce_coordinates(const RotationVector& alpha,
                                              long long search_bound = 10) {
  int n = alpha.n();
  IntegerLattice l2bar = integer_orthogonal_lattice({dir1_of(alpha)}, n + 1);
  int rank2 = l2bar.rank();
  if (rank2 < 1 || rank2 > n - 1)
    throw ReductionUnavailable("reduce_coordinates requires 1 <= rank(Lambda_2) <= n-1, got " +
                               std::to_string(rank2));

  // V_2 = span of the horizontal projections of Lambda_2
  std::vector<IntVec> v2gens;
  for (const auto& b : l2bar.basis) v2gens.push_back(IntVec(b.begin(), b.end() - 1));
  // drop projections that are zero or dependent; the span is what matters
  std::vector<QVec> v2forms;
  for (const auto& g : v2gens) {
    QVec f(n);
    for (int i = 0; i < n; ++i) f[i] = QuadraticNumber(Rational(g[i]));
    v2forms.push_back(f);
  }
  IntegerLattice vperp = integer_orthogonal_lattice(v2forms, n);
  int n2 = vperp.rank();
  if (n2 + rank2 != n)
    throw ReductionUnavailable("projection of Lambda_2 degenerates");

  auto v2basis = detail_reduce::orthogonal_basis(v2gens, n, rank2, search_bound);
  auto vperpbasis = detail_reduce::orthogonal_basis(vperp.basis, n, n2, search_bound);
  if (static_cast<int>(v2basis.size()) != rank2 ||
      static_cast<int>(vperpbasis.size()) != n2)
    throw ReductionUnavailable("no orthogonal integer basis within search bound " +
                               std::to_string(search_bound));

  CoordinateReduction red;
  red.n2 = n2;
  red.B.assign(n, IntVec(n, 0));
  std::vector<IntVec> cols;
  for (const auto& w : vperpbasis) cols.push_back(w);
  for (const auto& w : v2basis) cols.push_back(w);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) red.B[i][j] = cols[j][i];
  for (int j = 0; j < n; ++j) {
    detail::i128 nn = 0;
    for (int i = 0; i < n; ++i) nn += detail::i128(cols[j][i]) * cols[j][i];
    red.lambdas.push_back(detail::narrow(nn, "lambda"));
  }
  // cross-orthogonality between the two blocks is automatic (V_2 perp V_2^perp)
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      detail::i128 dp = 0;
      for (int i = 0; i < n; ++i) dp += detail::i128(red.B[i][j]) * red.B[i][k];
      if (dp != 0) throw ReductionUnavailable("selected basis is not orthogonal");
    }
  red.new_rotation.assign(n, QuadraticNumber(0));
  for (int j = 0; j < n; ++j) {
    QuadraticNumber s(0);
    for (int i = 0; i < n; ++i)
      s = s + alpha.entries[i] * QuadraticNumber(Rational(red.B[i][j]));
    red.new_rotation[j] = s;
  }
  // transformed coefficients c = alpha B diag(lambda^{-1}): leading n2 entries
  // irrational, the rest rational
  for (int j = 0; j < n; ++j) {
    QuadraticNumber c = red.new_rotation[j] / QuadraticNumber(Rational(red.lambdas[j]));
    if (j < n2 && c.is_rational())
      throw ReductionUnavailable("leading transformed coefficient is rational");
    if (j >= n2 && !c.is_rational())
      throw ReductionUnavailable("trailing transformed coefficient is irrational");
  }
  return red;
}

// First `depth` continued-fraction convergents of a quadratic irrational,
// exact via the periodic CF recursion.
inline std::vector<Rational> convergents(const QuadraticNumber& x0, int depth) {
  if (x0.surd_part().is_zero()) throw RationalInput();
  std::vector<Rational> out;
  QuadraticNumber x = x0;
  long long pm1 = 1, pm2 = 0, qm1 = 0, qm2 = 1;
  for (int k = 0; k < depth; ++k) {
    long long a = x.floor();
    long long p = detail::narrow(detail::i128(a) * pm1 + pm2, "cf numerator");
    long long q = detail::narrow(detail::i128(a) * qm1 + qm2, "cf denominator");
    out.emplace_back(p, q);
    pm2 = pm1;
    pm1 = p;
    qm2 = qm1;
    qm1 = q;
    x = QuadraticNumber(1) / (x - QuadraticNumber(Rational(a)));
  }
  return out;
}

}  // namespace mblab
