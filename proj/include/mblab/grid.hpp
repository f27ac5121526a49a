// grid.hpp
// Structured grids on truncated cylinders [lo,hi]^{n2} x T^{n-n2} with
// spacing h = 1/m, so every integer translation maps nodes to nodes.  Fields
// on periodic directions may carry an integer seam jump j: u(x + period e) =
// u(x) + j, the natural storage for minimizers with rational rotation vector.
//
// Reductions (norms, energies) sum in a fixed pairwise tree order, giving
// bit-reproducible results independent of chunking.

#pragma once

#include <array>
#include <atomic>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "mblab/lattice.hpp"

namespace mblab {

struct DomainMismatch : std::runtime_error {
  DomainMismatch() : std::runtime_error("fields live on different domains") {}
};
struct ShiftTooLarge : std::runtime_error {
  explicit ShiftTooLarge(const std::string& w) : std::runtime_error(w) {}
};
struct StripOutOfRange : std::runtime_error {
  explicit StripOutOfRange(int i) : std::runtime_error("strip " + std::to_string(i) +
                                                       " outside the truncated range") {}
};
struct IoError : std::runtime_error {
  explicit IoError(const std::string& w) : std::runtime_error(w) {}
};

struct DomainSpec {
  int n = 1;                      // total dimensions
  int n2 = 0;                     // leading truncated (unbounded) directions
  std::vector<int> lo, hi;        // size n2, integer bounds per truncated dir
  std::vector<int> periods;       // size n-n2, integer periods
  std::vector<int> seam_jump;     // size n-n2, integer jump per period wrap
  int m = 1;                      // h = 1/m
  std::vector<double> lambdas;    // size n, anisotropic weights (default 1)

  double h() const { return 1.0 / m; }

  int node_count(int d) const {
    if (d < n2) return (hi[d] - lo[d]) * m + 1;
    return periods[d - n2] * m;
  }
  int cell_count(int d) const {
    if (d < n2) return (hi[d] - lo[d]) * m;
    return periods[d - n2] * m;
  }
  long long total_nodes() const {
    long long t = 1;
    for (int d = 0; d < n; ++d) t *= node_count(d);
    return t;
  }
  long long total_cells() const {
    long long t = 1;
    for (int d = 0; d < n; ++d) t *= cell_count(d);
    return t;
  }
  double coord(int d, long long idx) const {
    if (d < n2) return lo[d] + idx * h();
    return idx * h();
  }

  static DomainSpec torus(int n, std::vector<int> periods, std::vector<int> jumps, int m,
                          std::vector<double> lambdas = {}) {
    return cylinder(n, {}, {}, std::move(periods), std::move(jumps), m, std::move(lambdas));
  }
  // [lo,hi] per truncated direction, then periodic directions
  static DomainSpec cylinder(int n, std::vector<int> lo, std::vector<int> hi,
                             std::vector<int> periods, std::vector<int> jumps, int m,
                             std::vector<double> lambdas = {}) {
    DomainSpec dom;
    dom.n = n;
    dom.n2 = static_cast<int>(lo.size());
    dom.lo = std::move(lo);
    dom.hi = std::move(hi);
    dom.periods = std::move(periods);
    dom.seam_jump = std::move(jumps);
    dom.m = m;
    dom.lambdas = lambdas.empty() ? std::vector<double>(n, 1.0) : std::move(lambdas);
    if (dom.m < 1) throw std::invalid_argument("grid: m >= 1 required");
    if (dom.hi.size() != dom.lo.size() ||
        static_cast<int>(dom.periods.size()) != dom.n - dom.n2 ||
        dom.seam_jump.size() != dom.periods.size() ||
        static_cast<int>(dom.lambdas.size()) != dom.n)
      throw std::invalid_argument("grid: inconsistent domain description");
    for (int d = 0; d < dom.n2; ++d)
      if (dom.hi[d] <= dom.lo[d]) throw std::invalid_argument("grid: hi <= lo");
    for (int p : dom.periods)
      if (p < 1) throw std::invalid_argument("grid: periods must be positive");
    for (double l : dom.lambdas)
      if (!(l > 0)) throw std::invalid_argument("grid: lambdas must be positive");
    return dom;
  }

  friend bool operator==(const DomainSpec& a, const DomainSpec& b) {
    return a.n == b.n && a.n2 == b.n2 && a.lo == b.lo && a.hi == b.hi &&
           a.periods == b.periods && a.seam_jump == b.seam_jump && a.m == b.m &&
           a.lambdas == b.lambdas;
  }
  friend bool operator!=(const DomainSpec& a, const DomainSpec& b) { return !(a == b); }
};

// Deterministic pairwise reduction; the tree shape depends only on length.
inline double pairwise_sum(const double* data, size_t len) {
  if (len <= 8) {
    double s = 0.0;
    for (size_t i = 0; i < len; ++i) s += data[i];
    return s;
  }
  size_t half = len / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, len - half);
}
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

// MBLAB_THREADS caps worker threads for slot-parallel loops (default 1).
inline int max_threads() {
  static int cached = [] {
    const char* env = std::getenv("MBLAB_THREADS");
    if (!env) return 1;
    int v = std::atoi(env);
    return v < 1 ? 1 : v;
  }();
  return cached;
}

// Index-parallel loop writing into preassigned slots: the result does not
// depend on the thread count.
inline void parallel_for(long long count, const std::function<void(long long)>& body) {
  int threads = std::min<long long>(max_threads(), count);
  if (threads <= 1) {
    for (long long i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<long long> next{0};
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      long long i;
      while ((i = next.fetch_add(1)) < count) body(i);
    });
  for (auto& th : pool) th.join();
}

class Field {
 public:
  Field() = default;
  Field(DomainSpec dom, double fill = 0.0)
      : dom_(std::move(dom)), values_(dom_.total_nodes(), fill) {}

  const DomainSpec& domain() const { return dom_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  long long size() const { return static_cast<long long>(values_.size()); }
  double operator[](long long i) const { return values_[i]; }
  double& operator[](long long i) { return values_[i]; }

  long long flat_index(const std::vector<long long>& idx) const {
    long long f = 0;
    for (int d = 0; d < dom_.n; ++d) f = f * dom_.node_count(d) + idx[d];
    return f;
  }
  std::vector<long long> multi_index(long long flat) const {
    std::vector<long long> idx(dom_.n);
    for (int d = dom_.n - 1; d >= 0; --d) {
      idx[d] = flat % dom_.node_count(d);
      flat /= dom_.node_count(d);
    }
    return idx;
  }

  bool in_range(const std::vector<long long>& idx) const {
    for (int d = 0; d < dom_.n2; ++d)
      if (idx[d] < 0 || idx[d] >= dom_.node_count(d)) return false;
    return true;
  }

  // Signed node index, arbitrary range: periodic dims wrap and accumulate the
  // seam jump, truncated dims clamp to the nearest stored node.
  double value_at(std::vector<long long> idx) const {
    double add = 0.0;
    for (int d = 0; d < dom_.n; ++d) {
      long long nd = dom_.node_count(d);
      if (d < dom_.n2) {
        if (idx[d] < 0) idx[d] = 0;
        if (idx[d] >= nd) idx[d] = nd - 1;
      } else {
        long long w = idx[d] >= 0 ? idx[d] / nd : -((-idx[d] + nd - 1) / nd);
        idx[d] -= w * nd;
        add += static_cast<double>(w) * dom_.seam_jump[d - dom_.n2];
      }
    }
    return values_[flat_index(idx)] + add;
  }

  double value_at_origin() const {
    std::vector<long long> idx(dom_.n, 0);
    for (int d = 0; d < dom_.n2; ++d) idx[d] = -static_cast<long long>(dom_.lo[d]) * dom_.m;
    return value_at(idx);
  }

  std::vector<double> coords(const std::vector<long long>& idx) const {
    std::vector<double> x(dom_.n);
    for (int d = 0; d < dom_.n; ++d) x[d] = dom_.coord(d, idx[d]);
    return x;
  }

 private:
  DomainSpec dom_;
  std::vector<double> values_;
};

struct ConstraintPair {
  Field lower;  // v
  Field upper;  // w

  void validate() const {
    if (lower.domain() != upper.domain()) throw DomainMismatch();
    for (long long i = 0; i < lower.size(); ++i)
      if (lower[i] > upper[i])
        throw std::invalid_argument("constraint pair violates lower <= upper");
  }
};

// Visits every node; f(flat, multi_index).
inline void for_each_node(const DomainSpec& dom,
                          const std::function<void(long long, const std::vector<long long>&)>& f) {
  std::vector<long long> idx(dom.n, 0);
  long long total = dom.total_nodes();
  for (long long flat = 0; flat < total; ++flat) {
    f(flat, idx);
    for (int d = dom.n - 1; d >= 0; --d) {
      if (++idx[d] < dom.node_count(d)) break;
      idx[d] = 0;
    }
  }
}

// T_kbar u = u(. - k) + k_{n+1}; kbar has n+1 entries in lattice units.
inline Field translate(const Field& u, const IntVec& kbar) {
  const DomainSpec& dom = u.domain();
  if (static_cast<int>(kbar.size()) != dom.n + 1)
    throw std::invalid_argument("translate expects a shift in Z^{n+1}");
  for (int d = 0; d < dom.n2; ++d) {
    long long span = dom.hi[d] - dom.lo[d];
    if (std::llabs(kbar[d]) >= span)
      throw ShiftTooLarge("shift " + std::to_string(kbar[d]) + " in direction " +
                          std::to_string(d) + " exceeds the truncated span " +
                          std::to_string(span));
  }
  Field out(dom);
  std::vector<long long> src(dom.n);
  for_each_node(dom, [&](long long flat, const std::vector<long long>& idx) {
    for (int d = 0; d < dom.n; ++d) src[d] = idx[d] - kbar[d] * dom.m;
    out[flat] = u.value_at(src) + static_cast<double>(kbar[dom.n]);
  });
  return out;
}

// Does the translated node grid stay inside stored data (no edge replication)?
inline bool translate_in_range(const DomainSpec& dom, const IntVec& kbar,
                               const std::vector<long long>& idx) {
  for (int d = 0; d < dom.n2; ++d) {
    long long s = idx[d] - kbar[d] * dom.m;
    if (s < 0 || s >= dom.node_count(d)) return false;
  }
  return true;
}

inline std::pair<Field, Field> meet_join(const Field& a, const Field& b) {
  if (a.domain() != b.domain()) throw DomainMismatch();
  Field meet(a.domain()), join(a.domain());
  for (long long i = 0; i < a.size(); ++i) {
    meet[i] = std::min(a[i], b[i]);
    join[i] = std::max(a[i], b[i]);
  }
  return {meet, join};
}

inline Field clamp(const Field& u, const ConstraintPair& pair) {
  if (u.domain() != pair.lower.domain()) throw DomainMismatch();
  Field out(u.domain());
  for (long long i = 0; i < u.size(); ++i)
    out[i] = std::max(std::min(u[i], pair.upper[i]), pair.lower[i]);
  return out;
}

// Restriction to the strip S_i = { x_strip in [i, i+1] } where the strip
// direction is the last truncated direction.
inline Field strip_restrict(const Field& u, int i) {
  const DomainSpec& dom = u.domain();
  if (dom.n2 < 1) throw StripOutOfRange(i);
  int sd = dom.n2 - 1;
  if (i < dom.lo[sd] || i + 1 > dom.hi[sd]) throw StripOutOfRange(i);
  DomainSpec sub = dom;
  sub.lo[sd] = i;
  sub.hi[sd] = i + 1;
  Field out(sub);
  long long off = static_cast<long long>(i - dom.lo[sd]) * dom.m;
  std::vector<long long> src(dom.n);
  for_each_node(sub, [&](long long flat, const std::vector<long long>& idx) {
    for (int d = 0; d < dom.n; ++d) src[d] = idx[d];
    src[sd] += off;
    out[flat] = u[u.flat_index(src)];
  });
  return out;
}

// Periodic extension of a field onto a cylinder with more truncated
// directions: leading truncated directions must agree, periodic source
// directions promoted to truncated ones are unrolled through the seam (exact
// node mapping; shares m).
inline Field extend_to_cylinder(const Field& base, const DomainSpec& target) {
  const DomainSpec& src = base.domain();
  if (src.n != target.n || src.m != target.m || src.n2 > target.n2)
    throw std::invalid_argument("extend_to_cylinder: incompatible grids");
  for (int d = 0; d < src.n2; ++d)
    if (src.lo[d] != target.lo[d] || src.hi[d] != target.hi[d])
      throw std::invalid_argument("extend_to_cylinder: shared truncated bounds differ");
  Field out(target);
  std::vector<long long> sidx(src.n);
  for_each_node(target, [&](long long flat, const std::vector<long long>& idx) {
    for (int d = 0; d < target.n; ++d) {
      if (d < src.n2)
        sidx[d] = idx[d];  // same bounds, same offset
      else if (d < target.n2)
        sidx[d] = idx[d] + static_cast<long long>(target.lo[d]) * target.m;
      else
        sidx[d] = idx[d];
    }
    out[flat] = base.value_at(sidx);
  });
  return out;
}

// Broadcast a field along a new leading-truncated direction inserted at
// position `dir` with bounds [lo, hi]; used to extend v, w onto the
// heteroclinic cylinder.
inline Field insert_truncated_direction(const Field& base, int dir, int lo, int hi) {
  const DomainSpec& src = base.domain();
  DomainSpec dom;
  dom.n = src.n + 1;
  dom.n2 = src.n2 + 1;
  dom.m = src.m;
  dom.lo = src.lo;
  dom.hi = src.hi;
  dom.lo.insert(dom.lo.begin() + dir, lo);
  dom.hi.insert(dom.hi.begin() + dir, hi);
  dom.periods = src.periods;
  dom.seam_jump = src.seam_jump;
  dom.lambdas = src.lambdas;
  dom.lambdas.insert(dom.lambdas.begin() + dir, 1.0);
  Field out(dom);
  std::vector<long long> sidx(src.n);
  for_each_node(dom, [&](long long flat, const std::vector<long long>& idx) {
    for (int d = 0, s = 0; d < dom.n; ++d) {
      if (d == dir) continue;
      sidx[s++] = idx[d];
    }
    out[flat] = base[base.flat_index(sidx)];
  });
  return out;
}

// --- text format -----------------------------------------------------------
//
// MBFIELD v1
// n n2 m  lo_1 hi_1 ... lo_n2 hi_n2  p_1 j_1 ... p_{n-n2} j_{n-n2}
// lambda_1 ... lambda_n
// <values, row-major, one last-dimension row per line, 17 significant digits>

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_field(std::ostream& os, const Field& u) {
  const DomainSpec& dom = u.domain();
  os << "MBFIELD v1\n";
  os << dom.n << ' ' << dom.n2 << ' ' << dom.m;
  for (int d = 0; d < dom.n2; ++d) os << ' ' << dom.lo[d] << ' ' << dom.hi[d];
  for (size_t d = 0; d < dom.periods.size(); ++d)
    os << ' ' << dom.periods[d] << ' ' << dom.seam_jump[d];
  os << '\n';
  for (int d = 0; d < dom.n; ++d) os << (d ? " " : "") << format_double(dom.lambdas[d]);
  os << '\n';
  long long rowlen = dom.node_count(dom.n - 1);
  for (long long i = 0; i < u.size(); i += rowlen) {
    for (long long j = 0; j < rowlen; ++j)
      os << (j ? " " : "") << format_double(u[i + j]);
    os << '\n';
  }
}

inline void write_field(const std::string& path, const Field& u) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  write_field(os, u);
}

inline Field read_field(std::istream& is, const std::string& what = "field stream") {
  std::string magic, version;
  is >> magic >> version;
  if (magic != "MBFIELD" || version != "v1") throw IoError(what + ": bad header");
  DomainSpec dom;
  is >> dom.n >> dom.n2 >> dom.m;
  if (!is || dom.n < 1 || dom.n2 < 0 || dom.n2 > dom.n || dom.m < 1)
    throw IoError(what + ": bad domain line");
  dom.lo.resize(dom.n2);
  dom.hi.resize(dom.n2);
  for (int d = 0; d < dom.n2; ++d) is >> dom.lo[d] >> dom.hi[d];
  dom.periods.resize(dom.n - dom.n2);
  dom.seam_jump.resize(dom.n - dom.n2);
  for (int d = 0; d < dom.n - dom.n2; ++d) is >> dom.periods[d] >> dom.seam_jump[d];
  dom.lambdas.resize(dom.n);
  for (int d = 0; d < dom.n; ++d) is >> dom.lambdas[d];
  if (!is) throw IoError(what + ": truncated header");
  Field u(dom);
  for (long long i = 0; i < u.size(); ++i)
    if (!(is >> u[i])) throw IoError(what + ": truncated values");
  return u;
}

inline Field read_field(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path);
  return read_field(is, path);
}

}  // namespace mblab
