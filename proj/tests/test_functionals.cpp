#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "mblab/functionals.hpp"

using namespace mblab;
using Catch::Approx;

namespace {

Field linear_field(const DomainSpec& dom, const std::vector<double>& slope, double c0 = 0.0) {
  Field u(dom);
  for_each_node(dom, [&](long long flat, const std::vector<long long>& idx) {
    double s = c0;
    for (int d = 0; d < dom.n; ++d) s += slope[d] * dom.coord(d, idx[d]);
    u[flat] = s;
  });
  return u;
}

Field random_in_pair(const ConstraintPair& pair, std::mt19937_64& rng) {
  Field u(pair.lower.domain());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (long long i = 0; i < u.size(); ++i)
    u[i] = pair.lower[i] + unif(rng) * (pair.upper[i] - pair.lower[i]);
  return u;
}

}  // namespace

TEST_CASE("local lagrangian on single cells") {
  auto dom = DomainSpec::torus(2, {1, 1}, {0, 0}, 4);
  auto zero_pot = PotentialSpec::zero(2);

  Field z(dom, 0.0);
  CHECK(cell_energy(z, zero_pot, {0, 0}) == 0.0);

  // u = alpha . x with lambda = 1: (1/2)|alpha|^2 per unit volume
  auto domj = DomainSpec::torus(2, {2, 1}, {1, 0}, 4);
  Field lin = linear_field(domj, {0.5, 0.0});
  double per_cell = cell_energy(lin, zero_pot, {0, 0});
  double vol = std::pow(domj.h(), 2);
  CHECK(per_cell == Approx(0.5 * 0.25 * vol));
  // every cell identical, including across the seam
  for_each_cell(domj, [&](const std::vector<long long>& c) {
    CHECK(cell_energy(lin, zero_pot, c) == Approx(per_cell).margin(1e-15));
  });

  // pendulum at u = 1/2: F-part = 2 eps * vol
  auto pend = pendulum_potential(2, 0.25);
  Field half(dom, 0.5);
  CHECK(cell_energy(half, pend, {0, 0}) == Approx(2 * 0.25 * vol));
}

TEST_CASE("J1 window: zeros, hat bump oracle, additivity") {
  auto dom = DomainSpec::cylinder(1, {-2}, {2}, {}, {}, 4);
  auto zero_pot = PotentialSpec::zero(1);
  Field v(dom, 0.0);

  CHECK(J1_window(v, v, zero_pot, {-2}, {1}) == 0.0);

  // hat of height 1 over [0,1] at h = 1/4: discrete Dirichlet energy
  Field hat(dom, 0.0);
  for_each_node(dom, [&](long long flat, const std::vector<long long>& idx) {
    double x = dom.coord(0, idx[0]);
    hat[flat] = std::max(0.0, 1.0 - 2.0 * std::abs(x - 0.5));
  });
  double direct = 0.0;  // nodewise oracle with forward differences
  for (long long i = 0; i + 1 < hat.size(); ++i) {
    double d = (hat[i + 1] - hat[i]) / dom.h();
    direct += 0.5 * d * d * dom.h();
  }
  CHECK(J1_window(hat, v, zero_pot, {-2}, {1}) == Approx(direct));
  CHECK(direct == Approx(2.0));

  // additivity over a split window
  std::mt19937_64 rng(4);
  ConstraintPair pair{Field(dom, 0.0), Field(dom, 1.0)};
  Field u = random_in_pair(pair, rng);
  auto pot = pendulum_potential(1, 0.25);
  double whole = J1_window(u, v, pot, {-2}, {1});
  double left = J1_window(u, v, pot, {-2}, {-1});
  double right = J1_window(u, v, pot, {0}, {1});
  CHECK(whole == Approx(left + right).margin(1e-12));

  CHECK_THROWS_AS(J1_window(u, v, pot, {-3}, {1}), WindowOutOfRange);
}

TEST_CASE("J1 renormalized value") {
  auto pot = pendulum_potential(1, 0.25);
  auto dom = DomainSpec::torus(1, {1}, {0}, 16);
  ConstraintPair pair{Field(dom, 0.0), Field(dom, 1.0)};

  SECTION("u = v gives zero, converged") {
    auto rv = J1(pair.lower, pair.lower, pot, pair, 1e-6);
    CHECK(rv.total == 0.0);
    CHECK(rv.converged);
  }
  SECTION("u = w gives zero for the pendulum pair") {
    auto rv = J1(pair.upper, pair.lower, pot, pair, 1e-6);
    CHECK(rv.total == Approx(0.0).margin(1e-13));
  }
  SECTION("a clamped bump has positive J1") {
    Field bump(dom, 0.0);
    bump[3] = 0.4;
    bump[4] = 0.6;
    bump[5] = 0.4;
    Field u = clamp(bump, pair);
    auto rv = J1(u, pair.lower, pot, pair, 1e-6);
    CHECK(rv.total > 0.0);
  }
  SECTION("membership is enforced") {
    Field above(dom, 1.5);
    CHECK_THROWS_AS(J1(above, pair.lower, pot, pair, 1e-6), NotInGamma1);
  }
}

TEST_CASE("K1 bound constants") {
  SECTION("constants with F = 0") {
    auto dom = DomainSpec::torus(1, {1}, {0}, 32);
    auto bc = K1_bound(Field(dom, 0.0), Field(dom, 1.0), PotentialSpec::zero(1));
    CHECK(bc.C_alpha == 0.0);
    CHECK(bc.K1 == 0.0);
  }
  SECTION("pendulum pair (0,1) on the torus: K1 = pi") {
    auto dom = DomainSpec::torus(1, {1}, {0}, 32);
    auto bc = K1_bound(Field(dom, 0.0), Field(dom, 1.0), pendulum_potential(1, 0.25));
    CHECK(bc.gap_L1 == Approx(1.0).margin(1e-12));
    CHECK(bc.Fu_sup == Approx(kTwoPi * 0.25));
    CHECK(bc.K1 == Approx(3.14159265358979).margin(1e-10));
    CHECK(bc.K1 >= 0.0);
  }
}

namespace {

// Gamma_2 test bed: 1-D pendulum cylinder over [-3, 4].
struct J2Fixture {
  DomainSpec dom = DomainSpec::cylinder(1, {-3}, {4}, {}, {}, 8);
  PotentialSpec pot = pendulum_potential(1, 0.25);
  ConstraintPair pair{Field(dom, 0.0), Field(dom, 1.0)};
  Field sharp_interface() const {
    Field u(dom, 0.0);
    for_each_node(dom, [&](long long flat, const std::vector<long long>& idx) {
      u[flat] = dom.coord(0, idx[0]) >= 0.5 ? 1.0 : 0.0;
    });
    return u;
  }
};

}  // namespace

TEST_CASE("J2 strips and totals") {
  J2Fixture fx;

  SECTION("u = v and u = w vanish per strip") {
    for (int i = -3; i < 4; ++i) {
      CHECK(J2_strip(fx.pair.lower, fx.pair, fx.pot, i) == 0.0);
      CHECK(J2_strip(fx.pair.upper, fx.pair, fx.pot, i) == Approx(0.0).margin(1e-13));
    }
    CHECK_THROWS_AS(J2_strip(fx.pair.lower, fx.pair, fx.pot, 8), StripOutOfRange);
  }
  SECTION("linear blend concentrates in its strip") {
    Field u(fx.dom);
    for_each_node(fx.dom, [&](long long flat, const std::vector<long long>& idx) {
      double x = fx.dom.coord(0, idx[0]);
      u[flat] = std::clamp(x, 0.0, 1.0);
    });
    CHECK(J2_strip(u, fx.pair, fx.pot, 0) > 0.0);
    CHECK(J2_strip(u, fx.pair, fx.pot, -2) == Approx(0.0).margin(1e-13));
    CHECK(J2_strip(u, fx.pair, fx.pot, 2) == Approx(0.0).margin(1e-13));
  }
  SECTION("sharp interface: finite positive total, per-strip breakdown") {
    Field u = fx.sharp_interface();
    auto rv = J2(u, fx.pair, fx.pot, 1e-6);
    CHECK(rv.total > 0.0);
    CHECK(rv.window_terms.size() == 7);
    double sum = 0.0;
    for (auto& [k, val] : rv.window_terms) sum += val;
    CHECK(rv.total == Approx(sum).margin(1e-12));
    CHECK(rv.converged);
  }
  SECTION("u = v violates the +P side") {
    CHECK_THROWS_AS(J2(fx.pair.lower, fx.pair, fx.pot, 1e-6), NotInGamma2);
  }
}

TEST_CASE("membership diagnostics") {
  J2Fixture fx;
  auto in_g1 = membership(fx.pair.lower, ConstraintClass::Gamma1, fx.pair, 1e-9);
  CHECK(in_g1.ok);
  Field above(fx.dom, 1.5);
  auto out_g1 = membership(above, ConstraintClass::Gamma1, fx.pair, 1e-9);
  CHECK_FALSE(out_g1.ok);
  CHECK(out_g1.first_violation.find("u > w") != std::string::npos);

  // compactly supported perturbation of v~ passes branch (b)
  Field tilde = fx.sharp_interface();
  Field pert = tilde;
  long long mid = pert.size() / 2;
  pert[mid] = std::min(1.0, pert[mid] + 0.25);
  auto memb = membership(pert, ConstraintClass::Gamma2_tilde, fx.pair, 1e-6, &tilde);
  CHECK(memb.ok);
}

TEST_CASE("submodularity: J(meet) + J(join) <= J(a) + J(b) + 1e-12") {
  auto dom = DomainSpec::cylinder(1, {-2}, {2}, {}, {}, 8);
  auto pot = pendulum_with_x_factor(1, 0.7);
  Field v(dom, 0.0);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    Field a(dom), b(dom);
    for (long long i = 0; i < a.size(); ++i) {
      a[i] = unif(rng);
      b[i] = unif(rng);
    }
    auto [meet, join] = meet_join(a, b);
    double lhs = J1_window(meet, v, pot, {-2}, {1}) + J1_window(join, v, pot, {-2}, {1});
    double rhs = J1_window(a, v, pot, {-2}, {1}) + J1_window(b, v, pot, {-2}, {1});
    REQUIRE(lhs <= rhs + 1e-12);
  }
}

TEST_CASE("window lower bound and the windowed upper bound") {
  J2Fixture fx;
  auto bc = K1_bound(fx.pair.lower, fx.pair.upper, fx.pot);
  std::mt19937_64 rng(55);
  double slack = 10.0 * fx.dom.h();
  std::uniform_int_distribution<int> pq(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    Field u = random_in_pair(fx.pair, rng);
    int p = pq(rng), q = pq(rng);
    if (p > q) std::swap(p, q);
    double j = J1_window(u, fx.pair.lower, fx.pot, {p}, {q});
    REQUIRE(j >= -bc.K1 - slack);
  }
  // windows of a converged (here: exact) minimizer respect J1 + M K1
  int M = 1;
  for (int d = 0; d < fx.dom.n2; ++d) M *= 3;
  auto rv = J1(fx.pair.upper, fx.pair.lower, fx.pot, fx.pair, 1e-6);
  for (int p = -3; p < 4; ++p)
    for (int q = p; q < 4; ++q) {
      double jw = J1_window(fx.pair.upper, fx.pair.lower, fx.pot, {p}, {q});
      REQUIRE(jw <= rv.total + M * bc.K1 + slack);
    }
}

TEST_CASE("J2 partial sums stay below the total plus 2 K2") {
  // kink-like profile with finite J2: every strip-range partial sum obeys
  // the windowed upper bound
  J2Fixture fx;
  Field u(fx.dom);
  for_each_node(fx.dom, [&](long long flat, const std::vector<long long>& idx) {
    double x = fx.dom.coord(0, idx[0]) - 0.5;
    u[flat] = (2.0 / 3.14159265358979) * std::atan(std::exp(kTwoPi * 0.5 * x));
  });
  u = clamp(u, fx.pair);
  auto bc = K1_bound(fx.pair.lower, fx.pair.upper, fx.pot);
  auto rv = J2(u, fx.pair, fx.pot, 1e-2);
  double slack = 10.0 * fx.dom.h();
  for (int p = -3; p < 4; ++p)
    for (int q = p; q < 4; ++q) {
      double sum = 0.0;
      for (int i = p; i <= q; ++i) sum += J2_strip(u, fx.pair, fx.pot, i);
      REQUIRE(sum <= rv.total + 2.0 * bc.K2 + slack);
    }
}

TEST_CASE("verifiers are pure: re-running reproduces the report exactly") {
  auto dom = DomainSpec::torus(1, {1}, {0}, 16);
  Field v(dom, 0.0), w(dom, 1.0);
  auto a = gap_norm(v, w, 2);
  auto b = gap_norm(v, w, 2);
  CHECK(std::memcmp(&a, &b, sizeof(double)) == 0);
}

TEST_CASE("box norms are additive: cell L2 over boxes sums to the global norm") {
  auto dom = DomainSpec::cylinder(1, {-3}, {3}, {}, {}, 8);
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Field v(dom), w(dom);
  for (long long i = 0; i < v.size(); ++i) {
    double a = unif(rng), b = unif(rng);
    v[i] = std::min(a, b);
    w[i] = std::max(a, b);
  }
  double by_boxes = 0.0;
  for (int k = -3; k < 3; ++k) by_boxes += box_L2sq(w, v, {k});
  // cell corner averaging reproduces the trapezoid node weights exactly
  CHECK(by_boxes == Approx(gap_norm(v, w, 2)).margin(1e-13));
}

TEST_CASE("translation covariance of J1 terms for k in Lambda_2") {
  // alpha = 1/2 on the 2-torus; kbar = (2,1) fixes u and v
  auto dom = DomainSpec::torus(1, {2}, {1}, 8);
  auto pot = pendulum_with_x_factor(1, 0.3);
  Field v = linear_field(dom, {0.5});
  Field w = v;
  for (long long i = 0; i < w.size(); ++i) w[i] += 1.0;
  ConstraintPair pair{v, w};
  std::mt19937_64 rng(8);
  Field u = random_in_pair(pair, rng);

  IntVec kbar = {2, 1};
  Field tu = translate(u, kbar);
  Field tv = translate(v, kbar);
  auto rv1 = J1(u, v, pot, pair, 1e-6);
  auto rv2 = J1(tu, tv, pot, pair, 1e-6);
  CHECK(rv2.total == Approx(rv1.total).margin(1e-12));
}
