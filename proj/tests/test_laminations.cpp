#include <catch2/catch_amalgamated.hpp>
#include <set>

#include "mblab/laminations.hpp"

using namespace mblab;
using Catch::Approx;

TEST_CASE("orbit of a linear field with alpha = 1/2") {
  auto dom = DomainSpec::torus(1, {2}, {1}, 8);
  Field u = affine_field(dom, {0.5});
  auto orb = build_orbit(u, 2);
  // values are {-k/2 + k2 : |k|,|k2| <= 2} = multiples of 1/2 in [-3, 3]
  std::set<double> expect;
  for (int k = -2; k <= 2; ++k)
    for (int k2 = -2; k2 <= 2; ++k2) expect.insert(-0.5 * k + k2);
  REQUIRE(orb.sorted_values.size() == expect.size());
  size_t i = 0;
  for (double v : expect) CHECK(orb.sorted_values[i++] == Approx(v).margin(1e-12));
  // stored values reproduce the translate evaluation bit-exactly
  for (const auto& [k, val] : orb.shifts) {
    Field t = translate(u, k);
    CHECK(t.value_at_origin() == val);
  }
}

TEST_CASE("orbit of a constant field") {
  auto dom = DomainSpec::torus(1, {1}, {0}, 4);
  Field u(dom, 0.25);
  auto orb = build_orbit(u, 1);
  REQUIRE(orb.sorted_values.size() == 3);
  CHECK(orb.sorted_values[0] == Approx(-0.75));
  CHECK(orb.sorted_values[1] == Approx(0.25));
  CHECK(orb.sorted_values[2] == Approx(1.25));
}

TEST_CASE("recurrent hulls bracket the field") {
  auto dom = DomainSpec::torus(1, {2}, {1}, 8);
  Field u = affine_field(dom, {0.5});
  RotationVector alpha{{QuadraticNumber(Rational(1, 2))}};
  auto sys = make_direction_system(alpha, false);

  Field below = recurrent_hull(u, sys, HullSign::sup_below, 3);
  Field above = recurrent_hull(u, sys, HullSign::inf_above, 3);
  for (long long i = 0; i < u.size(); ++i) {
    CHECK(below[i] <= u[i] + 1e-12);
    CHECK(above[i] >= u[i] - 1e-12);
  }
  // for the linear field the nearest below-translate sits 1/2 under u
  for (long long i = 0; i < u.size(); ++i) {
    CHECK(below[i] == Approx(u[i] - 0.5));
    CHECK(above[i] == Approx(u[i] + 0.5));
  }

  // pendulum constants: hull below of u = 0 is the next integer down
  auto domp = DomainSpec::torus(1, {1}, {0}, 8);
  RotationVector zero{{QuadraticNumber(0)}};
  auto sysz = make_direction_system(zero, false);
  Field c(domp, 0.0);
  Field hb = recurrent_hull(c, sysz, HullSign::sup_below, 2);
  for (long long i = 0; i < hb.size(); ++i) CHECK(hb[i] == Approx(-1.0));
}

TEST_CASE("gap detection on the pendulum constants: unit gap") {
  auto dom = DomainSpec::torus(1, {1}, {0}, 16);
  Field u(dom, 0.0);
  auto orb = build_orbit(u, 2);
  auto rep = detect_gaps(orb, 10.0 * dom.h());
  REQUIRE(rep.gaps.size() == 1);
  CHECK(rep.gaps[0].lower == Approx(0.0).margin(1e-12));
  CHECK(rep.gaps[0].upper == Approx(1.0).margin(1e-12));
  CHECK(rep.gaps[0].width == Approx(1.0).margin(1e-12));
  CHECK(rep.classification == GapClass::lamination_like);
  // representative pair: two consecutive constants
  auto pair = gap_representatives(orb, rep.gaps[0]);
  CHECK(pair.upper.value_at_origin() - pair.lower.value_at_origin() == Approx(1.0));
}

TEST_CASE("gap widths per unit interval sum to at most 1") {
  auto dom = DomainSpec::torus(1, {3}, {2}, 8);
  Field u = affine_field(dom, {2.0 / 3.0});
  for (long long i = 0; i < u.size(); ++i)
    u[i] += 0.05 * std::sin(kTwoPi * dom.coord(0, i % dom.node_count(0)));
  auto orb = build_orbit(u, 3);
  auto rep = detect_gaps(orb, 1e-3);
  double total = 0.0;
  for (const auto& g : rep.gaps) total += g.width;
  CHECK(total <= 1.0 + 1e-9);
}

TEST_CASE("increasing the shift bound never widens gaps") {
  auto dom = DomainSpec::torus(1, {5}, {3}, 8);
  Field u = affine_field(dom, {3.0 / 5.0});
  auto orb1 = build_orbit(u, 2);
  auto orb2 = build_orbit(u, 4);
  auto rep1 = detect_gaps(orb1, 1e-6);
  auto rep2 = detect_gaps(orb2, 1e-6);
  CHECK(rep2.max_width <= rep1.max_width + 1e-12);
}

TEST_CASE("approximate_recurrent with F = 0: linear stages, 1/q^2 deltas") {
  RotationVector golden{{QuadraticNumber(Rational(1, 2), Rational(1, 2), 5)}};
  SolverConfig cfg;
  auto appr = approximate_recurrent(golden, 4, PotentialSpec::zero(1), 16, cfg);
  REQUIRE(appr.stages.size() == 4);
  REQUIRE(appr.c0_deltas.size() == 3);
  // stage k is linear with slope p_k/q_k, so consecutive C0 distances on
  // [0,1] obey |a_k - a_{k+1}| <= |p_k/q_k - p_{k+1}/q_{k+1}| + normalization
  auto cs = convergents(golden.entries[0], 4);
  for (size_t s = 0; s + 1 < 4; ++s) {
    double slope_gap = std::abs(cs[s].to_double() - cs[s + 1].to_double());
    CHECK(appr.c0_deltas[s] <= slope_gap + 1e-6);
  }
  // every stage is a clean linear minimizer: residual ~ 0
  for (const auto& st : appr.stages) {
    CHECK(st.converged);
    CHECK(st.residual <= 1e-10);
  }
  CHECK_THROWS_AS(
      approximate_recurrent(RotationVector{{QuadraticNumber(Rational(1, 2))}}, 3,
                            PotentialSpec::zero(1), 16, cfg),
      RationalInput);
}

TEST_CASE("strong pinning at the golden mean: persistent gap, stable width") {
  // pendulum with x factor, eps = 2; convergent depths 3 -> 4
  RotationVector golden{{QuadraticNumber(Rational(1, 2), Rational(1, 2), 5)}};
  auto pot = pendulum_with_x_factor(1, 2.0);
  SolverConfig cfg;
  cfg.residual_tol = 1e-9;
  int m = 32;
  auto appr = approximate_recurrent(golden, 4, pot, m, cfg);
  auto orb3 = build_orbit(appr.stages[2].field, 6);
  auto orb4 = build_orbit(appr.stages[3].field, 6);
  double tol = 10.0 / m;
  auto rep3 = detect_gaps(orb3, tol);
  auto rep4 = detect_gaps(orb4, tol);
  CHECK(rep3.classification == GapClass::lamination_like);
  CHECK(rep4.classification == GapClass::lamination_like);
  CHECK(std::abs(rep3.max_width - rep4.max_width) <=
        0.2 * std::max(rep3.max_width, rep4.max_width));
  // Cauchy monitoring: the last two stages agree within 1e-2 on [0,1]
  CHECK(appr.c0_deltas.back() <= 1e-2);

  // J1 of the upper representative relative to the lower one vanishes on a
  // period-aligned window: both are translates of the same minimizer
  const Gap* g = &rep4.gaps.front();
  for (const auto& gg : rep4.gaps)
    if (gg.width > g->width) g = &gg;
  auto pair = gap_representatives(orb4, *g);
  DomainSpec line = DomainSpec::cylinder(1, {-6}, {6}, {}, {}, m);
  ConstraintPair ext{extend_to_cylinder(pair.lower, line),
                     extend_to_cylinder(pair.upper, line)};
  double jw = J1_window(ext.upper, ext.lower, pot, {-6}, {5});
  CHECK(std::abs(jw) <= 1e-6);
}
