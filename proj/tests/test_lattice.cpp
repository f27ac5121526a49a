#include <catch2/catch_amalgamated.hpp>

#include "mblab/lattice.hpp"

using namespace mblab;

namespace {

QuadraticNumber surd(long long d) { return QuadraticNumber(Rational(0), Rational(1), d); }

// Brute-force oracle: all integer vectors with entries in [-bound, bound]
// exactly orthogonal to every direction.
std::vector<IntVec> enumerate_kernel(const std::vector<QVec>& dirs, int dim, long long bound) {
  std::vector<IntVec> out;
  IntVec k(dim, -bound);
  while (true) {
    bool nonzero = false;
    for (long long x : k) nonzero |= x != 0;
    if (nonzero) {
      bool ortho = true;
      for (const auto& d : dirs) ortho &= dot(d, k).is_zero();
      if (ortho) out.push_back(k);
    }
    int i = 0;
    for (; i < dim; ++i) {
      if (++k[i] <= bound) break;
      k[i] = -bound;
    }
    if (i == dim) break;
  }
  return out;
}

int rank_by_enumeration(const std::vector<QVec>& dirs, int dim, long long bound) {
  auto vecs = enumerate_kernel(dirs, dim, bound);
  // greedy rational-rank computation
  std::vector<IntVec> indep;
  for (const auto& v : vecs) {
    std::vector<Rational> vr(v.size());
    for (size_t i = 0; i < v.size(); ++i) vr[i] = Rational(v[i]);
    if (!in_rational_span(indep, vr)) indep.push_back(v);
  }
  return static_cast<int>(indep.size());
}

}  // namespace

TEST_CASE("integer orthogonal lattice: named examples") {
  SECTION("last-coordinate form gives Z^n x {0}") {
    int n = 3;
    QVec dir(n + 1, QuadraticNumber(0));
    dir[n] = QuadraticNumber(1);
    auto lat = integer_orthogonal_lattice({dir}, n + 1);
    CHECK(lat.rank() == n);
    for (const auto& b : lat.basis) {
      CHECK(b[n] == 0);
      CHECK(dot(dir, b).is_zero());
    }
  }
  SECTION("(-sqrt2, -sqrt2, 1): basis {(1,-1,0)}") {
    QVec dir = {-surd(2), -surd(2), QuadraticNumber(1)};
    auto lat = integer_orthogonal_lattice({dir}, 3);
    REQUIRE(lat.rank() == 1);
    IntVec b = lat.basis[0];
    if (b[0] < 0)
      for (auto& x : b) x = -x;
    CHECK(b == IntVec{1, -1, 0});
    // confirm against exhaustive enumeration
    auto oracle = enumerate_kernel({dir}, 3, 3);
    for (const auto& k : oracle) {
      std::vector<Rational> kr(3);
      for (int i = 0; i < 3; ++i) kr[i] = Rational(k[i]);
      CHECK(in_rational_span(lat.basis, kr));
    }
  }
  SECTION("two independent forms in Z^2 leave the zero lattice") {
    QVec d1 = {QuadraticNumber(Rational(-1, 2)), QuadraticNumber(1)};
    QVec d2 = {QuadraticNumber(1), QuadraticNumber(Rational(1, 2))};
    auto lat = integer_orthogonal_lattice({d1, d2}, 2);
    CHECK(lat.rank() == 0);
    CHECK(lat.is_zero());
  }
}

TEST_CASE("make_direction_system: named examples") {
  SECTION("alpha = (1/2), no second invariant") {
    RotationVector alpha{{QuadraticNumber(Rational(1, 2))}};
    auto sys = make_direction_system(alpha, false);
    CHECK(sys.t == 1);
    REQUIRE(sys.dir1.size() == 2);
    CHECK(sys.dir1[0] == QuadraticNumber(Rational(-1, 2)));
    CHECK(sys.dir1[1] == QuadraticNumber(1));
    REQUIRE(sys.lambda(2).rank() == 1);
    IntVec b = sys.lambda(2).basis[0];
    if (b[0] < 0)
      for (auto& x : b) x = -x;
    CHECK(b == IntVec{2, 1});
  }
  SECTION("alpha = (sqrt2): Lambda_2 = {0} by irrationality") {
    RotationVector alpha{{surd(2)}};
    auto sys = make_direction_system(alpha, false);
    CHECK(sys.lambda(2).rank() == 0);
    CHECK_THROWS_AS(make_direction_system(alpha, true), SecondInvariantUnavailable);
  }
  SECTION("alpha = (sqrt2, 0) with second invariant") {
    RotationVector alpha{{surd(2), QuadraticNumber(0)}};
    auto sys = make_direction_system(alpha, true);
    CHECK(sys.t == 2);
    REQUIRE(sys.lambda(2).rank() == 1);
    IntVec b = sys.lambda(2).basis[0];
    if (b[1] < 0)
      for (auto& x : b) x = -x;
    CHECK(b == IntVec{0, 1, 0});
    REQUIRE(sys.dir2.has_value());
    CHECK(*sys.dir2 == IntVec{0, -1, 0});
    CHECK(sys.n2() == 1);
    // oracle: same enumeration in Z^3
    auto oracle = enumerate_kernel({sys.dir1}, 3, 3);
    for (const auto& k : oracle) {
      std::vector<Rational> kr(3);
      for (int i = 0; i < 3; ++i) kr[i] = Rational(k[i]);
      CHECK(in_rational_span(sys.lambda(2).basis, kr));
    }
  }
}

TEST_CASE("admissibility") {
  RotationVector half{{QuadraticNumber(Rational(1, 2))}};
  auto sys = make_direction_system(half, false);
  CHECK(is_admissible(sys));

  DirectionSystem flipped = sys;
  flipped.dir1 = {QuadraticNumber(Rational(1, 2)), QuadraticNumber(-1)};
  CHECK_FALSE(is_admissible(flipped));

  RotationVector a2{{surd(2), QuadraticNumber(0)}};
  auto sys2 = make_direction_system(a2, true);
  CHECK(is_admissible(sys2));
  // dir2 = +e^2 is also in span(Lambda_2)
  DirectionSystem sysplus = sys2;
  sysplus.dir2 = IntVec{0, 1, 0};
  CHECK(is_admissible(sysplus));
  // a vector outside span(Lambda_2) is rejected
  DirectionSystem sysbad = sys2;
  sysbad.dir2 = IntVec{1, 0, 0};
  CHECK_FALSE(is_admissible(sysbad));
}

TEST_CASE("lattice basis vectors are exactly orthogonal to their directions") {
  std::vector<RotationVector> alphas = {
      RotationVector{{QuadraticNumber(Rational(1, 2))}},
      RotationVector{{surd(2)}},
      RotationVector{{surd(2), QuadraticNumber(0)}},
      RotationVector{{surd(2), surd(2)}},
      RotationVector{{QuadraticNumber(Rational(1, 3)), QuadraticNumber(Rational(2, 5))}},
      RotationVector{{QuadraticNumber(Rational(1, 2), Rational(1, 2), 5),
                      QuadraticNumber(Rational(-1, 3))}},
  };
  for (const auto& alpha : alphas) {
    auto sys = make_direction_system(alpha, false);
    for (const auto& b : sys.lambda(2).basis) CHECK(dot(sys.dir1, b).is_zero());
  }
}

TEST_CASE("rank by Hermite form equals rank by enumeration (n <= 3)") {
  std::vector<QVec> dir_sets[] = {
      {{-surd(2), QuadraticNumber(1)}},
      {{-surd(2), -surd(2), QuadraticNumber(1)}},
      {{QuadraticNumber(Rational(-1, 2)), QuadraticNumber(Rational(-1, 3)),
        QuadraticNumber(1)}},
      {{-surd(5), QuadraticNumber(0), QuadraticNumber(1)}},
      {{QuadraticNumber(2), QuadraticNumber(-3), QuadraticNumber(1)},
       {QuadraticNumber(0), QuadraticNumber(1), QuadraticNumber(0)}},
      {{QuadraticNumber(Rational(-3, 5)), QuadraticNumber(Rational(4, 5)),
        QuadraticNumber(0), QuadraticNumber(1)}},
  };
  for (const auto& dirs : dir_sets) {
    int dim = static_cast<int>(dirs[0].size());
    auto lat = integer_orthogonal_lattice(dirs, dim);
    CHECK(lat.rank() == rank_by_enumeration(dirs, dim, 5));
  }
}

TEST_CASE("coordinate reduction: named examples") {
  SECTION("alpha = (sqrt2, sqrt2)") {
    RotationVector alpha{{surd(2), surd(2)}};
    auto red = reduce_coordinates(alpha);
    REQUIRE(red.lambdas == std::vector<long long>{2, 2});
    // B^T B = diag(2,2) exactly
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        long long dp = 0;
        for (int i = 0; i < 2; ++i) dp += red.B[i][j] * red.B[i][k];
        CHECK(dp == (j == k ? red.lambdas[j] : 0));
      }
    CHECK(red.B[0][0] == 1);
    CHECK(red.B[1][0] == 1);
    CHECK(red.B[0][1] == 1);
    CHECK(red.B[1][1] == -1);
    CHECK(red.new_rotation[0] == QuadraticNumber(Rational(0), Rational(2), 2));
    CHECK(red.new_rotation[1].is_zero());
    CHECK(red.n2 == 1);
  }
  SECTION("alpha = (sqrt2, 0): already aligned") {
    RotationVector alpha{{surd(2), QuadraticNumber(0)}};
    auto red = reduce_coordinates(alpha);
    CHECK(red.lambdas == std::vector<long long>{1, 1});
    CHECK(red.new_rotation[0] == surd(2));
    CHECK(red.new_rotation[1].is_zero());
  }
  SECTION("rank preconditions") {
    RotationVector rational1{{QuadraticNumber(Rational(1, 2))}};
    CHECK_THROWS_AS(reduce_coordinates(rational1), ReductionUnavailable);
    RotationVector irr1{{surd(2)}};
    CHECK_THROWS_AS(reduce_coordinates(irr1), ReductionUnavailable);
  }
}

TEST_CASE("reduction invariants: B orthogonal columns, det != 0, rational stays rational") {
  std::vector<RotationVector> alphas = {
      RotationVector{{surd(2), surd(2)}},
      RotationVector{{surd(2), QuadraticNumber(0)}},
      RotationVector{{QuadraticNumber(Rational(1), Rational(1), 2), QuadraticNumber(3)}},
      RotationVector{{surd(3), surd(3), QuadraticNumber(Rational(1, 2))}},
  };
  for (const auto& alpha : alphas) {
    auto red = reduce_coordinates(alpha);
    int n = alpha.n();
    for (int j = 0; j < n; ++j) {
      long long nrm = 0;
      for (int i = 0; i < n; ++i) nrm += red.B[i][j] * red.B[i][j];
      CHECK(nrm == red.lambdas[j]);
      CHECK(nrm > 0);
      for (int k = j + 1; k < n; ++k) {
        long long dp = 0;
        for (int i = 0; i < n; ++i) dp += red.B[i][j] * red.B[i][k];
        CHECK(dp == 0);
      }
    }
    // trailing entries of alpha*B*diag(1/lambda) are rational
    for (int j = red.n2; j < n; ++j)
      CHECK(red.new_rotation[j].is_rational());
  }
  // a fully rational alpha in the reducible range keeps a rational new rotation
  RotationVector ratv{{QuadraticNumber(Rational(1, 2)), QuadraticNumber(Rational(1, 2))}};
  auto sys = make_direction_system(ratv, false);
  if (sys.lambda(2).rank() >= 1 && sys.lambda(2).rank() <= ratv.n() - 1) {
    auto red = reduce_coordinates(ratv);
    for (const auto& c : red.new_rotation) CHECK(c.is_rational());
  }
}
