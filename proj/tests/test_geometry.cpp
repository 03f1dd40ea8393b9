#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "mploc/grid.hpp"
#include "support.hpp"

using namespace mploc;
using testing_support::cfg;

namespace {

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

// Brute-force permutation distance on d = 1 configurations.
int brute_sym_dist(std::vector<int> x, const std::vector<int>& y) {
  std::sort(x.begin(), x.end());
  int best = 1 << 30;
  do {
    int m = 0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
    best = std::min(best, m);
  } while (std::next_permutation(x.begin(), x.end()));
  return best;
}

LatticeConfig random_config(std::mt19937_64& rng, int n, int d, int span) {
  std::uniform_int_distribution<int> u(-span, span);
  std::vector<int> c(static_cast<std::size_t>(n * d));
  for (auto& v : c) v = u(rng);
  return LatticeConfig(std::move(c), n, d);
}

// Gap between the closed projections [c - L - 1/2, c + L + 1/2] of two
// particle groups in d = 1.
double interval_gap(const LatticeConfig& u, int L, const std::vector<int>& J, const std::vector<int>& Jc) {
  double gap = 1e300;
  for (int i : J)
    for (int j : Jc) {
      const double lo_i = u[i] - L - 0.5, hi_i = u[i] + L + 0.5;
      const double lo_j = u[j] - L - 0.5, hi_j = u[j] + L + 0.5;
      gap = std::min(gap, std::max({0.0, lo_j - hi_i, lo_i - hi_j}));
    }
  return gap;
}

}  // namespace

TEST_CASE("ball cardinality on the documented cases") {
  CHECK(lattice_ball({cfg({0, 0}), 5}).size() == 121);
  CHECK(lattice_ball({cfg({0, 0, 0}), 2}).size() == 125);
  const auto single = lattice_ball({cfg({3, -1}, 2), 0});
  REQUIRE(single.size() == 1);
  CHECK(single[0] == cfg({3, -1}, 2));
}

TEST_CASE("ball cardinality law and membership for L <= 6, Nd <= 4") {
  for (int nd = 1; nd <= 4; ++nd)
    for (int L = 0; L <= 6; ++L) {
      std::vector<int> c(static_cast<std::size_t>(nd));
      for (int i = 0; i < nd; ++i) c[i] = 3 * i - 2;
      const CubeSpec cube{LatticeConfig(c, nd, 1), L};
      const auto ball = lattice_ball(cube);
      REQUIRE(ball.size() == ipow(2 * L + 1, nd));
      CHECK(cube.ball_cardinality() == ball.size());
      const std::set<LatticeConfig> uniq(ball.begin(), ball.end());
      CHECK(uniq.size() == ball.size());
      for (const auto& y : ball) REQUIRE(max_norm_dist(y, cube.center) <= L);
    }
}

TEST_CASE("boundary set sizes") {
  CHECK(boundary_set({cfg({0, 0}), 5}).size() == 40);
  CHECK(boundary_set({cfg({0, 0}), 2}).size() == 16);
  auto b = boundary_set({cfg({7}), 3});
  std::sort(b.begin(), b.end());
  REQUIRE(b.size() == 2);
  CHECK(b[0] == cfg({4}));
  CHECK(b[1] == cfg({10}));
  CHECK_THROWS_AS(boundary_set({cfg({0}), 0}), GeometryError);
  for (int nd = 1; nd <= 3; ++nd)
    for (int L = 1; L <= 4; ++L)
      CHECK(boundary_set({LatticeConfig::zero(nd, 1), L}).size() == ipow(2 * L + 1, nd) - ipow(2 * L - 1, nd));
}

TEST_CASE("belt cover: every belt grid point sits in a boundary cell") {
  for (int mesh : {1, 2, 4})
    for (int L = 1; L <= 3; ++L) {
      const CubeSpec cube{cfg({1, -2}), L};
      const GridSpec grid(cube, mesh);
      const auto bset = boundary_set(cube);
      std::set<Index> expected;
      for (Index i = 0; i < grid.size(); ++i) {
        const auto p = grid.position(i);
        // Cells are half-open: (y - 1/2, y + 1/2].
        const bool covered = std::any_of(bset.begin(), bset.end(), [&](const LatticeConfig& y) {
          for (std::size_t k = 0; k < p.size(); ++k)
            if (!(p[k] > y[k] - 0.5 && p[k] <= y[k] + 0.5)) return false;
          return true;
        });
        if (covered) expected.insert(i);
      }
      CHECK_FALSE(expected.empty());
      const auto belt = grid.belt_points();
      CHECK(std::set<Index>(belt.begin(), belt.end()) == expected);
    }
}

TEST_CASE("cells partition the grid") {
  const CubeSpec cube{cfg({0, 0}), 2};
  const GridSpec grid(cube, 2);
  std::vector<int> seen(static_cast<std::size_t>(grid.size()), 0);
  for (const auto& x : lattice_ball(cube))
    for (Index i : grid.cell_points(x)) ++seen[static_cast<std::size_t>(i)];
  CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
}

TEST_CASE("sym_dist examples") {
  CHECK(sym_dist(cfg({0, 3}), cfg({0, 3})) == 0);
  CHECK(sym_dist(cfg({0, 3}), cfg({3, 0})) == 0);
  CHECK(sym_dist(cfg({0, 3}), cfg({1, 5})) == 2);
}

TEST_CASE("sym_dist is a pseudometric matching brute force") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1500; ++trial) {
    const int n = 1 + trial % 4;
    const auto x = random_config(rng, n, 1, 20);
    const auto y = random_config(rng, n, 1, 20);
    const auto z = random_config(rng, n, 1, 20);
    const int dxy = sym_dist(x, y);
    REQUIRE(dxy == brute_sym_dist(x.coords(), y.coords()));
    REQUIRE(dxy == sym_dist(y, x));
    REQUIRE(sym_dist(x, x) == 0);
    REQUIRE(sym_dist(x, z) <= dxy + sym_dist(y, z));
    REQUIRE(dxy <= max_norm_dist(x, y));
  }
}

TEST_CASE("interactivity examples") {
  CHECK(classify_interactivity({cfg({0, 0}), 3}, 2.0).kind == Interactivity::strong);
  const auto wi = classify_interactivity({cfg({0, 100}), 2}, 2.0);
  CHECK(wi.kind == Interactivity::weak);
  CHECK(wi.threshold == doctest::Approx(24.0));
  CHECK(classify_interactivity({cfg({0, 23}), 2}, 2.0).kind == Interactivity::strong);
  CHECK(classify_interactivity({cfg({0, 24}), 2}, 2.0).kind == Interactivity::weak);
}

TEST_CASE("canonical factorization examples") {
  const auto f = canonical_factorization({cfg({0, 100}), 2}, 2.0);
  CHECK(f.J == std::vector<int>{0});
  CHECK(f.J_c == std::vector<int>{1});
  CHECK(f.separation >= 95.0);
  CHECK(f.center_Jc == cfg({100}));

  const auto g = canonical_factorization({cfg({0, 1, 200}), 2}, 2.0);
  CHECK(g.J == std::vector<int>{0, 1});
  CHECK(g.J_c == std::vector<int>{2});

  CHECK_THROWS_AS(canonical_factorization({cfg({0, 5}), 2}, 2.0), GeometryError);
}

TEST_CASE("WI iff factorization, with independently re-verified separation") {
  long wi_count = 0;
  auto check = [&](const LatticeConfig& u, int L, double tau) {
    const CubeSpec cube{u, L};
    const bool weak = classify_interactivity(cube, tau).kind == Interactivity::weak;
    bool factored = false;
    try {
      const auto f = canonical_factorization(cube, tau);
      factored = true;
      const double gap = interval_gap(u, L, f.J, f.J_c);
      REQUIRE(gap == doctest::Approx(f.separation));
      REQUIRE(gap > std::pow(L, tau));
    } catch (const GeometryError&) {
    }
    REQUIRE(weak == factored);
    wi_count += weak;
  };
  for (double tau : {1.0, 2.0, 2.5})
    for (int L = 1; L <= 4; ++L) {
      for (int a = -200; a <= 200; ++a)
        for (int b = -200; b <= 200; b += 3) check(cfg({a, b}), L, tau);
      // Three particles, first pinned at the origin by translation invariance.
      for (int b = -200; b <= 200; b += 2)
        for (int c = -200; c <= 200; c += 5) check(cfg({0, b, c}), L, tau);
    }
  CHECK(wi_count > 0);
}

TEST_CASE("cube distance convention is inclusive") {
  CHECK_FALSE(cubes_distant(cfg({0, 0}), cfg({0, 0}), 2, 0.5));
  CHECK(cubes_distant(cfg({0, 0}), cfg({16, 0}), 2, 8));
  CHECK_FALSE(cubes_distant(cfg({0, 0}), cfg({16, 0}), 2, 9));
}

TEST_CASE("invalid geometry is rejected") {
  CHECK_THROWS_AS(LatticeConfig({1, 2, 3}, 2, 1), GeometryError);
  CHECK_THROWS_AS(lattice_ball({cfg({0}), -1}), GeometryError);
  CHECK_THROWS_AS(sym_dist(cfg({0, 1}), cfg({0})), GeometryError);
  CHECK_THROWS_AS(GridSpec({cfg({0}), 2}, 0), GeometryError);
}
