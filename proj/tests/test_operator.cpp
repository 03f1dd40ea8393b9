#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mploc/appendix.hpp"
#include "mploc/experiments.hpp"
#include "support.hpp"

using namespace mploc;
using namespace testing_support;

namespace {

OpSpec free_spec(std::vector<int> center, int radius, int mesh) {
  OpSpec s;
  s.center = std::move(center);
  s.radius = radius;
  s.mesh = mesh;
  s.g = 0.0;
  s.C_U = 0.0;
  return s;
}

// Dirichlet spectrum of -kappa Delta_h on n points per axis, summed over axes.
std::vector<double> free_spectrum(double kappa, double h, int n, int axes) {
  std::vector<double> one;
  for (int k = 1; k <= n; ++k) one.push_back(kappa / (h * h) * (2 - 2 * std::cos(k * std::numbers::pi / (n + 1))));
  std::vector<double> all{0.0};
  for (int a = 0; a < axes; ++a) {
    std::vector<double> next;
    for (double s : all)
      for (double e : one) next.push_back(s + e);
    all = std::move(next);
  }
  std::sort(all.begin(), all.end());
  return all;
}

Eigen::VectorXd dense_eigenvalues(const DiscretizedOperator& op) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(op.dense(), Eigen::EigenvaluesOnly).eigenvalues();
}

}  // namespace

TEST_CASE("free Laplacian matches the closed-form Dirichlet spectrum") {
  const auto op = make_op(free_spec({0}, 1, 1));
  REQUIRE(op.size() == 3);
  const auto w = spectrum_window(op, 0.0, 2.0);
  REQUIRE(w.count() == 3);
  for (int k = 1; k <= 3; ++k) CHECK(std::abs(w.eigenvalues[k - 1] - 0.5 * (2 - 2 * std::cos(k * std::numbers::pi / 4))) <= 1e-10);

  for (int mesh : {1, 2})
    for (int L : {1, 2}) {
      const auto op2 = make_op(free_spec({0, 0}, L, mesh));
      const int n = op2.grid().points_per_axis();
      const auto expect = free_spectrum(0.5, 1.0 / mesh, n, 2);
      const auto got = full_spectrum(op2, false).eigenvalues;
      REQUIRE(got.size() == static_cast<Index>(expect.size()));
      for (Index i = 0; i < got.size(); ++i) REQUIRE(std::abs(got[i] - expect[static_cast<std::size_t>(i)]) <= 1e-10);
    }
}

TEST_CASE("constant amplitudes shift the free operator by 2 g c") {
  const CubeSpec cube{cfg({0, 0}), 2};
  auto s = std::make_shared<DisorderSample>(sample_disorder(covering_box(cube, 1), 1, 0, DensitySpec{}));
  std::fill(s->amplitudes.begin(), s->amplitudes.end(), 0.3);
  ModelParams m;
  m.g = 5.0;
  m.interaction.C_U = 0.0;
  const auto op = assemble(GridSpec(cube, 2), s, m);
  const auto free = make_op(free_spec({0, 0}, 2, 2));
  const Eigen::MatrixXd diff = op.dense() - free.dense();
  CHECK((diff - Eigen::MatrixXd::Identity(op.size(), op.size()) * 3.0).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("assembled operators are symmetric") {
  for (std::uint64_t idx = 0; idx < 5; ++idx) {
    OpSpec s;
    s.index = idx;
    s.mesh = 2;
    CHECK(max_asymmetry(make_op(s).matrix()) == 0.0);
  }
}

TEST_CASE("spectral windows") {
  OpSpec s;
  s.radius = 3;
  s.mesh = 2;
  const auto op = make_op(s);
  REQUIRE(op.size() == 169);
  CHECK(spectrum_window(op, -5.0, -0.1).count() == 0);

  const Eigen::VectorXd dense = dense_eigenvalues(op);
  for (EigenMethod method : {EigenMethod::dense, EigenMethod::sparse}) {
    WindowOptions o;
    o.method = method;
    o.vectors = true;
    const auto w = spectrum_window(op, 3.0, 9.0, o);
    std::vector<double> expect;
    for (Index i = 0; i < dense.size(); ++i)
      if (dense[i] >= 3.0 && dense[i] <= 9.0) expect.push_back(dense[i]);
    REQUIRE(w.count() == static_cast<Index>(expect.size()));
    for (Index i = 0; i < w.count(); ++i) CHECK(std::abs(w.eigenvalues[i] - expect[static_cast<std::size_t>(i)]) <= 1e-8);
    CHECK(max_residual(op, w) <= 1e-8);
  }
  CHECK(count_below(op.matrix(), 6.0) == std::count_if(dense.begin(), dense.end(), [](double e) { return e < 6.0; }));
  CHECK(std::abs(spectral_distance(op, 6.0) - (dense.array() - 6.0).abs().minCoeff()) <= 1e-9);
}

TEST_CASE("green blocks and dnorm against dense inversion") {
  for (std::uint64_t idx = 0; idx < 4; ++idx) {
    OpSpec s;
    s.index = idx;
    s.mesh = 2;
    const auto op = make_op(s);
    const auto& grid = op.grid();
    const auto ev = dense_eigenvalues(op);
    const double E = 0.5 * (ev[3] + ev[4]);
    const Eigen::MatrixXd G = dense_green(op, E);

    const auto center = grid.center_cell_points();
    for (const auto& y : boundary_set(grid.cube())) {
      const double oracle = svd_norm(restrict(G, grid.cell_points(y), center));
      const auto probe = green_block(op, E, grid.cube().center, y);
      REQUIRE(std::abs(probe.block_norm - oracle) <= 1e-9 * std::max(1.0, oracle));
      const auto back = green_block(op, E, y, grid.cube().center);
      REQUIRE(std::abs(back.block_norm - probe.block_norm) <= 1e-10 * std::max(1.0, oracle));
    }

    const double oracle = svd_norm(restrict(G, grid.belt_points(), center));
    const double dn = dnorm(op, E);
    CHECK(std::abs(dn - oracle) <= 1e-9 * oracle);
    CHECK(std::abs(SpectralResolvent(op).dnorm(E) - oracle) <= 1e-9 * oracle);
    double triangle = 0;
    for (const auto& y : boundary_set(grid.cube())) triangle += green_block(op, E, grid.cube().center, y).block_norm;
    CHECK(dn <= triangle * (1 + 1e-12));

    // Resolvent identity on solved columns.
    const Resolvent r(op, E);
    const Eigen::MatrixXd cols = r.columns(center);
    Eigen::MatrixXd a = op.dense();
    a.diagonal().array() -= E;
    for (std::size_t j = 0; j < center.size(); ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(op.size());
      e[center[j]] = 1.0;
      CHECK((a * cols.col(static_cast<Index>(j)) - e).norm() <= 1e-8);
    }
  }
}

TEST_CASE("five-point grid at E = -1 matches dense inversion entrywise") {
  OpSpec s;
  s.center = {0};
  s.radius = 2;
  const auto op = make_op(s);
  REQUIRE(op.size() == 5);
  const Eigen::MatrixXd G = dense_green(op, -1.0);
  for (int x = -2; x <= 2; ++x)
    for (int y = -2; y <= 2; ++y)
      CHECK(std::abs(green_block(op, -1.0, cfg({x}), cfg({y})).block_norm - std::abs(G(x + 2, y + 2))) <= 1e-12);
}

TEST_CASE("resolvent bounds below the spectrum") {
  OpSpec s;
  s.g = 10.0;
  const auto op = make_op(s);
  CHECK(dnorm(op, -10.0) <= 0.1);
  CHECK(green_block(op, -10.0, cfg({0, 0}), cfg({2, 1})).block_norm <= 0.1);
  CHECK(is_nr(op, -1.0, 0.5, 4).kind == VerdictKind::NR);
}

TEST_CASE("resonant energies are refused") {
  const auto op = make_op(free_spec({0}, 1, 1));
  const double e = 0.5 * (2 - 2 * std::cos(std::numbers::pi / 4));
  CHECK_THROWS_AS(Resolvent(op, e), ResonantEnergy);
  CHECK_THROWS_AS(SpectralResolvent(op).dnorm(e), ResonantEnergy);
}

TEST_CASE("ground energy is nonnegative") {
  for (std::uint64_t idx = 0; idx < 30; ++idx) {
    OpSpec s;
    s.index = idx;
    s.g = 8.0;
    s.mesh = 2;
    CHECK(full_spectrum(make_op(s), false).eigenvalues[0] >= -1e-10);
  }
}

TEST_CASE("Dirichlet monotonicity on nested cubes") {
  for (std::uint64_t idx = 0; idx < 10; ++idx) {
    OpSpec s;
    s.index = idx;
    s.radius = 4;
    const auto op = make_op(s);
    const double parent = full_spectrum(op, false).eigenvalues[0];
    for (const auto& c : {cfg({0, 0}), cfg({1, -2}), cfg({-2, 2})}) {
      const auto sub = sub_operator(op, {c, 2});
      REQUIRE(full_spectrum(sub, false).eigenvalues[0] >= parent - 1e-12);
    }
  }
}

TEST_CASE("tensor expansion of the interaction-free Green function") {
  const CubeSpec cube{cfg({0, 100}), 2};
  const auto f = canonical_factorization(cube, 2.0);
  for (std::uint64_t idx = 0; idx < 3; ++idx) {
    auto disorder = std::make_shared<const DisorderSample>(sample_disorder(covering_box(cube, 1), 5, idx, DensitySpec{}));
    ModelParams m;
    m.g = 4.0;
    const auto op = assemble(GridSpec(cube, 2), disorder, m);
    const auto ni = assemble(op.grid(), disorder, noninteracting_model(m, f, 2));
    const auto parts = cluster_operators(ni, f);
    const auto rep = tensor_green(ni, parts.first, parts.second, f, 1.234);
    CHECK(rep.structure_residual <= 1e-12);
    CHECK(rep.residual_first <= 1e-8);
    CHECK(rep.residual_second <= 1e-8);
    CHECK(rep.order_gap <= 1e-8);
    CHECK(tensor_spectrum_gap(ni, parts.first, parts.second) <= 1e-9);

    const auto w = weyl_perturbation(op, ni);
    CHECK(w.holds);
    CHECK(w.max_shift <= w.bound + 1e-12);
    CHECK(w.bound <= interaction_offdiag_norm(cube, f, m.interaction) + 1e-300);
  }
}

TEST_CASE("single-mode tensor identity") {
  const CubeSpec cube{cfg({0, 100}), 0};
  Factorization f;
  f.J = {0};
  f.J_c = {1};
  f.center_J = cfg({0});
  f.center_Jc = cfg({100});
  auto disorder = std::make_shared<const DisorderSample>(sample_disorder(covering_box(cube, 1), 2, 0, DensitySpec{}));
  ModelParams m;
  m.g = 3.0;
  const auto ni = assemble(GridSpec(cube, 1), disorder, noninteracting_model(m, f, 2));
  REQUIRE(ni.size() == 1);
  const auto parts = cluster_operators(ni, f);
  const double e1 = parts.first.dense()(0, 0), e2 = parts.second.dense()(0, 0);
  CHECK(std::abs(ni.dense()(0, 0) - (e1 + e2)) <= 1e-14);
  const auto rep = tensor_green(ni, parts.first, parts.second, f, -0.5);
  CHECK(rep.residual_first <= 1e-14);
  CHECK(rep.residual_second <= 1e-14);
  CHECK(std::abs(1.0 / (e1 + e2 + 0.5) - dense_green(ni, -0.5)(0, 0)) <= 1e-14);
}

TEST_CASE("cross-cluster interaction bound") {
  const CubeSpec cube{cfg({0, 100}), 2};
  const auto f = canonical_factorization(cube, 2.0);
  InteractionSpec spec;
  CHECK(interaction_offdiag_norm(cube, f, spec) == doctest::Approx(std::exp(-95.0)).epsilon(1e-12));
  InteractionSpec cut = spec;
  cut.truncation_radius = 90.0;
  CHECK(interaction_offdiag_norm(cube, f, cut) == 0.0);
  CHECK(cross_interaction_sup(GridSpec(cube, 2), f, spec) <= interaction_offdiag_norm(cube, f, spec));
  CHECK(interaction_offdiag_norm(cube, f, spec) <= spec.C_U * std::exp(-f.separation));
}

TEST_CASE("Combes-Thomas rate grows with the spectral gap") {
  for (std::uint64_t idx = 0; idx < 5; ++idx) {
    OpSpec s;
    s.index = idx;
    s.radius = 5;
    const auto op = make_op(s);
    const double ground = full_spectrum(op, false).eigenvalues[0];
    double prev = 0.0;
    for (double gap : {0.5, 1.0, 2.0}) {
      const auto p = combes_thomas_profile(op, ground - gap);
      CHECK(p.rate() > 0.0);
      CHECK(p.rate() >= prev);
      prev = p.rate();
    }
  }
  OpSpec s;
  s.radius = 4;
  const auto op = make_op(s);
  const double ground = full_spectrum(op, false).eigenvalues[0];
  CHECK_THROWS_AS(combes_thomas_profile(op, ground), ConfigError);
  CHECK_THROWS_AS(combes_thomas_profile(op, ground + 0.1), ConfigError);

  const auto ct = free_ct_check(0.5, 12);
  CHECK(std::abs(ct.measured - ct.closed_form) <= 0.1 * ct.closed_form);
  CHECK(ct.closed_form == doctest::Approx(std::acosh(2.0)).epsilon(1e-12));
}

TEST_CASE("EDI on a ground state and the degenerate case") {
  OpSpec s;
  s.radius = 6;
  s.g = 16.0;
  const auto op = make_op(s);
  const auto sp = full_spectrum(op, true);
  const Eigen::VectorXd psi = sp.eigenvectors.col(0);
  int tested = 0;
  for (int a = -3; a <= 3; ++a)
    for (int b = -3; b <= 3; ++b) {
      const auto rep = edi_check(op, sp.eigenvalues[0], psi, {cfg({a, b}), 2});
      if (rep.skipped) continue;
      ++tested;
      CHECK(rep.holds);
      CHECK(rep.chain_holds);
    }
  CHECK(tested > 0);

  // A vector supported two cells away from the padded sub-cube.
  Eigen::VectorXd far = Eigen::VectorXd::Zero(op.size());
  const auto corner = op.grid().cell_points(cfg({6, 6}));
  far[corner.front()] = 1.0;
  const auto rep = edi_check(op, -1.0, far, {cfg({-3, -3}), 2});
  CHECK(rep.degenerate);
  CHECK(rep.holds);
  CHECK(rep.lhs == 0.0);
  CHECK_THROWS_AS(edi_check(op, -1.0, far, {cfg({4, 0}), 2}), GeometryError);
}

TEST_CASE("eigenvalue counts grow with the cube") {
  Index prev = 0;
  for (int L = 2; L <= 4; ++L) {
    OpSpec s;
    s.radius = L;
    const Index c = spectrum_window(make_op(s), 0.0, 6.0).count();
    CHECK(c > prev);
    prev = c;
  }
}
