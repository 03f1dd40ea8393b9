#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "mploc/appendix.hpp"

namespace mploc {

ModelParams noninteracting_model(const ModelParams& model, const Factorization& f, int n_particles) {
  ModelParams out = model;
  out.clusters.assign(static_cast<std::size_t>(n_particles), 1);
  for (int j : f.J) out.clusters[static_cast<std::size_t>(j)] = 0;
  return out;
}

ClusterOperators cluster_operators(const DiscretizedOperator& op, const Factorization& f) {
  ModelParams m = op.model();
  m.clusters.clear();
  const int L = op.grid().cube().radius;
  const int M = op.grid().mesh_inverse();
  return {assemble(GridSpec(CubeSpec{f.center_J, L}, M), op.disorder(), m),
          assemble(GridSpec(CubeSpec{f.center_Jc, L}, M), op.disorder(), m)};
}

namespace {

struct SplitIndex {
  std::vector<Index> first;
  std::vector<Index> second;
};

// Position of each full grid point in the two cluster grids.
SplitIndex split_indices(const GridSpec& full, const GridSpec& g1, const GridSpec& g2, const Factorization& f) {
  const int d = full.cube().dim();
  SplitIndex s;
  s.first.resize(static_cast<std::size_t>(full.size()));
  s.second.resize(static_cast<std::size_t>(full.size()));
  for (Index i = 0; i < full.size(); ++i) {
    const auto t = full.offsets(i);
    std::vector<int> t1, t2;
    for (int j : f.J)
      for (int k = 0; k < d; ++k) t1.push_back(t[j * d + k]);
    for (int j : f.J_c)
      for (int k = 0; k < d; ++k) t2.push_back(t[j * d + k]);
    s.first[static_cast<std::size_t>(i)] = g1.index(t1);
    s.second[static_cast<std::size_t>(i)] = g2.index(t2);
    if (s.first[static_cast<std::size_t>(i)] < 0 || s.second[static_cast<std::size_t>(i)] < 0)
      throw GeometryError("cluster grids do not match the full grid");
  }
  return s;
}

Eigen::MatrixXd shifted_inverse(const Eigen::MatrixXd& h, double z) {
  const Eigen::MatrixXd a = h - z * Eigen::MatrixXd::Identity(h.rows(), h.cols());
  return Eigen::PartialPivLU<Eigen::MatrixXd>(a).inverse();
}

// Sum over modes a of h_proj of P_a (x) (h_inv - (E - e_a))^{-1}, written in
// full-grid indices.
Eigen::MatrixXd expansion(const Eigen::MatrixXd& h_proj, const Eigen::MatrixXd& h_inv, const std::vector<Index>& proj_idx,
                          const std::vector<Index>& inv_idx, double E, const char* label) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h_proj);
  const Eigen::VectorXd inv_spec = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h_inv, Eigen::EigenvaluesOnly).eigenvalues();
  const Index n = static_cast<Index>(proj_idx.size());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (Index a = 0; a < es.eigenvalues().size(); ++a) {
    const double z = E - es.eigenvalues()[a];
    if (spectral_distance(inv_spec, z) <= 1e-12) {
      std::ostringstream os;
      os << "resonant energy: E - E" << label << "_a hits the other cluster's spectrum for a=" << a;
      throw ResonantEnergy(os.str());
    }
    const Eigen::MatrixXd ginv = shifted_inverse(h_inv, z);
    const auto psi = es.eigenvectors().col(a);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        g(i, j) += psi[proj_idx[i]] * psi[proj_idx[j]] * ginv(inv_idx[i], inv_idx[j]);
  }
  return g;
}

}  // namespace

TensorReport tensor_green(const DiscretizedOperator& full_ni, const DiscretizedOperator& first,
                          const DiscretizedOperator& second, const Factorization& f, double E) {
  const auto split = split_indices(full_ni.grid(), first.grid(), second.grid(), f);
  const Eigen::MatrixXd h = full_ni.dense();
  const Eigen::MatrixXd h1 = first.dense();
  const Eigen::MatrixXd h2 = second.dense();
  const Index n = h.rows();

  TensorReport rep;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const Index i1 = split.first[i], j1 = split.first[j], i2 = split.second[i], j2 = split.second[j];
      const double k = (i2 == j2 ? h1(i1, j1) : 0.0) + (i1 == j1 ? h2(i2, j2) : 0.0);
      rep.structure_residual = std::max(rep.structure_residual, std::abs(h(i, j) - k));
    }

  const Eigen::VectorXd full_spec = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h, Eigen::EigenvaluesOnly).eigenvalues();
  if (spectral_distance(full_spec, E) <= 1e-12) throw ResonantEnergy("resonant energy: E is within 1e-12 of the spectrum");
  const Eigen::MatrixXd direct = shifted_inverse(h, E);
  const Eigen::MatrixXd g1 = expansion(h1, h2, split.first, split.second, E, "'");
  const Eigen::MatrixXd g2 = expansion(h2, h1, split.second, split.first, E, "''");
  rep.residual_first = (g1 - direct).cwiseAbs().maxCoeff();
  rep.residual_second = (g2 - direct).cwiseAbs().maxCoeff();
  rep.order_gap = (g1 - g2).cwiseAbs().maxCoeff();
  return rep;
}

double tensor_spectrum_gap(const DiscretizedOperator& full_ni, const DiscretizedOperator& first,
                           const DiscretizedOperator& second) {
  const Eigen::VectorXd s = full_spectrum(full_ni, false).eigenvalues;
  const Eigen::VectorXd s1 = full_spectrum(first, false).eigenvalues;
  const Eigen::VectorXd s2 = full_spectrum(second, false).eigenvalues;
  std::vector<double> sums;
  sums.reserve(static_cast<std::size_t>(s1.size() * s2.size()));
  for (Index a = 0; a < s1.size(); ++a)
    for (Index b = 0; b < s2.size(); ++b) sums.push_back(s1[a] + s2[b]);
  std::sort(sums.begin(), sums.end());
  if (static_cast<Index>(sums.size()) != s.size()) throw GeometryError("cluster grids do not match the full grid");
  double worst = 0.0;
  for (Index i = 0; i < s.size(); ++i) worst = std::max(worst, std::abs(s[i] - sums[static_cast<std::size_t>(i)]));
  return worst;
}

double interaction_offdiag_norm(const CubeSpec& cube, const Factorization& f, const InteractionSpec& spec) {
  const auto& u = cube.center;
  const int d = cube.dim();
  double total = 0.0;
  for (int i : f.J)
    for (int j : f.J_c) {
      int gap = 0;
      for (int k = 0; k < d; ++k) gap = std::max(gap, std::abs(u[i * d + k] - u[j * d + k]));
      const double r = std::max(0.0, static_cast<double>(gap) - cube.continuum_diameter());
      total += spec.potential(r);
    }
  return total;
}

double cross_interaction_sup(const GridSpec& grid, const Factorization& f, const InteractionSpec& spec) {
  const int d = grid.cube().dim();
  double best = 0.0;
  for (Index p = 0; p < grid.size(); ++p) {
    const auto x = grid.position(p);
    double s = 0.0;
    for (int i : f.J)
      for (int j : f.J_c) {
        double r = 0.0;
        for (int k = 0; k < d; ++k) r = std::max(r, std::abs(x[i * d + k] - x[j * d + k]));
        s += spec.potential(r);
      }
    best = std::max(best, s);
  }
  return best;
}

WeylReport weyl_perturbation(const DiscretizedOperator& op, const DiscretizedOperator& op_ni) {
  const Eigen::VectorXd a = full_spectrum(op, false).eigenvalues;
  const Eigen::VectorXd b = full_spectrum(op_ni, false).eigenvalues;
  WeylReport r;
  r.max_shift = (a - b).cwiseAbs().maxCoeff();
  r.bound = (op.potential() - op_ni.potential()).cwiseAbs().maxCoeff();
  r.holds = r.max_shift <= r.bound + 1e-10;
  return r;
}

double free_resolvent_rate(double kappa, double h, double E) {
  if (!(E < 0.0)) throw ConfigError("free resolvent rate needs E below the spectrum");
  return std::acosh(1.0 - E * h * h / (2.0 * kappa)) / h;
}

CtProfile combes_thomas_profile(const DiscretizedOperator& op, double E) {
  const int L = op.grid().cube().radius;
  if (L < 3) throw ConfigError("cube too small for a fit");
  if (count_below(op.matrix(), E) > 0) throw ConfigError("energy is not below the spectrum");
  CtProfile p;
  p.energy = E;
  p.gap = spectral_distance(op, E);
  if (!(p.gap > 1e-12)) throw ConfigError("energy is not strictly below the spectrum");
  for (int r = 1; r <= L; ++r) {
    const double dn = r == L ? dnorm(op, E) : dnorm(sub_operator(op, CubeSpec{op.grid().cube().center, r}), E);
    p.radii.push_back(r);
    p.log_norms.push_back(std::log(dn));
  }
  std::vector<double> x(p.radii.begin(), p.radii.end());
  p.fit = fit_line(x, p.log_norms);
  return p;
}

EdiReport edi_check(const DiscretizedOperator& big, double lambda, const Eigen::VectorXd& psi,
                    const CubeSpec& sub) {
  const GridSpec& g = big.grid();
  if (max_norm_dist(sub.center, g.cube().center) + sub.radius + 1 > g.cube().radius)
    throw GeometryError("sub-cube padded by one does not lie inside the cube");
  EdiReport rep;
  const DiscretizedOperator sop = sub_operator(big, sub);
  const GridSpec& sg = sop.grid();
  rep.dist = spectral_distance(sop, lambda);
  if (rep.dist <= 1e-12) {
    rep.skipped = true;
    return rep;
  }
  const auto emb = g.embed(sg);
  const auto outer = sg.outer_boundary_in(g);
  const Resolvent res(sop, lambda);
  const auto center = sg.center_cell_points();
  const Eigen::MatrixXd gc = res.columns(center);
  const auto belt = sg.belt_points();
  rep.dnorm = restricted_norm(gc, belt);

  for (Index i : g.cell_points(sub.center)) rep.lhs += psi[i] * psi[i];
  rep.lhs = std::sqrt(rep.lhs);
  for (Index i : outer) rep.outer_norm += psi[i] * psi[i];
  rep.outer_norm = std::sqrt(rep.outer_norm);
  for (Index j : belt) rep.belt_norm += psi[emb[j]] * psi[emb[j]];
  rep.belt_norm = std::sqrt(rep.belt_norm);

  const Eigen::VectorXd full_res = big.matrix() * psi - lambda * psi;
  double rs = 0.0;
  for (Index e : emb) rs += full_res[e] * full_res[e];
  const double residual_term = spectral_norm(gc) * std::sqrt(rs);

  const double coupling = big.hopping() * std::sqrt(static_cast<double>(g.config_dim()));
  rep.rhs = coupling * rep.dnorm * rep.outer_norm + residual_term;

  std::vector<LatticeConfig> cells =
      sub.radius > 0 ? boundary_set(sub) : std::vector<LatticeConfig>{sub.center};
  double cell_max = 0.0;
  for (const auto& y : cells) cell_max = std::max(cell_max, restricted_norm(gc, sg.cell_points(y)));
  rep.chain_rhs = coupling * static_cast<double>(cells.size()) * cell_max * rep.outer_norm + residual_term;
  rep.literal_rhs = rep.dnorm * rep.belt_norm;

  constexpr double floor = 1e-13;
  rep.degenerate = rep.lhs < floor && rep.rhs < floor;
  auto le = [&](double a, double b) { return rep.degenerate || a <= b * (1.0 + 1e-9) + 1e-15; };
  rep.holds = le(rep.lhs, rep.rhs);
  rep.chain_holds = le(rep.lhs, rep.chain_rhs);
  rep.literal_holds = le(rep.lhs, rep.literal_rhs);
  return rep;
}

}  // namespace mploc
