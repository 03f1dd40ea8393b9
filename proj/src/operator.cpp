#include <algorithm>
#include <cmath>
#include <map>

#include "mploc/operator.hpp"

namespace mploc {

DiscretizedOperator::DiscretizedOperator(GridSpec grid, std::shared_ptr<const DisorderSample> disorder,
                                         ModelParams model, SparseMatrix matrix,
                                         Eigen::VectorXd potential)
    : grid_(std::move(grid)),
      disorder_(std::move(disorder)),
      model_(std::move(model)),
      matrix_(std::move(matrix)),
      potential_(std::move(potential)) {}

double DiscretizedOperator::hopping() const {
  const double m = grid_.mesh_inverse();
  return model_.kappa * m * m;
}

namespace {

void check_region(const GridSpec& grid, const DisorderSample& disorder, int fold) {
  const SiteBox need = covering_box(grid.cube(), fold);
  if (need.dim() != disorder.region.dim()) throw ConfigError("disorder region has the wrong dimension");
  for (int k = 0; k < need.dim(); ++k)
    if (need.lo[k] < disorder.region.lo[k] || need.hi[k] > disorder.region.hi[k])
      throw ConfigError("disorder region does not cover the cube padded by the bump support");
}

}  // namespace

DiscretizedOperator assemble(const GridSpec& grid, std::shared_ptr<const DisorderSample> disorder,
                             const ModelParams& model) {
  if (!disorder) throw ConfigError("assemble needs a disorder sample");
  if (!(model.kappa > 0.0)) throw ConfigError("kinetic prefactor must be positive");
  if (model.g < 0.0) throw ConfigError("disorder amplitude g must be >= 0");
  model.interaction.validate();
  const int n_part = grid.cube().n_particles();
  const int d = grid.cube().dim();
  if (!model.clusters.empty() && static_cast<int>(model.clusters.size()) != n_part)
    throw ConfigError("cluster labels must have one entry per particle");
  check_region(grid, *disorder, model.fold);

  const int nd = grid.config_dim();
  const Index n = grid.size();
  const double hop = model.kappa * grid.mesh_inverse() * grid.mesh_inverse();
  const int tmax = grid.max_offset();
  const int p = grid.points_per_axis();

  // One-particle potential tables: V_j[local offsets of particle j].
  std::size_t local_size = 1;
  for (int k = 0; k < d; ++k) local_size *= static_cast<std::size_t>(p);
  std::vector<std::vector<double>> vtab(static_cast<std::size_t>(n_part), std::vector<double>(local_size));
  for (int j = 0; j < n_part; ++j) {
    const auto u = grid.cube().center.particle(j);
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::size_t loc = 0; loc < local_size; ++loc) {
      std::size_t r = loc;
      for (int k = d - 1; k >= 0; --k) {
        const int t = static_cast<int>(r % static_cast<std::size_t>(p)) - tmax;
        r /= static_cast<std::size_t>(p);
        x[k] = u[k] + static_cast<double>(t) / grid.mesh_inverse();
      }
      vtab[j][loc] = alloy_potential(x, *disorder, model.fold);
    }
  }

  Eigen::VectorXd pot(n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * (2 * nd + 1));
  std::vector<double> pos(static_cast<std::size_t>(nd));
  std::vector<double> cluster_pos;
  for (Index i = 0; i < n; ++i) {
    const auto t = grid.offsets(i);
    double v = 0.0;
    for (int j = 0; j < n_part; ++j) {
      std::size_t loc = 0;
      for (int k = 0; k < d; ++k) loc = loc * static_cast<std::size_t>(p) + (t[j * d + k] + tmax);
      v += vtab[j][loc];
    }
    for (int k = 0; k < nd; ++k) pos[k] = grid.cube().center[k] + static_cast<double>(t[k]) / grid.mesh_inverse();
    double u_int = 0.0;
    if (model.interaction.C_U > 0.0) {
      for (int a = 0; a < n_part; ++a)
        for (int b = a + 1; b < n_part; ++b) {
          if (!model.clusters.empty() && model.clusters[a] != model.clusters[b]) continue;
          double r = 0.0;
          for (int k = 0; k < d; ++k) r = std::max(r, std::abs(pos[a * d + k] - pos[b * d + k]));
          u_int += model.interaction.potential(r);
        }
    }
    pot[i] = model.g * v + u_int;
    trip.emplace_back(i, i, 2.0 * nd * hop + pot[i]);
    for (int k = 0; k < nd; ++k) {
      for (int step : {-1, 1}) {
        if (std::abs(t[k] + step) > tmax) continue;
        auto tn = t;
        tn[k] += step;
        trip.emplace_back(i, grid.index(tn), -hop);
      }
    }
  }
  SparseMatrix h(n, n);
  h.setFromTriplets(trip.begin(), trip.end());
  h.makeCompressed();
  return DiscretizedOperator(grid, std::move(disorder), model, std::move(h), std::move(pot));
}

DiscretizedOperator sub_operator(const DiscretizedOperator& op, const CubeSpec& sub) {
  GridSpec sg(sub, op.grid().mesh_inverse());
  op.grid().embed(sg);  // throws if the sub-cube does not fit
  return assemble(sg, op.disorder(), op.model());
}

double max_asymmetry(const SparseMatrix& m) {
  const SparseMatrix t = m.transpose();
  const SparseMatrix diff = m - t;
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

std::vector<CellNorm> cell_profile(const GridSpec& grid, const Eigen::VectorXd& psi) {
  std::map<LatticeConfig, double> acc;
  for (Index i = 0; i < grid.size(); ++i) acc[grid.cell_of(i)] += psi[i] * psi[i];
  std::vector<CellNorm> out;
  out.reserve(acc.size());
  for (auto& [cell, sq] : acc) out.push_back({cell, std::sqrt(sq)});
  return out;
}

}  // namespace mploc
