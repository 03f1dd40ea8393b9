#pragma once

// Finite-volume Hamiltonian H = -kappa Delta_h + g sum_j V(x_j) + U(x) on a
// Dirichlet grid, together with its spectral data and Green-function blocks.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mploc/grid.hpp"
#include "mploc/randomfield.hpp"

namespace mploc {

using SparseMatrix = Eigen::SparseMatrix<double>;

class EigensolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResonantEnergy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelParams {
  double kappa = 0.5;  // kinetic prefactor
  double g = 1.0;      // disorder amplitude
  int fold = 1;        // flat-tiling fold n of the bump
  InteractionSpec interaction;
  /// Cluster label per particle; only pairs with equal labels interact.
  /// Empty means every pair interacts.
  std::vector<int> clusters;
};

class DiscretizedOperator {
 public:
  DiscretizedOperator(GridSpec grid, std::shared_ptr<const DisorderSample> disorder,
                      ModelParams model, SparseMatrix matrix, Eigen::VectorXd potential);

  const GridSpec& grid() const { return grid_; }
  const ModelParams& model() const { return model_; }
  const std::shared_ptr<const DisorderSample>& disorder() const { return disorder_; }
  const SparseMatrix& matrix() const { return matrix_; }
  /// Diagonal potential part g V + U on the grid.
  const Eigen::VectorXd& potential() const { return potential_; }
  Index size() const { return grid_.size(); }
  /// Weight kappa / h^2 of each nearest-neighbour bond.
  double hopping() const;

  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix_); }

 private:
  GridSpec grid_;
  std::shared_ptr<const DisorderSample> disorder_;
  ModelParams model_;
  SparseMatrix matrix_;
  Eigen::VectorXd potential_;
};

DiscretizedOperator assemble(const GridSpec& grid, std::shared_ptr<const DisorderSample> disorder,
                             const ModelParams& model);

/// The same model restricted (with Dirichlet conditions) to a sub-cube.
DiscretizedOperator sub_operator(const DiscretizedOperator& op, const CubeSpec& sub);

double max_asymmetry(const SparseMatrix& m);

// ---------------------------------------------------------------- spectra

enum class EigenMethod { automatic, dense, sparse };

struct WindowOptions {
  EigenMethod method = EigenMethod::automatic;
  bool vectors = false;
  Index dense_limit = 2000;
  /// Sparse solves on small problems re-count eigenvalues with a dense solve.
  bool cross_check = true;
  std::uint64_t seed = 0x5eedULL;
};

struct SpectralData {
  double lo = 0.0;
  double hi = 0.0;
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // unit columns, empty unless requested
  std::string method;

  Index count() const { return eigenvalues.size(); }
  bool has_vectors() const { return eigenvectors.cols() == eigenvalues.size() && count() > 0; }
};

SpectralData spectrum_window(const DiscretizedOperator& op, double lo, double hi,
                             const WindowOptions& opts = {});
SpectralData full_spectrum(const DiscretizedOperator& op, bool vectors);

/// Number of eigenvalues strictly below sigma, from the inertia of H - sigma.
Index count_below(const SparseMatrix& h, double sigma);

/// dist(E, spectrum), certified by an inertia count.
double spectral_distance(const DiscretizedOperator& op, double E);
double spectral_distance(const Eigen::VectorXd& sorted_eigenvalues, double E);

/// max ||H psi - lambda psi|| over the stored eigenpairs.
double max_residual(const DiscretizedOperator& op, const SpectralData& data);

struct CellNorm {
  LatticeConfig cell;
  double norm = 0.0;
};

/// ||chi_x psi|| for every cell x of the cube's lattice ball.
std::vector<CellNorm> cell_profile(const GridSpec& grid, const Eigen::VectorXd& psi);

// ---------------------------------------------------------------- Green functions

/// Factorization of H - E answering columns of G(E) = (H - E)^{-1}.
class Resolvent {
 public:
  Resolvent(const DiscretizedOperator& op, double E);
  ~Resolvent();
  Resolvent(Resolvent&&) noexcept;
  Resolvent& operator=(Resolvent&&) noexcept;

  double energy() const { return energy_; }
  /// Columns G e_j for the listed grid points; each is checked against the
  /// resolvent identity.
  Eigen::MatrixXd columns(std::span<const Index> cols) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double energy_ = 0.0;
};

/// Largest singular value.
double spectral_norm(const Eigen::MatrixXd& m);
/// Spectral norm of the row-restriction of a column block.
double restricted_norm(const Eigen::MatrixXd& cols, std::span<const Index> rows);

struct GreenProbe {
  double energy = 0.0;
  LatticeConfig source;
  LatticeConfig target;
  double block_norm = 0.0;
};

/// ||chi_y G(E) chi_x||.
GreenProbe green_block(const DiscretizedOperator& op, double E, const LatticeConfig& x,
                       const LatticeConfig& y);

/// ||1_belt G(E) chi_u|| with u the cube center.
double dnorm(const DiscretizedOperator& op, double E);
double dnorm(const DiscretizedOperator& op, const Resolvent& g);

/// Resolvent built from a full eigendecomposition; cheap at many energies.
class SpectralResolvent {
 public:
  explicit SpectralResolvent(const DiscretizedOperator& op);

  const Eigen::VectorXd& eigenvalues() const { return values_; }
  const Eigen::MatrixXd& eigenvectors() const { return vectors_; }
  /// ||1_rows G(E) 1_cols||.
  double block_norm(double E, std::span<const Index> rows, std::span<const Index> cols) const;
  double dnorm(double E) const;
  /// max over boundary cells y of ||chi_y G(E) chi_u||.
  double boundary_max(double E) const;

 private:
  Eigen::VectorXd inverse_gaps(double E) const;
  Eigen::MatrixXd belt_block(double E) const;

  Eigen::VectorXd values_;
  Eigen::MatrixXd vectors_;
  Eigen::MatrixXd belt_rows_;    // eigenvector rows on the belt
  Eigen::MatrixXd center_rows_;  // eigenvector rows on the center cell, transposed
  std::vector<std::vector<Index>> boundary_cells_;  // positions within the belt rows
};

}  // namespace mploc
