#pragma once

// Checks on the two-cluster structure of weakly interactive cubes, resolvent
// decay below the spectrum, and the eigenfunction decay inequality.

#include <vector>

#include "mploc/operator.hpp"
#include "mploc/stats.hpp"

namespace mploc {

/// Model of the cube with the interaction cut between the two clusters of
/// the factorization.
ModelParams noninteracting_model(const ModelParams& model, const Factorization& f, int n_particles);

/// Operators of the two clusters on their projected cubes.
struct ClusterOperators {
  DiscretizedOperator first;   // particles J
  DiscretizedOperator second;  // particles J^c
};
ClusterOperators cluster_operators(const DiscretizedOperator& op, const Factorization& f);

struct TensorReport {
  double structure_residual = 0.0;  // max |H^ni - (H' x 1 + 1 x H'')|
  double residual_first = 0.0;      // sum_a P'_a x G''(E - E'_a) vs direct inverse
  double residual_second = 0.0;     // sum_b G'(E - E''_b) x P''_b vs direct inverse
  double order_gap = 0.0;           // max deviation between the two expansions
};

/// Both tensor expansions of the interaction-free Green function against a
/// direct inversion. Throws ResonantEnergy naming the offending mode.
TensorReport tensor_green(const DiscretizedOperator& full_ni, const DiscretizedOperator& first,
                          const DiscretizedOperator& second, const Factorization& f, double E);

/// Max deviation between the sorted spectrum of H^ni and the sorted sums
/// E'_a + E''_b.
double tensor_spectrum_gap(const DiscretizedOperator& full_ni, const DiscretizedOperator& first,
                           const DiscretizedOperator& second);

/// Continuum bound on the cross-cluster interaction over the closed cube:
/// sum over cross pairs of U at the smallest possible pair distance.
double interaction_offdiag_norm(const CubeSpec& cube, const Factorization& f, const InteractionSpec& spec);

/// Exact sup over the grid of the cross-cluster interaction.
double cross_interaction_sup(const GridSpec& grid, const Factorization& f, const InteractionSpec& spec);

struct WeylReport {
  double max_shift = 0.0;  // max_i |lambda_i(H) - lambda_i(H^ni)|
  double bound = 0.0;      // sup |H - H^ni| on the diagonal
  bool holds = false;
};
WeylReport weyl_perturbation(const DiscretizedOperator& op, const DiscretizedOperator& op_ni);

struct CtProfile {
  double energy = 0.0;
  double gap = 0.0;  // distance from E to the ground energy
  std::vector<int> radii;
  std::vector<double> log_norms;
  LinearFit fit;
  double rate() const { return -fit.slope; }
};

/// log dnorm of the concentric sub-cubes Lambda_r(u), r = 1..L, fitted
/// against r. E must lie strictly below the spectrum.
CtProfile combes_thomas_profile(const DiscretizedOperator& op, double E);

/// Decay rate of the free lattice resolvent in one direction:
/// cosh(mu h) = 1 - E h^2 / (2 kappa), per cell.
double free_resolvent_rate(double kappa, double h, double E);

struct EdiReport {
  bool skipped = false;     // resonant sub-operator
  bool degenerate = false;  // both sides below the noise floor
  double lhs = 0.0;         // ||chi_x Psi||
  double dist = 0.0;        // dist(lambda, spectrum of the sub-operator)
  double dnorm = 0.0;
  double outer_norm = 0.0;  // ||Psi|| on the outer boundary layer of the sub-cube
  double belt_norm = 0.0;   // ||Psi|| on the belt cells of the sub-cube
  double rhs = 0.0;         // hop sqrt(Nd) dnorm outer_norm + residual term
  double chain_rhs = 0.0;   // same with |boundary cells| * max cell block
  double literal_rhs = 0.0; // dnorm * belt_norm, reported only
  bool holds = false;
  bool chain_holds = false;
  bool literal_holds = false;
  double ratio() const { return rhs > 0 ? lhs / rhs : 0.0; }
};

/// Decay inequality for an eigenpair of `big` on the interior sub-cube.
EdiReport edi_check(const DiscretizedOperator& big, double lambda, const Eigen::VectorXd& psi,
                    const CubeSpec& sub);

}  // namespace mploc
