#pragma once

// Multi-scale analysis: scale/mass/exponent sequences and their constraint
// table, the NS/NR/CNR predicates, good/bad classification, the certified
// Green-function descent and the one-step scaling check.

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mploc/operator.hpp"

namespace mploc {

enum class ExponentBase { two_alpha, four_alpha };

std::string to_string(ExponentBase b);
ExponentBase exponent_base_from_string(const std::string& s);

struct ScaleParams {
  double zeta = 0.5;
  double tau = 2.5;
  double beta = 0.1;
  int alpha = 6;
  int K = 25;
  double P_star = 50.0;
  double m_star = 1.0;
  int L0 = 16;
  int N_star = 2;
  int d = 1;
  ExponentBase base = ExponentBase::four_alpha;
  double delta = 1.0;
};

struct ConstraintRow {
  std::string name;
  std::string relation;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

struct ParamsReport {
  std::vector<ConstraintRow> rows;  // eight table rows, then the P(N) implication
  bool ok = false;
};

ParamsReport validate_params(const ScaleParams& p);

/// L_k = L_0^(alpha^k), exact.
boost::multiprecision::cpp_int scale_exact(const ScaleParams& p, int k);
/// L_k as a machine integer; throws std::overflow_error when it does not fit.
long long scale(const ScaleParams& p, int k);
/// m_n = m* (1 + 3 L_0^(-delta + beta))^(N* - n).
double mass(const ScaleParams& p, int n);
/// P(n, k) = 2^k P* base^(N* - n), base 2 alpha or 4 alpha.
double exponent(const ScaleParams& p, int n, int k);

/// Sub-cube center stride for good/bad enumeration: 1 if L_k <= 4, else L_k / 4.
int default_stride(int Lk);

// ---------------------------------------------------------------- predicates

enum class VerdictKind { NS, S, NR, R, CNR, CR, good, bad };
std::string to_string(VerdictKind k);

struct PredicateVerdict {
  VerdictKind kind = VerdictKind::S;
  CubeSpec cube;
  int scale = -1;
  double energy = 0.0;
  double parameter = 0.0;  // mass for NS, beta for NR/CNR
  double witness = 0.0;    // dnorm, spectral distance, or offending count
  double threshold = 0.0;
  bool flagged = false;    // resonant NS test, or N = 1 conventions
  int stride = 1;
  std::vector<LatticeConfig> offending;
  std::string note;
};

/// C (3L)^{Nd} dnorm <= exp(-m L), inclusive.
bool ns_holds(double dnorm, double m, int L, int config_dim, double C_geom);
PredicateVerdict ns_verdict(const CubeSpec& cube, double E, double m, double C_geom, double dnorm);
PredicateVerdict is_ns(const DiscretizedOperator& op, double E, double m, double C_geom = 1.0);

/// dist(E, spectrum) >= exp(-L_eff^beta), inclusive.
PredicateVerdict nr_verdict(const CubeSpec& cube, double E, double beta, double L_eff, double dist);
PredicateVerdict is_nr(const DiscretizedOperator& op, double E, double beta, double L_eff);

/// Radii l in [L_k, L_{k+1} - L_k] of concentric sub-cubes tested for CNR,
/// capped by the cube radius and thinned by the stride (endpoints kept).
std::vector<int> cnr_radii(int Lk, int Lk1, int cube_radius, int stride);
/// Every concentric sub-cube at the radii above is NR with threshold
/// exp(-L_{k+1}^beta).
PredicateVerdict is_cnr(const DiscretizedOperator& op, double E, double beta, int Lk, int Lk1, int stride);

struct SubcubeVerdict {
  LatticeConfig center;
  bool singular = true;
  bool weak = false;  // weakly interactive
  bool resonant = false;
  double dnorm = 0.0;
};

/// Centers y with |y - u| <= L - L_k on the stride lattice (extremes kept).
std::vector<LatticeConfig> subcube_centers(const CubeSpec& parent, int Lk, int stride);

/// Bad iff some weakly interactive sub-cube is singular or K + 1 pairwise
/// 9 N L_k^tau-distant strongly interactive singular sub-cubes exist (greedy
/// selection in center order; the family is stored as `offending`).
PredicateVerdict classify_good_bad(const CubeSpec& parent, int Lk, const std::vector<SubcubeVerdict>& subs,
                                   const ScaleParams& p, double E, int stride);

std::vector<SubcubeVerdict> subcube_verdicts(const DiscretizedOperator& parent, double E, int Lk, int stride,
                                             double m, double tau, double C_geom = 1.0);

// ---------------------------------------------------------------- GRI

struct GriStep {
  LatticeConfig cell;
  double factor = 0.0;  // coupling |Z| dnorm of the sub-cube at `cell`
};

struct GriResult {
  double parent_norm = 0.0;  // ||G_parent|| = 1 / dist
  double bound = 0.0;        // certified bound on ||chi_y G chi_u|| for every belt cell y
  int iterations = 0;
  bool converged = false;
  std::vector<GriStep> trace;
  double trace_product = 0.0;  // product of the trace factors times parent_norm
};

/// Geometric constant of the discrete resolvent inequality: kappa/h^2 sqrt(Nd).
double gri_coupling(const DiscretizedOperator& op);

/// Fixed-point iteration of the resolvent inequality over the cells of the
/// parent, using the non-singular sub-cubes of radius L_k from `subs`.
/// Every iterate is a certified bound. Throws GeometryError
/// "descent blocked" when the center sub-cube cannot be used, and
/// std::domain_error when the parent is not NR at beta.
GriResult gri_descent(const DiscretizedOperator& parent, double E, int Lk,
                      const std::vector<SubcubeVerdict>& subs, double beta);

/// max ||chi_y G chi_x|| / ((3l)^{Nd} dnorm(Lambda_l(x)) max_z ||chi_y G chi_z||)
/// over sampled source cells x and belt cells y: the empirical constant of
/// the cell-to-cell form of the descent inequality.
double calibrate_gri(const DiscretizedOperator& parent, double E, int l, int max_sources = 16);

// ---------------------------------------------------------------- scaling step

struct ScalingStepReport {
  int Lk = 0;
  int Lk1 = 0;
  int stride = 1;
  double mass = 0.0;
  bool toy = true;
  int subcubes = 0;
  int singular = 0;
  int weak_singular = 0;
  bool parent_good = false;
  bool parent_cnr = false;
  bool premises = false;
  bool conclusion = false;
  bool counterexample = false;
  std::string status;  // vacuous, holds, counterexample
  double parent_dnorm = 0.0;
  double parent_dist = 0.0;
  bool parent_singular = false;
  bool resonant_event = false;  // parent not CNR
  bool wi_event = false;        // some WI sub-cube singular
  bool family_event = false;    // K + 1 distant SI singular sub-cubes
  std::optional<double> gri_bound;
  double gri_trace = 0.0;
  std::string gri_note;
  PredicateVerdict good_bad;
};

struct StepOptions {
  double C_geom = 1.0;
  int stride = 0;  // 0: default_stride
  /// Scale schedule override for desk scale: L_{k+1} = ratio * L_k when > 0.
  int toy_ratio = 0;
  bool toy = true;
};

ScalingStepReport scaling_step_check(const DiscretizedOperator& parent, double E, const ScaleParams& p, int k,
                                     const StepOptions& opts = {});

}  // namespace mploc
