#pragma once

// Alloy-type disorder: IID scatterer amplitudes on Z^d, flat-tiling bump
// potential, and the two-body sub-exponential interaction.

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mploc/geometry.hpp"

namespace mploc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Counter-based uniform draw in [0, 1): a pure function of its three keys,
/// so sample generation does not depend on evaluation order.
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

/// Mixes an arbitrary-length integer key into one 64-bit counter.
std::uint64_t hash_key(std::span<const int> key);

enum class DensityKind { uniform, truncated_exponential };

/// Single-site amplitude density, supported on [0, c_V].
/// truncated_exponential has p(t) ~ exp(rate t), so p'/p = rate.
struct DensitySpec {
  DensityKind kind = DensityKind::uniform;
  double c_V = 1.0;
  double rate = 0.0;

  /// Rejects densities outside the admissible class (strictly positive and
  /// bounded on (0, c_V) with log-derivative in [0, C*]).
  void validate() const;

  double pdf(double t) const;
  double mean() const;
  double variance() const;
  double inverse_cdf(double u) const;
  /// Lower/upper density bounds and the log-derivative range on (0, c_V).
  double p_lower() const;
  double p_upper() const;
  double log_derivative() const { return kind == DensityKind::uniform ? 0.0 : rate; }
};

std::string to_string(DensityKind k);
DensityKind density_kind_from_string(const std::string& s);

/// Axis-aligned box of one-particle sites [lo, hi] in Z^d.
struct SiteBox {
  std::vector<int> lo;
  std::vector<int> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  std::size_t size() const;
  bool contains(std::span<const int> site) const;
  std::size_t index(std::span<const int> site) const;
  std::vector<int> site(std::size_t index) const;
};

struct DisorderSample {
  SiteBox region;
  std::vector<double> amplitudes;  // indexed by region.index(site)
  std::uint64_t seed = 0;
  std::uint64_t sample_index = 0;
  DensitySpec density;

  double amplitude(std::span<const int> site) const;
  double& amplitude_ref(std::span<const int> site);
};

/// IID draw per site, keyed by (seed, sample_index, site coordinates): a
/// site receives the same amplitude in every region that contains it.
DisorderSample sample_disorder(const SiteBox& region, std::uint64_t seed,
                               std::uint64_t sample_index, const DensitySpec& density);

/// Redraws the listed sites with a different sample index, leaving the
/// others untouched.
void resample_sites(DisorderSample& sample, std::span<const std::vector<int>> sites,
                    std::uint64_t new_index);

/// V(x) = sum_a V_a phi(x - a), phi the indicator of (-n/2, n/2]^d. The
/// half-open convention keeps the tiling exactly flat on cell faces.
double alloy_potential(std::span<const double> x, const DisorderSample& sample, int fold);

/// Sites a whose bump support meets the open cube's one-particle projection.
std::vector<std::vector<int>> driving_sites(const CubeSpec& cube, int fold);

/// Smallest site box holding every driving site of the cube.
SiteBox covering_box(const CubeSpec& cube, int fold);
SiteBox box_union(const SiteBox& a, const SiteBox& b);

struct InteractionSpec {
  double C_U = 1.0;
  double zeta = 1.0;
  double truncation_radius = std::numeric_limits<double>::infinity();

  void validate() const;
  /// U(r) = C_U exp(-r^zeta), zero beyond the truncation radius.
  double potential(double r) const;
};

/// Sum over unordered pairs of U(|x_i - x_j|) with the max-norm; positions
/// are N consecutive d-vectors.
double interaction_energy(std::span<const double> positions, int dim, const InteractionSpec& spec);

struct SrcmSample {
  std::vector<double> values;
  double xi = 0.0;           // sample mean
  std::vector<double> eta;   // values - xi
};

SrcmSample srcm_statistics(std::span<const double> values);

}  // namespace mploc
