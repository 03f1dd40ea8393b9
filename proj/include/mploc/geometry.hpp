#pragma once

// Lattice and continuum geometry of N-particle cubes.
//
// A configuration x = (x_1, ..., x_N) of N particles in Z^d is stored as one
// flat integer vector of length N*d. All distances are max-norm distances.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mploc {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LatticeConfig {
 public:
  LatticeConfig() = default;
  LatticeConfig(std::vector<int> coords, int n_particles, int dim);

  /// Origin configuration with N particles in Z^d.
  static LatticeConfig zero(int n_particles, int dim);

  int n_particles() const { return n_; }
  int dim() const { return d_; }
  std::size_t size() const { return coords_.size(); }

  int operator[](std::size_t i) const { return coords_[i]; }
  int& operator[](std::size_t i) { return coords_[i]; }

  std::span<const int> particle(int i) const {
    return {coords_.data() + static_cast<std::size_t>(i) * d_, static_cast<std::size_t>(d_)};
  }
  const std::vector<int>& coords() const { return coords_; }

  friend bool operator==(const LatticeConfig&, const LatticeConfig&) = default;
  friend auto operator<=>(const LatticeConfig& a, const LatticeConfig& b) {
    return a.coords_ <=> b.coords_;
  }

  std::string to_string() const;

 private:
  std::vector<int> coords_;
  int n_ = 0;
  int d_ = 0;
};

/// Cube Lambda_L(u) of radius L around a lattice center; its lattice
/// counterpart is the ball B_L(u) = { y : |y - u| <= L }.
struct CubeSpec {
  LatticeConfig center;
  int radius = 0;

  int n_particles() const { return center.n_particles(); }
  int dim() const { return center.dim(); }
  int config_dim() const { return n_particles() * dim(); }

  std::size_t ball_cardinality() const;
  int lattice_diameter() const { return 2 * radius; }
  int continuum_diameter() const { return 2 * radius + 1; }
};

int max_norm_dist(const LatticeConfig& x, const LatticeConfig& y);

std::vector<LatticeConfig> lattice_ball(const CubeSpec& cube);

/// Points of the ball at max-norm distance exactly L from the center.
std::vector<LatticeConfig> boundary_set(const CubeSpec& cube);

/// min over permutations pi of |pi(x) - y|.
int sym_dist(const LatticeConfig& x, const LatticeConfig& y);

enum class Interactivity { weak, strong };

struct InteractivityReport {
  Interactivity kind = Interactivity::strong;
  double projection_diameter = 0.0;
  double threshold = 0.0;  // 3 N L^tau
  bool single_particle = false;
};

InteractivityReport classify_interactivity(const CubeSpec& cube, double tau);

struct Factorization {
  std::vector<int> J;        // zero-based particle indices of the first cluster
  std::vector<int> J_c;      // the complement
  LatticeConfig center_J;    // u' = Pi_J u
  LatticeConfig center_Jc;   // u'' = Pi_{J^c} u
  double separation = 0.0;   // distance between the projected sub-cubes
};

/// Max-norm distance between the one-particle projections of two clusters of
/// closed cubes of radius L (half-width L + 1/2) around the given particles.
double projection_separation(const LatticeConfig& center, int radius, std::span<const int> J,
                             std::span<const int> J_c);

/// Lexicographically smallest partition J with separation > L^tau; only for
/// weakly interactive cubes.
Factorization canonical_factorization(const CubeSpec& cube, double tau);

/// Subconfiguration of the listed particles.
LatticeConfig project(const LatticeConfig& x, std::span<const int> particles);

/// |x - y| >= a * L, the center-distance convention for cube pairs.
bool cubes_distant(const LatticeConfig& x, const LatticeConfig& y, int L, double a);

}  // namespace mploc
