#pragma once

// Finite-difference grid over the open cube Lambda_L(u): the points of
// (h Z)^{Nd} strictly inside the cube, h = 1/M. Dirichlet conditions hold on
// the cube faces, which are never grid points.

#include <cstddef>
#include <vector>

#include "mploc/geometry.hpp"

namespace mploc {

using Index = std::ptrdiff_t;

class GridSpec {
 public:
  GridSpec(CubeSpec cube, int mesh_inverse);

  const CubeSpec& cube() const { return cube_; }
  int mesh_inverse() const { return m_; }
  double h() const { return 1.0 / m_; }
  int config_dim() const { return cube_.config_dim(); }

  /// Largest offset t with |t h| < L + 1/2.
  int max_offset() const { return t_max_; }
  int points_per_axis() const { return 2 * t_max_ + 1; }
  Index size() const { return size_; }

  /// Integer offsets t (in units of h, relative to the center) of a point.
  std::vector<int> offsets(Index i) const;
  Index index(const std::vector<int>& offsets) const;
  std::vector<double> position(Index i) const;

  /// Owning unit cell of a point: per coordinate the center c with
  /// p in (c - 1/2, c + 1/2], so shared faces go to the smaller center.
  LatticeConfig cell_of(Index i) const;

  /// Grid points of the cell C(x) (empty if the cell misses the grid).
  std::vector<Index> cell_points(const LatticeConfig& x) const;
  std::vector<Index> center_cell_points() const { return cell_points(cube_.center); }

  /// Points of the cells on the lattice boundary |x - u| = L.
  std::vector<Index> belt_points() const;

  /// Points of this grid lying in the sub-cube, in sub-grid index order.
  std::vector<Index> embed(const GridSpec& sub) const;

  /// Grid points outside the cube adjacent to it along one axis, in the
  /// enclosing grid `outer` (points missing from `outer` are skipped).
  std::vector<Index> outer_boundary_in(const GridSpec& outer) const;

 private:
  CubeSpec cube_;
  int m_ = 1;
  int t_max_ = 0;
  Index size_ = 0;
};

inline bool same_lattice(const GridSpec& a, const GridSpec& b) {
  return a.mesh_inverse() == b.mesh_inverse() && a.cube().n_particles() == b.cube().n_particles() &&
         a.cube().dim() == b.cube().dim();
}

}  // namespace mploc
