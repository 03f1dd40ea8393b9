#include "mploc/grid.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

namespace mploc {

namespace {

int ceil_div(int a, int b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }
int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

}  // namespace

GridSpec::GridSpec(CubeSpec cube, int mesh_inverse) : cube_(std::move(cube)), m_(mesh_inverse) {
  if (m_ < 1 || m_ > 16) throw GeometryError("mesh step must be h = 1/M with integer 1 <= M <= 16");
  if (cube_.radius < 0) throw GeometryError("negative cube radius");
  t_max_ = ((2 * cube_.radius + 1) * m_ - 1) / 2;
  size_ = 1;
  for (int k = 0; k < config_dim(); ++k) size_ *= points_per_axis();
}

std::vector<int> GridSpec::offsets(Index i) const {
  const int n = config_dim();
  std::vector<int> t(static_cast<std::size_t>(n));
  const Index p = points_per_axis();
  for (int k = n - 1; k >= 0; --k) {
    t[k] = static_cast<int>(i % p) - t_max_;
    i /= p;
  }
  return t;
}

Index GridSpec::index(const std::vector<int>& t) const {
  Index idx = 0;
  const Index p = points_per_axis();
  for (int v : t) {
    if (v < -t_max_ || v > t_max_) return -1;
    idx = idx * p + (v + t_max_);
  }
  return idx;
}

std::vector<double> GridSpec::position(Index i) const {
  const auto t = offsets(i);
  std::vector<double> x(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) x[k] = cube_.center[k] + static_cast<double>(t[k]) / m_;
  return x;
}

LatticeConfig GridSpec::cell_of(Index i) const {
  const auto t = offsets(i);
  std::vector<int> c(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) c[k] = cube_.center[k] + ceil_div(2 * t[k] - m_, 2 * m_);
  return LatticeConfig(std::move(c), cube_.n_particles(), cube_.dim());
}

std::vector<Index> GridSpec::cell_points(const LatticeConfig& x) const {
  const int n = config_dim();
  std::vector<int> lo(n), hi(n);
  for (int k = 0; k < n; ++k) {
    const int c = x[k] - cube_.center[k];
    // 2t in (2Mc - M, 2Mc + M]
    lo[k] = std::max(-t_max_, floor_div(2 * m_ * c - m_, 2) + 1);
    hi[k] = std::min(t_max_, floor_div(2 * m_ * c + m_, 2));
    if (lo[k] > hi[k]) return {};
  }
  std::vector<Index> out;
  std::vector<int> t = lo;
  while (true) {
    out.push_back(index(t));
    int k = n - 1;
    while (k >= 0 && t[k] == hi[k]) {
      t[k] = lo[k];
      --k;
    }
    if (k < 0) break;
    ++t[k];
  }
  return out;
}

std::vector<Index> GridSpec::belt_points() const {
  std::vector<Index> out;
  const auto& u = cube_.center;
  for (Index i = 0; i < size_; ++i)
    if (max_norm_dist(cell_of(i), u) == cube_.radius) out.push_back(i);
  return out;
}

std::vector<Index> GridSpec::embed(const GridSpec& sub) const {
  if (!same_lattice(*this, sub)) throw GeometryError("sub-grid lives on a different lattice");
  const int n = config_dim();
  std::vector<int> shift(n);
  for (int k = 0; k < n; ++k) shift[k] = m_ * (sub.cube().center[k] - cube_.center[k]);
  std::vector<Index> out(static_cast<std::size_t>(sub.size()));
  for (Index j = 0; j < sub.size(); ++j) {
    auto t = sub.offsets(j);
    for (int k = 0; k < n; ++k) t[k] += shift[k];
    const Index i = index(t);
    if (i < 0) throw GeometryError("sub-cube does not fit inside the cube");
    out[static_cast<std::size_t>(j)] = i;
  }
  return out;
}

std::vector<Index> GridSpec::outer_boundary_in(const GridSpec& outer) const {
  if (!same_lattice(*this, outer)) throw GeometryError("grids live on different lattices");
  const int n = config_dim();
  std::vector<int> shift(n);
  for (int k = 0; k < n; ++k) shift[k] = m_ * (cube_.center[k] - outer.cube().center[k]);
  std::set<Index> out;
  for (Index j = 0; j < size_; ++j) {
    const auto s = offsets(j);
    for (int k = 0; k < n; ++k)
      for (int step : {-1, 1}) {
        if (std::abs(s[k] + step) <= t_max_) continue;
        auto t = s;
        t[k] += step;
        for (int q = 0; q < n; ++q) t[q] += shift[q];
        const Index i = outer.index(t);
        if (i >= 0) out.insert(i);
      }
  }
  return {out.begin(), out.end()};
}

}  // namespace mploc
