#include "mploc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <sstream>

namespace mploc {

LatticeConfig::LatticeConfig(std::vector<int> coords, int n_particles, int dim)
    : coords_(std::move(coords)), n_(n_particles), d_(dim) {
  if (n_ < 1 || d_ < 1) throw GeometryError("LatticeConfig: need N >= 1 and d >= 1");
  if (coords_.size() != static_cast<std::size_t>(n_) * static_cast<std::size_t>(d_))
    throw GeometryError("LatticeConfig: coordinate count differs from N*d");
}

LatticeConfig LatticeConfig::zero(int n_particles, int dim) {
  return LatticeConfig(std::vector<int>(static_cast<std::size_t>(n_particles) * dim, 0),
                       n_particles, dim);
}

std::string LatticeConfig::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < coords_.size(); ++i) os << (i ? "," : "") << coords_[i];
  os << ')';
  return os.str();
}

std::size_t CubeSpec::ball_cardinality() const {
  std::size_t n = 1;
  for (int k = 0; k < config_dim(); ++k) n *= static_cast<std::size_t>(2 * radius + 1);
  return n;
}

namespace {

void require_same_shape(const LatticeConfig& x, const LatticeConfig& y) {
  if (x.n_particles() != y.n_particles() || x.dim() != y.dim())
    throw GeometryError("configurations differ in particle count or dimension");
}

int particle_dist(std::span<const int> a, std::span<const int> b) {
  int m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

// Odometer over all offsets in [-r, r]^n; calls f(offsets) for each.
template <class F>
void for_each_offset(int n, int r, F&& f) {
  std::vector<int> off(static_cast<std::size_t>(n), -r);
  while (true) {
    f(off);
    int k = n - 1;
    while (k >= 0 && off[k] == r) {
      off[k] = -r;
      --k;
    }
    if (k < 0) return;
    ++off[k];
  }
}

}  // namespace

int max_norm_dist(const LatticeConfig& x, const LatticeConfig& y) {
  require_same_shape(x, y);
  int m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

std::vector<LatticeConfig> lattice_ball(const CubeSpec& cube) {
  if (cube.radius < 0) throw GeometryError("negative radius");
  std::vector<LatticeConfig> out;
  out.reserve(cube.ball_cardinality());
  const auto& u = cube.center;
  for_each_offset(cube.config_dim(), cube.radius, [&](const std::vector<int>& off) {
    std::vector<int> c(off.size());
    for (std::size_t i = 0; i < off.size(); ++i) c[i] = u[i] + off[i];
    out.emplace_back(std::move(c), u.n_particles(), u.dim());
  });
  return out;
}

std::vector<LatticeConfig> boundary_set(const CubeSpec& cube) {
  if (cube.radius == 0) throw GeometryError("no boundary at radius zero");
  std::vector<LatticeConfig> out;
  for (auto& y : lattice_ball(cube))
    if (max_norm_dist(y, cube.center) == cube.radius) out.push_back(std::move(y));
  return out;
}

int sym_dist(const LatticeConfig& x, const LatticeConfig& y) {
  require_same_shape(x, y);
  const int n = x.n_particles();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  int best = std::numeric_limits<int>::max();
  do {
    int m = 0;
    for (int i = 0; i < n && m < best; ++i)
      m = std::max(m, particle_dist(x.particle(perm[i]), y.particle(i)));
    best = std::min(best, m);
  } while (best > 0 && std::next_permutation(perm.begin(), perm.end()));
  return best;
}

InteractivityReport classify_interactivity(const CubeSpec& cube, double tau) {
  if (tau < 1.0) throw GeometryError("interactivity needs tau >= 1");
  if (cube.radius < 1) throw GeometryError("interactivity needs radius >= 1");
  InteractivityReport r;
  const int n = cube.n_particles();
  r.threshold = 3.0 * n * std::pow(static_cast<double>(cube.radius), tau);
  if (n == 1) {
    r.single_particle = true;
    r.kind = Interactivity::strong;
    return r;
  }
  int diam = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      diam = std::max(diam, particle_dist(cube.center.particle(i), cube.center.particle(j)));
  r.projection_diameter = diam;
  r.kind = diam >= r.threshold ? Interactivity::weak : Interactivity::strong;
  return r;
}

double projection_separation(const LatticeConfig& center, int radius, std::span<const int> J,
                             std::span<const int> J_c) {
  // Two closed boxes of half-width L + 1/2: gap = center distance - (2L + 1).
  double sep = std::numeric_limits<double>::infinity();
  for (int i : J)
    for (int j : J_c) {
      const int cd = particle_dist(center.particle(i), center.particle(j));
      sep = std::min(sep, std::max(0.0, static_cast<double>(cd) - (2.0 * radius + 1.0)));
    }
  return sep;
}

LatticeConfig project(const LatticeConfig& x, std::span<const int> particles) {
  std::vector<int> c;
  c.reserve(particles.size() * x.dim());
  for (int p : particles) {
    auto s = x.particle(p);
    c.insert(c.end(), s.begin(), s.end());
  }
  return LatticeConfig(std::move(c), static_cast<int>(particles.size()), x.dim());
}

Factorization canonical_factorization(const CubeSpec& cube, double tau) {
  if (classify_interactivity(cube, tau).kind != Interactivity::weak)
    throw GeometryError("no factorization for strongly interactive cube");
  const int n = cube.n_particles();
  const double need = std::pow(static_cast<double>(cube.radius), tau);

  // Candidate index sets as sorted vectors, ordered lexicographically.
  std::vector<std::vector<int>> candidates;
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    std::vector<int> J;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) J.push_back(i);
    candidates.push_back(std::move(J));
  }
  std::sort(candidates.begin(), candidates.end());

  for (const auto& J : candidates) {
    std::vector<int> Jc;
    for (int i = 0; i < n; ++i)
      if (!std::binary_search(J.begin(), J.end(), i)) Jc.push_back(i);
    const double sep = projection_separation(cube.center, cube.radius, J, Jc);
    if (sep > need) {
      Factorization f;
      f.center_J = project(cube.center, J);
      f.center_Jc = project(cube.center, Jc);
      f.J = J;
      f.J_c = std::move(Jc);
      f.separation = sep;
      return f;
    }
  }
  throw GeometryError("weakly interactive cube admits no partition with separation > L^tau");
}

bool cubes_distant(const LatticeConfig& x, const LatticeConfig& y, int L, double a) {
  return static_cast<double>(max_norm_dist(x, y)) >= a * L;
}

}  // namespace mploc
