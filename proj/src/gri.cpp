#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "mploc/msa.hpp"

namespace mploc {

double gri_coupling(const DiscretizedOperator& op) {
  return op.hopping() * std::sqrt(static_cast<double>(op.grid().config_dim()));
}

namespace {

// Offsets (relative to the sub-cube center) of the parent cells holding the
// outer boundary layer of a radius-l sub-cube; translation invariant inside
// the parent.
std::vector<std::vector<int>> boundary_cell_offsets(const GridSpec& parent, int l) {
  const auto& u = parent.cube().center;
  const GridSpec sub(CubeSpec{u, l}, parent.mesh_inverse());
  std::set<std::vector<int>> cells;
  for (Index i : sub.outer_boundary_in(parent)) {
    const auto c = parent.cell_of(i);
    std::vector<int> off(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) off[k] = c[k] - u[k];
    cells.insert(std::move(off));
  }
  return {cells.begin(), cells.end()};
}

LatticeConfig shifted(const LatticeConfig& x, const std::vector<int>& off) {
  std::vector<int> c(x.coords());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] += off[k];
  return LatticeConfig(std::move(c), x.n_particles(), x.dim());
}

bool fits(const CubeSpec& parent, const LatticeConfig& x, int l) {
  return max_norm_dist(x, parent.center) + l <= parent.radius - 1;
}

}  // namespace

GriResult gri_descent(const DiscretizedOperator& parent, double E, int Lk,
                      const std::vector<SubcubeVerdict>& subs, double beta) {
  const GridSpec& pg = parent.grid();
  const CubeSpec& cube = pg.cube();
  const auto& u = cube.center;
  GriResult res;
  const double dist = spectral_distance(parent, E);
  const double thr = std::exp(-std::pow(static_cast<double>(cube.radius), beta));
  if (!(dist >= thr)) throw std::domain_error("parent cube is not non-resonant; descent refused");
  res.parent_norm = 1.0 / dist;
  const double g0 = res.parent_norm;

  const auto cells = lattice_ball(cube);
  std::map<LatticeConfig, std::size_t> index;
  for (std::size_t i = 0; i < cells.size(); ++i) index[cells[i]] = i;

  std::map<LatticeConfig, const SubcubeVerdict*> verdict;
  for (const auto& s : subs) verdict[s.center] = &s;

  const double coupling = gri_coupling(parent);
  std::vector<double> factor(cells.size(), 0.0);
  std::vector<bool> usable(cells.size(), false);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!fits(cube, cells[i], Lk)) continue;
    auto it = verdict.find(cells[i]);
    if (it == verdict.end() || it->second->singular || it->second->resonant) continue;
    usable[i] = true;
    factor[i] = coupling * it->second->dnorm;
  }
  const std::size_t iu = index.at(u);
  if (!usable[iu]) throw GeometryError("descent blocked: the center sub-cube is singular or does not fit");

  const auto offsets = boundary_cell_offsets(pg, Lk);
  std::vector<std::vector<std::size_t>> nbr(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!usable[i]) continue;
    for (const auto& off : offsets) nbr[i].push_back(index.at(shifted(cells[i], off)));
  }

  std::vector<double> b(cells.size(), g0);
  for (res.iterations = 0; res.iterations < 10000; ++res.iterations) {
    double change = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!usable[i]) continue;
      double s = 0.0;
      for (std::size_t z : nbr[i]) s += b[z];
      const double nb = std::min(g0, factor[i] * s);
      if (nb < b[i]) {
        change = std::max(change, (b[i] - nb) / b[i]);
        b[i] = nb;
      }
    }
    if (change < 1e-13) {
      res.converged = true;
      break;
    }
  }
  res.bound = b[iu];

  // Proof-form descent: step outward to the neighbour cell with the largest bound.
  std::size_t x = iu;
  res.trace_product = g0;
  for (std::size_t steps = 0; usable[x] && steps < cells.size(); ++steps) {
    const double f = factor[x] * static_cast<double>(nbr[x].size());
    res.trace.push_back({cells[x], f});
    res.trace_product *= f;
    const int r = max_norm_dist(cells[x], u);
    std::size_t next = cells.size();
    for (std::size_t z : nbr[x])
      if (max_norm_dist(cells[z], u) > r && (next == cells.size() || b[z] > b[next])) next = z;
    if (next == cells.size()) break;
    x = next;
  }
  return res;
}

double calibrate_gri(const DiscretizedOperator& parent, double E, int l, int max_sources) {
  const GridSpec& pg = parent.grid();
  const CubeSpec& cube = pg.cube();
  if (cube.radius < 1) throw GeometryError("calibration needs a parent of radius >= 1");
  const Resolvent g(parent, E);
  const auto belt_cells = boundary_set(cube);
  std::vector<Index> belt_pts;
  std::vector<std::pair<std::size_t, std::size_t>> belt_range;
  for (const auto& y : belt_cells) {
    const auto pts = pg.cell_points(y);
    belt_range.emplace_back(belt_pts.size(), pts.size());
    belt_pts.insert(belt_pts.end(), pts.begin(), pts.end());
  }
  // Columns for belt points; by symmetry their rows give chi_z G chi_y.
  const Eigen::MatrixXd cols = g.columns(belt_pts);
  auto block = [&](std::size_t yi, const LatticeConfig& z) {
    const auto rows = pg.cell_points(z);
    const auto [start, len] = belt_range[yi];
    return restricted_norm(cols.middleCols(static_cast<Index>(start), static_cast<Index>(len)), rows);
  };

  std::vector<LatticeConfig> sources;
  for (const auto& x : lattice_ball(cube))
    if (fits(cube, x, l)) sources.push_back(x);
  if (sources.empty()) throw GeometryError("no sub-cube of that radius fits in the parent");
  const std::size_t step = std::max<std::size_t>(1, sources.size() / static_cast<std::size_t>(max_sources));
  const auto offsets = boundary_cell_offsets(pg, l);
  const double geom = std::pow(3.0 * l, cube.config_dim());

  double worst = 0.0;
  for (std::size_t si = 0; si < sources.size(); si += step) {
    const auto& x = sources[si];
    const double dn = dnorm(sub_operator(parent, CubeSpec{x, l}), E);
    for (std::size_t yi = 0; yi < belt_cells.size(); ++yi) {
      const double lhs = block(yi, x);
      double zmax = 0.0;
      for (const auto& off : offsets) zmax = std::max(zmax, block(yi, shifted(x, off)));
      const double rhs = geom * dn * zmax;
      if (rhs > 0) worst = std::max(worst, lhs / rhs);
    }
  }
  return worst;
}

ScalingStepReport scaling_step_check(const DiscretizedOperator& parent, double E, const ScaleParams& p, int k,
                                     const StepOptions& opts) {
  ScalingStepReport r;
  r.toy = opts.toy;
  r.Lk = static_cast<int>(scale(p, k));
  r.Lk1 = opts.toy_ratio > 0 ? opts.toy_ratio * r.Lk : static_cast<int>(scale(p, k + 1));
  const CubeSpec& cube = parent.grid().cube();
  if (cube.radius != r.Lk1) throw std::invalid_argument("parent radius must equal L_{k+1}");
  r.stride = opts.stride > 0 ? opts.stride : default_stride(r.Lk);
  r.mass = mass(p, cube.n_particles());

  const auto subs = subcube_verdicts(parent, E, r.Lk, r.stride, r.mass, p.tau, opts.C_geom);
  r.subcubes = static_cast<int>(subs.size());
  for (const auto& s : subs) {
    r.singular += s.singular;
    r.weak_singular += s.singular && s.weak;
  }
  r.good_bad = classify_good_bad(cube, r.Lk, subs, p, E, r.stride);
  r.parent_good = r.good_bad.kind == VerdictKind::good;
  r.wi_event = r.weak_singular > 0;
  r.family_event = !r.parent_good && !r.wi_event;

  const auto cnr = is_cnr(parent, E, p.beta, r.Lk, r.Lk1, r.stride);
  r.parent_cnr = cnr.kind == VerdictKind::CNR;
  r.resonant_event = !r.parent_cnr;

  const auto ns = is_ns(parent, E, r.mass, opts.C_geom);
  r.parent_dnorm = ns.witness;
  r.parent_singular = ns.kind == VerdictKind::S;
  r.parent_dist = spectral_distance(parent, E);

  r.premises = r.parent_good && r.parent_cnr;
  r.conclusion = !r.parent_singular;
  r.counterexample = r.premises && !r.conclusion;
  r.status = !r.premises ? "vacuous" : (r.conclusion ? "holds" : "counterexample");

  if (r.premises) {
    try {
      const auto g = gri_descent(parent, E, r.Lk, subs, p.beta);
      r.gri_bound = g.bound;
      r.gri_trace = g.trace_product;
    } catch (const std::exception& e) {
      r.gri_note = e.what();
    }
  }
  return r;
}

}  // namespace mploc
