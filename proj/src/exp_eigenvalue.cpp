#include <algorithm>
#include <cmath>

#include "experiment_support.hpp"

namespace mploc::detail {

namespace {

void require_distant(const ExperimentConfig& c, const LatticeConfig& x, const LatticeConfig& y) {
  if (!cubes_distant(x, y, c.L, 4.0 * c.model.N))
    throw ConfigError("cube centers " + x.to_string() + " and " + y.to_string() + " are not 4NL-distant");
}

struct CubePair {
  CubeSpec x, y;
  std::shared_ptr<const DisorderSample> disorder;
};

CubePair pair_for(const ExperimentConfig& c, long index) {
  CubePair p{CubeSpec{cube_center(c), c.L}, CubeSpec{second_center(c), c.L}, nullptr};
  require_distant(c, p.x.center, p.y.center);
  p.disorder = disorder_for(c, box_union(covering_box(p.x, c.model.fold), covering_box(p.y, c.model.fold)), index);
  return p;
}

// Maximal runs [first, last] of grid indices with flag set.
std::vector<std::pair<int, int>> runs(const std::vector<bool>& flag) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < static_cast<int>(flag.size()); ++i) {
    if (!flag[i]) continue;
    if (!out.empty() && out.back().second == i - 1)
      out.back().second = i;
    else
      out.emplace_back(i, i);
  }
  return out;
}

std::vector<bool> unpack(const Record& r, int n) {
  std::vector<bool> flag(static_cast<std::size_t>(n), false);
  for (const auto& run : r)
    for (int i = run[0].get<int>(); i <= run[1].get<int>(); ++i) flag[static_cast<std::size_t>(i)] = true;
  return flag;
}

}  // namespace

Record wegner_sample(const ExperimentConfig& c, long index) {
  const CubeSpec cube{cube_center(c), c.L};
  const auto op = build(c, cube, disorder_for(c, covering_box(cube, c.model.fold), index), c.model.g);
  const auto ev = full_spectrum(op, false).eigenvalues;
  const auto win = window(ev, 0.0, c.E_star);
  double dist = std::numeric_limits<double>::infinity();
  for (double l : win) dist = std::min(dist, std::abs(l - c.energy));
  Record r;
  r["sample"] = index;
  r["ground"] = ev.size() ? ev[0] : 0.0;
  r["window_count"] = win.size();
  r["dist"] = num(dist);
  return r;
}

Summary wegner_summary(const ExperimentConfig& c, const std::vector<Record>& records) {
  Summary s;
  std::vector<double> d;
  double ground = std::numeric_limits<double>::infinity();
  double count = 0;
  for (const auto& r : records) {
    d.push_back(as_double(r["dist"]));
    ground = std::min(ground, r["ground"].get<double>());
    count += r["window_count"].get<double>();
  }
  s.values["energy"] = c.energy;
  s.values["mean_window_count"] = records.empty() ? 0.0 : count / records.size();
  s.values["min_ground_energy"] = num(ground);
  s.values["positivity_ok"] = ground >= -1e-10;
  s_curve(c, d, s, "wegner");
  return s;
}

Record evc2_sample(const ExperimentConfig& c, long index) {
  const auto p = pair_for(c, index);
  const auto ex = window(full_spectrum(build(c, p.x, p.disorder, c.model.g), false).eigenvalues, 0.0, c.E_star);
  const auto ey = window(full_spectrum(build(c, p.y, p.disorder, c.model.g), false).eigenvalues, 0.0, c.E_star);
  double dist = std::numeric_limits<double>::infinity();
  for (double a : ex)
    for (double b : ey) dist = std::min(dist, std::abs(a - b));
  Record r;
  r["sample"] = index;
  r["count_x"] = ex.size();
  r["count_y"] = ey.size();
  r["dist"] = num(dist);
  return r;
}

Summary evc2_summary(const ExperimentConfig& c, const std::vector<Record>& records) {
  Summary s;
  std::vector<double> d;
  for (const auto& r : records) d.push_back(as_double(r["dist"]));
  const CubeSpec x{cube_center(c), c.L}, y{second_center(c), c.L};
  const auto shared = shared_driving_sites(x, y, c.model.fold);
  s.values["center_x"] = x.center.to_string();
  s.values["center_y"] = y.center.to_string();
  s.values["shared_driving_sites"] = shared;
  s.values["independent_amplitudes"] = shared == 0;
  s_curve(c, d, s, "evc2");
  return s;
}

Record fe_to_ei_sample(const ExperimentConfig& c, long index) {
  const double step = c.E_star / c.grid_points;
  const double resolution = c.resolution > 0 ? c.resolution : c.E_star / 2048.0;
  if (step > resolution * (1 + 1e-12))
    throw ConfigError("energy grid spacing exceeds the requested resolution; refusing");
  const auto p = pair_for(c, index);
  const SpectralResolvent gx(build(c, p.x, p.disorder, c.model.g));
  const SpectralResolvent gy(build(c, p.y, p.disorder, c.model.g));
  auto F = [](const SpectralResolvent& g, double E) {
    try {
      return g.boundary_max(E);
    } catch (const ResonantEnergy&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const int n = c.grid_points;
  std::vector<bool> ex(static_cast<std::size_t>(n)), ey(static_cast<std::size_t>(n));
  bool both = false;
  for (int i = 0; i < n; ++i) {
    const double E = (i + 0.5) * step;
    ex[i] = F(gx, E) >= c.a_L;
    ey[i] = F(gy, E) >= c.a_L;
    both = both || (ex[i] && ey[i]);
  }
  const auto rx = runs(ex), ry = runs(ey);
  // Eigenvalues of the window lying in the energy span of an exceedance run.
  auto inside = [&](const SpectralResolvent& g, const std::vector<std::pair<int, int>>& rr) {
    int in = 0, total = 0;
    for (double l : window(g.eigenvalues(), 0.0, c.E_star)) {
      ++total;
      for (const auto& [a, b] : rr)
        if (l >= a * step && l <= (b + 1) * step) {
          ++in;
          break;
        }
    }
    return std::pair{in, total};
  };
  const auto [inx, totx] = inside(gx, rx);
  const auto [iny, toty] = inside(gy, ry);
  Record r;
  r["sample"] = index;
  r["exists_both"] = both;
  r["measure_x"] = static_cast<double>(std::count(ex.begin(), ex.end(), true)) * step;
  r["measure_y"] = static_cast<double>(std::count(ey.begin(), ey.end(), true)) * step;
  r["runs_x"] = rx;
  r["runs_y"] = ry;
  r["eigen_in_runs_x"] = inx;
  r["eigen_x"] = totx;
  r["eigen_in_runs_y"] = iny;
  r["eigen_y"] = toty;
  return r;
}

Summary fe_to_ei_summary(const ExperimentConfig& c, const std::vector<Record>& records) {
  Summary s;
  const int n = c.grid_points;
  const double step = c.E_star / n;
  const double total = static_cast<double>(records.size());
  std::vector<double> cx(static_cast<std::size_t>(n), 0), cy(static_cast<std::size_t>(n), 0),
      cb(static_cast<std::size_t>(n), 0);
  double lhs = 0, big_x = 0, big_y = 0, second = 0;
  long eig_in = 0, eig_total = 0;
  for (const auto& r : records) {
    const auto fx = unpack(r["runs_x"], n), fy = unpack(r["runs_y"], n);
    for (int i = 0; i < n; ++i) {
      cx[i] += fx[i];
      cy[i] += fy[i];
      cb[i] += fx[i] && fy[i];
    }
    const bool both = r["exists_both"].get<bool>();
    const double mx = r["measure_x"].get<double>(), my = r["measure_y"].get<double>();
    lhs += both;
    big_x += mx > c.b;
    big_y += my > c.b;
    second += both && mx <= c.b && my <= c.b;
    eig_in += r["eigen_in_runs_x"].get<long>() + r["eigen_in_runs_y"].get<long>();
    eig_total += r["eigen_x"].get<long>() + r["eigen_y"].get<long>();
  }
  double q = 0, fixed_both = 0;
  SeriesTable fixed;
  fixed.columns = {"E", "p_x", "p_y", "p_both"};
  for (int i = 0; i < n; ++i) {
    const double px = cx[i] / total, py = cy[i] / total, pb = cb[i] / total;
    q = std::max({q, px, py});
    fixed_both = std::max(fixed_both, pb);
    fixed.rows.push_back({(i + 0.5) * step, px, py, pb});
  }
  lhs /= total;
  second /= total;
  const double rhs_first = 2.0 * c.E_star * q / c.b;
  const double rhs = rhs_first + second;
  const double volume = std::pow(static_cast<double>(c.L), 4.0 * c.model.N * c.model.d);
  auto& v = s.values;
  v["grid_spacing"] = step;
  v["a_L"] = c.a_L;
  v["b"] = c.b;
  v["q_L"] = q;
  v["lhs_interval_probability"] = lhs;
  v["rhs_markov_term"] = rhs_first;
  v["rhs_two_volume_term"] = second;
  v["rhs"] = rhs;
  v["lhs_le_rhs"] = lhs <= rhs;
  v["union_bound"] = big_x / total + big_y / total + second;
  v["markov_x"] = big_x / total;
  v["markov_y"] = big_y / total;
  v["implied_C3"] = second / (volume * c.b);
  v["max_fixed_energy_both"] = fixed_both;
  v["fixed_le_interval"] = fixed_both <= lhs;
  v["eigenvalues_inside_runs"] = eig_in;
  v["eigenvalues_in_window"] = eig_total;
  s.series["fixed_energy"] = std::move(fixed);
  return s;
}

}  // namespace mploc::detail
