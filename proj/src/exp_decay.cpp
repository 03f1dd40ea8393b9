#include <algorithm>
#include <cmath>
#include <map>

#include "mploc/appendix.hpp"
#include "experiment_support.hpp"

namespace mploc {

bool passes_eigen_gate(const DiscretizedOperator& op, double lambda, const Eigen::VectorXd& psi, double tol) {
  const double n = psi.norm();
  if (!(n > 0)) return false;
  return (op.matrix() * psi - lambda * psi).norm() / n <= tol;
}

DecayFit fit_decay(const std::vector<CellNorm>& profile, const LatticeConfig& origin, bool peak_relative) {
  DecayFit out;
  if (profile.empty()) return out;
  const auto peak = std::max_element(profile.begin(), profile.end(),
                                     [](const CellNorm& a, const CellNorm& b) { return a.norm < b.norm; });
  out.peak = peak->cell;
  const int start = peak_relative ? 1 : max_norm_dist(peak->cell, origin) + 1;
  std::map<int, double> envelope;
  for (const auto& c : profile) {
    const int r = peak_relative ? sym_dist(c.cell, out.peak) : max_norm_dist(c.cell, origin);
    if (r < start || c.norm <= kNoiseFloor) continue;
    auto& e = envelope[r];
    e = std::max(e, c.norm);
  }
  if (envelope.size() < 2) return out;
  std::vector<double> x, y;
  for (const auto& [r, n] : envelope) {
    x.push_back(r);
    y.push_back(std::log(n));
  }
  out.fit = fit_line(x, y);
  return out;
}

FreeCtCheck free_ct_check(double kappa, int L) {
  const CubeSpec cube{LatticeConfig::zero(1, 1), L};
  ModelParams m;
  m.kappa = kappa;
  m.g = 0.0;
  auto disorder = std::make_shared<const DisorderSample>(sample_disorder(covering_box(cube, 1), 0, 0, DensitySpec{}));
  const auto op = assemble(GridSpec(cube, 1), disorder, m);
  return {combes_thomas_profile(op, -1.0).rate(), free_resolvent_rate(kappa, 1.0, -1.0)};
}

namespace detail {

namespace {

std::vector<CubeSpec> edi_subcubes(const ExperimentConfig& c, const CubeSpec& cube) {
  const int R = c.L - c.edi_radius - 1;
  if (R < 0) return {};
  std::vector<int> axis;
  for (int t = -R; t <= R; t += c.edi_stride) axis.push_back(t);
  const int n = cube.config_dim();
  std::vector<CubeSpec> out;
  std::vector<std::size_t> pos(static_cast<std::size_t>(n), 0);
  while (true) {
    std::vector<int> x(cube.center.coords());
    for (int k = 0; k < n; ++k) x[k] += axis[pos[k]];
    out.push_back({LatticeConfig(std::move(x), cube.n_particles(), cube.dim()), c.edi_radius});
    int k = n - 1;
    while (k >= 0 && pos[k] + 1 == axis.size()) pos[k--] = 0;
    if (k < 0) break;
    ++pos[k];
  }
  return out;
}

Json fit_json(const LinearFit& f) {
  return f.points >= 2 ? Json{{"rate", -f.slope}, {"r2", f.r2}, {"points", f.points}}
                       : Json{{"rate", nullptr}, {"r2", nullptr}, {"points", f.points}};
}

}  // namespace

Record decay_sample(const ExperimentConfig& c, long index) {
  const CubeSpec cube{cube_center(c), c.L};
  const auto disorder = disorder_for(c, covering_box(cube, c.model.fold), index);
  const auto subs = edi_subcubes(c, cube);
  Record r;
  r["sample"] = index;
  Record sweep = Record::array();
  for (double g : c.g_sweep) {
    const auto op = build(c, cube, disorder, g);
    WindowOptions opts;
    opts.vectors = true;
    const auto spec = spectrum_window(op, 0.0, c.E_star, opts);
    Record e;
    e["g"] = g;
    if (spec.count() == 0) {
      e["status"] = "empty window";
      e["eigen"] = Record::array();
      sweep.push_back(std::move(e));
      continue;
    }
    e["status"] = "ok";
    Record eigen = Record::array();
    long pairs = 0, holds = 0, chain = 0, literal = 0, skipped = 0, degenerate = 0, gated = 0;
    double worst = 0.0;
    for (Index j = 0; j < spec.count() && static_cast<int>(eigen.size()) < c.max_eigenpairs; ++j) {
      const double lambda = spec.eigenvalues[j];
      const Eigen::VectorXd psi = spec.eigenvectors.col(j);
      if (!passes_eigen_gate(op, lambda, psi)) {
        ++gated;
        continue;
      }
      const auto profile = cell_profile(op.grid(), psi);
      const auto peak = fit_decay(profile, cube.center, true);
      const auto origin = fit_decay(profile, cube.center, false);
      Record f;
      f["lambda"] = lambda;
      f["peak"] = peak.peak.coords();
      f["peak_fit"] = fit_json(peak.fit);
      f["origin_fit"] = fit_json(origin.fit);
      std::vector<double> norms;
      for (const auto& cn : profile) norms.push_back(cn.norm);
      f["cell_norms"] = norms;
      eigen.push_back(std::move(f));
      for (const auto& sub : subs) {
        const auto rep = edi_check(op, lambda, psi, sub);
        if (rep.skipped) {
          ++skipped;
          continue;
        }
        ++pairs;
        holds += rep.holds;
        chain += rep.chain_holds;
        literal += rep.literal_holds;
        degenerate += rep.degenerate;
        if (!rep.degenerate) worst = std::max(worst, rep.ratio());
      }
    }
    e["eigen"] = std::move(eigen);
    e["gated_out"] = gated;
    e["edi"] = {{"pairs", pairs},       {"holds", holds},           {"chain_holds", chain},
                {"literal_holds", literal}, {"skipped", skipped},   {"degenerate", degenerate},
                {"max_ratio", worst}};
    sweep.push_back(std::move(e));
  }
  r["sweep"] = std::move(sweep);
  return r;
}

Summary decay_summary(const ExperimentConfig& c, const std::vector<Record>& records) {
  Summary s;
  auto& v = s.values;
  const CubeSpec cube{cube_center(c), c.L};
  const auto cells = lattice_ball(cube);
  std::vector<std::pair<double, double>> medians;
  Record per_g = Record::array();
  long pairs = 0, holds = 0, chain = 0, literal = 0, skipped = 0;
  double worst = 0.0;
  double top_g = -1.0, top_frac = 0.0;
  SeriesTable rates;
  rates.columns = {"g", "rate_peak", "r2_peak", "rate_origin", "r2_origin"};
  for (std::size_t gi = 0; gi < c.g_sweep.size(); ++gi) {
    const double g = c.g_sweep[gi];
    std::vector<double> m;
    long total = 0, good_fit = 0, empty = 0;
    for (const auto& r : records) {
      const auto& e = r["sweep"][gi];
      if (e["status"] != "ok") {
        ++empty;
        continue;
      }
      const auto& edi = e["edi"];
      pairs += edi["pairs"].get<long>();
      holds += edi["holds"].get<long>();
      chain += edi["chain_holds"].get<long>();
      literal += edi["literal_holds"].get<long>();
      skipped += edi["skipped"].get<long>();
      worst = std::max(worst, edi["max_ratio"].get<double>());
      for (const auto& f : e["eigen"]) {
        ++total;
        const auto& pf = f["peak_fit"];
        const auto& of = f["origin_fit"];
        if (pf["rate"].is_null()) continue;
        m.push_back(pf["rate"].get<double>());
        good_fit += pf["r2"].get<double>() >= 0.9;
        rates.rows.push_back({g, pf["rate"].get<double>(), pf["r2"].get<double>(), as_double(of["rate"]),
                              as_double(of["r2"])});
      }
    }
    const double med = m.empty() ? std::nan("") : median(m);
    const double frac = total ? static_cast<double>(good_fit) / total : 0.0;
    per_g.push_back({{"g", g},
                     {"eigenfunctions", total},
                     {"empty_windows", empty},
                     {"median_rate", num(med)},
                     {"r2_ge_0.9_fraction", frac}});
    medians.emplace_back(g, med);
    if (g > top_g) {
      top_g = g;
      top_frac = frac;
    }
  }
  std::sort(medians.begin(), medians.end());
  bool monotone = true;
  for (std::size_t i = 1; i < medians.size(); ++i)
    monotone = monotone && std::isfinite(medians[i].second) && medians[i].second >= medians[i - 1].second;
  v["per_g"] = std::move(per_g);
  v["median_rate_nondecreasing"] = monotone;
  v["largest_g"] = top_g;
  v["largest_g_r2_fraction"] = top_frac;
  v["edi_pairs"] = pairs;
  v["edi_violations"] = pairs - holds;
  v["edi_chain_violations"] = pairs - chain;
  v["edi_literal_violations"] = pairs - literal;
  v["edi_skipped_resonant"] = skipped;
  v["edi_max_ratio"] = worst;
  s.series["rates"] = std::move(rates);

  // One profile table per eigenfunction, one row per cell.
  for (const auto& r : records) {
    for (std::size_t gi = 0; gi < c.g_sweep.size(); ++gi) {
      const auto& eig = r["sweep"][gi]["eigen"];
      for (std::size_t j = 0; j < eig.size(); ++j) {
        const auto& f = eig[j];
        const LatticeConfig peak(f["peak"].get<std::vector<int>>(), cube.n_particles(), cube.dim());
        SeriesTable t;
        for (std::size_t k = 0; k < cube.center.size(); ++k) t.columns.push_back("x" + std::to_string(k + 1));
        t.columns.insert(t.columns.end(), {"dist_origin", "dist_peak", "log_norm"});
        const auto& norms = f["cell_norms"];
        for (std::size_t i = 0; i < cells.size() && i < norms.size(); ++i) {
          std::vector<double> row(cells[i].coords().begin(), cells[i].coords().end());
          const double n = norms[i].get<double>();
          row.push_back(max_norm_dist(cells[i], cube.center));
          row.push_back(sym_dist(cells[i], peak));
          row.push_back(n > 0 ? std::log(n) : -std::numeric_limits<double>::infinity());
          t.rows.push_back(std::move(row));
        }
        s.series["profile_s" + std::to_string(r["sample"].get<long>()) + "_g" + Json(c.g_sweep[gi]).dump() + "_e" +
                 std::to_string(j)] = std::move(t);
      }
    }
  }
  return s;
}

// ---------------------------------------------------------------- ct

Record ct_sample(const ExperimentConfig& c, long index) {
  const CubeSpec cube{cube_center(c), c.L};
  const auto op = build(c, cube, disorder_for(c, covering_box(cube, c.model.fold), index), c.model.g);
  const double ground = full_spectrum(op, false).eigenvalues[0];
  Record r;
  r["sample"] = index;
  r["ground"] = ground;
  std::vector<double> rates, r2;
  for (double gap : c.ct_gaps) {
    const auto p = combes_thomas_profile(op, ground - gap);
    rates.push_back(p.rate());
    r2.push_back(p.fit.r2);
  }
  r["gaps"] = c.ct_gaps;
  r["rates"] = rates;
  r["r2"] = r2;
  return r;
}

Summary ct_summary(const ExperimentConfig& c, const std::vector<Record>& records) {
  Summary s;
  auto& v = s.values;
  std::vector<std::size_t> order(c.ct_gaps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return c.ct_gaps[a] < c.ct_gaps[b]; });
  long monotone = 0;
  SeriesTable t;
  t.columns = {"sample", "gap", "rate"};
  for (const auto& r : records) {
    const auto rates = r["rates"].get<std::vector<double>>();
    bool ok = true;
    for (std::size_t i = 1; i < order.size(); ++i) ok = ok && rates[order[i]] >= rates[order[i - 1]];
    monotone += ok;
    for (std::size_t i : order) t.rows.push_back({r["sample"].get<double>(), c.ct_gaps[i], rates[i]});
  }
  const double frac = records.empty() ? 0.0 : static_cast<double>(monotone) / records.size();
  v["samples"] = records.size();
  v["monotone_samples"] = monotone;
  v["monotone_fraction"] = frac;
  const auto free = free_ct_check(c.model.kappa, c.L);
  v["free_rate_measured"] = free.measured;
  v["free_rate_closed_form"] = free.closed_form;
  v["free_rate_relative_error"] = std::abs(free.measured - free.closed_form) / free.closed_form;
  s.series["rates"] = std::move(t);
  return s;
}

}  // namespace detail
}  // namespace mploc
