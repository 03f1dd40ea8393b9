#include "experiment_support.hpp"

#include <algorithm>
#include <cmath>

namespace mploc::detail {

std::shared_ptr<const DisorderSample> disorder_for(const ExperimentConfig& c, const SiteBox& region, long index) {
  return std::make_shared<const DisorderSample>(
      sample_disorder(region, c.seed, static_cast<std::uint64_t>(index), density_spec(c.model)));
}

DiscretizedOperator build(const ExperimentConfig& c, const CubeSpec& cube,
                          std::shared_ptr<const DisorderSample> disorder, double g) {
  ModelParams m = model_params(c.model);
  m.g = g;
  return assemble(GridSpec(cube, c.model.mesh_inverse), std::move(disorder), m);
}

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double as_double(const Record& v) {
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  return v.get<double>();
}

std::vector<double> window(const Eigen::VectorXd& ev, double lo, double hi) {
  std::vector<double> out;
  for (Index i = 0; i < ev.size(); ++i)
    if (ev[i] >= lo && ev[i] <= hi) out.push_back(ev[i]);
  return out;
}

void s_curve(const ExperimentConfig& c, const std::vector<double>& dists, Summary& out, const std::string& name) {
  const long n = static_cast<long>(dists.size());
  const double volume = std::pow(static_cast<double>(c.L), c.model.N * c.model.d);
  SeriesTable curve;
  curve.columns = {"s", "p", "wilson_lo", "wilson_hi", "hits"};
  std::vector<double> xs, ys, ws;
  std::vector<long> hits_at;
  double implied = 0.0;
  long total_hits = 0;
  double saturated = std::nan("");
  for (double s : c.s_grid) {
    const long hits = std::count_if(dists.begin(), dists.end(), [&](double d) { return d <= s; });
    const double p = n > 0 ? static_cast<double>(hits) / n : 0.0;
    const auto wi = wilson_interval(hits, n);
    curve.rows.push_back({s, p, wi.lo, wi.hi, static_cast<double>(hits)});
    hits_at.push_back(hits);
    total_hits += hits;
    if (hits > 0) implied = std::max(implied, p / (volume * s));
    if (hits == n && std::isnan(saturated)) saturated = s;
    if (hits > 0 && hits < n) {
      xs.push_back(std::log(s));
      ys.push_back(std::log(p));
      ws.push_back(static_cast<double>(hits));
    }
  }
  auto& v = out.values;
  v[name + "_samples"] = n;
  v[name + "_under_resolved"] = total_hits == 0;
  if (total_hits == 0) v[name + "_advice"] = "no hits on the s-grid: increase s or the disorder strength";
  if (xs.size() >= 2 && xs.front() != xs.back()) {
    const auto f = fit_line(xs, ys, ws);
    v[name + "_slope"] = f.slope;
    v[name + "_intercept"] = f.intercept;
    v[name + "_r2"] = f.r2;
    v[name + "_fit_points"] = f.points;
    SeriesTable loglog;
    loglog.columns = {"log_s", "log_p", "fit_log_p"};
    for (std::size_t i = 0; i < xs.size(); ++i) loglog.rows.push_back({xs[i], ys[i], f.intercept + f.slope * xs[i]});
    out.series[name + "_loglog"] = std::move(loglog);
  } else {
    v[name + "_slope"] = nullptr;
  }
  v[name + "_implied_constant"] = implied;
  v[name + "_saturation_s"] = num(saturated);
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  for (std::size_t i = 0; i + 1 < c.s_grid.size(); ++i) {
    const double ratio_s = c.s_grid[i + 1] / c.s_grid[i];
    if (std::abs(ratio_s - 2.0) > 0.01 || hits_at[i + 1] == 0 || hits_at[i + 1] == n) continue;
    const double r = static_cast<double>(hits_at[i]) / static_cast<double>(hits_at[i + 1]);
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  v[name + "_halving_ratio_min"] = num(rmin);
  v[name + "_halving_ratio_max"] = num(rmax > 0 ? rmax : std::nan(""));
  out.series[name + "_curve"] = std::move(curve);
}

}  // namespace mploc::detail
