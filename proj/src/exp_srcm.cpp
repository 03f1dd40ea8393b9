#include <algorithm>
#include <cmath>

#include "experiment_support.hpp"

namespace mploc::detail {

namespace {

constexpr int kMaxQ = 4;
constexpr long kMinBin = 30;

struct Conditioned {
  double xi = 0.0;
  double mu = 0.0;  // midpoint of the conditional support of xi given eta
  double spread = 0.0;
};

Conditioned condition(std::span<const double> values, double c_V) {
  const auto st = srcm_statistics(values);
  const auto [lo, hi] = std::minmax_element(st.eta.begin(), st.eta.end());
  return {st.xi, 0.5 * (-*lo + c_V - *hi), *hi - *lo};
}

std::vector<Conditioned> unpack(const std::vector<Record>& records, int q) {
  std::vector<Conditioned> out;
  out.reserve(records.size());
  const std::size_t i = static_cast<std::size_t>(q - 2);
  for (const auto& r : records)
    out.push_back({r["xi"][i].get<double>(), r["mu"][i].get<double>(), r["spread"][i].get<double>()});
  return out;
}

}  // namespace

Record srcm_sample(const ExperimentConfig& c, long index) {
  const auto density = density_spec(c.model);
  std::vector<double> v(kMaxQ);
  for (int j = 0; j < kMaxQ; ++j)
    v[j] = density.inverse_cdf(counter_uniform(c.seed, static_cast<std::uint64_t>(index), static_cast<std::uint64_t>(j)));
  Record r;
  r["sample"] = index;
  std::vector<double> xi, mu, spread;
  for (int q = 2; q <= kMaxQ; ++q) {
    const auto k = condition(std::span<const double>(v.data(), static_cast<std::size_t>(q)), c.model.c_V);
    xi.push_back(k.xi);
    mu.push_back(k.mu);
    spread.push_back(k.spread);
  }
  r["xi"] = xi;
  r["mu"] = mu;
  r["spread"] = spread;
  return r;
}

Summary srcm_summary(const ExperimentConfig& c, const std::vector<Record>& records) {
  Summary s;
  auto& v = s.values;
  const double cv = c.model.c_V;
  const double w = c.srcm_window;
  const double width = c.srcm_bin * cv;
  const int bins = static_cast<int>(std::floor(0.8 / c.srcm_bin + 1e-9));
  v["window_s"] = w;
  v["bin_width"] = width;
  v["uniform_density"] = c.model.density == "uniform";

  std::vector<double> log_q, log_peak;
  for (int q = 2; q <= kMaxQ; ++q) {
    const auto data = unpack(records, q);
    SeriesTable t;
    t.columns = {"spread_center", "samples", "hits", "density", "wilson_lo", "wilson_hi", "oracle"};
    int skipped = 0;
    double worst = 0.0, peak = 0.0;
    for (int b = 0; b < bins; ++b) {
      const double lo = b * width, hi = (b + 1) * width, mid = 0.5 * (lo + hi);
      long n = 0, hits = 0;
      for (const auto& d : data) {
        if (d.spread < lo || d.spread >= hi) continue;
        ++n;
        hits += std::abs(d.xi - d.mu) <= 0.5 * w;
      }
      if (n < kMinBin) {
        ++skipped;
        continue;
      }
      const auto wi = wilson_interval(hits, n);
      const double est = static_cast<double>(hits) / (n * w);
      const double oracle = 1.0 / (cv - mid);
      peak = std::max(peak, est);
      if (q == 2) worst = std::max(worst, std::abs(est - oracle) / oracle);
      t.rows.push_back({mid, static_cast<double>(n), static_cast<double>(hits), est, wi.lo / w, wi.hi / w,
                        q == 2 ? oracle : std::nan("")});
    }
    const std::string key = "q" + std::to_string(q);
    v[key + "_bins_skipped"] = skipped;
    v[key + "_peak_density"] = peak;
    if (q == 2) {
      v["q2_max_relative_error"] = worst;
      v["q2_within_10pct"] = skipped == 0 && worst <= 0.10;
    }
    if (peak > 0) {
      log_q.push_back(std::log(q));
      log_peak.push_back(std::log(peak));
    }
    s.series[key + "_density"] = std::move(t);
  }
  if (log_q.size() >= 2) v["q_exponent"] = fit_line(log_q, log_peak).slope;
  v["q_exponent_reference"] = 2.0;

  // Conditional probability of xi in [mu, mu + s] over the bulk bins.
  const auto data = unpack(records, c.q_size);
  long n = 0;
  for (const auto& d : data) n += d.spread < bins * width;
  SeriesTable curve;
  curve.columns = {"s", "p", "wilson_lo", "wilson_hi"};
  std::vector<double> xs, ys, ws;
  for (double sv : c.s_grid) {
    long hits = 0;
    for (const auto& d : data)
      if (d.spread < bins * width && d.xi >= d.mu && d.xi <= d.mu + sv) ++hits;
    const auto wi = wilson_interval(hits, n);
    const double p = n > 0 ? static_cast<double>(hits) / n : 0.0;
    curve.rows.push_back({sv, p, wi.lo, wi.hi});
    if (hits > 0 && hits < n) {
      xs.push_back(std::log(sv));
      ys.push_back(std::log(p));
      ws.push_back(static_cast<double>(hits));
    }
  }
  v["q_size"] = c.q_size;
  v["linearity_samples"] = n;
  if (xs.size() >= 2) {
    const auto f = fit_line(xs, ys, ws);
    v["linearity_slope"] = f.slope;
    v["linearity_r2"] = f.r2;
  } else {
    v["linearity_slope"] = nullptr;
  }
  s.series["linearity"] = std::move(curve);
  return s;
}

}  // namespace mploc::detail
