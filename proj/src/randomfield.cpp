#include "mploc/randomfield.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mploc {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ counter);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::uint64_t hash_key(std::span<const int> key) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (int k : key) h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(k)));
  return h;
}

// ---------------------------------------------------------------- densities

std::string to_string(DensityKind k) {
  return k == DensityKind::uniform ? "uniform" : "truncated_exponential";
}

DensityKind density_kind_from_string(const std::string& s) {
  if (s == "uniform") return DensityKind::uniform;
  if (s == "truncated_exponential") return DensityKind::truncated_exponential;
  throw ConfigError("unknown density '" + s + "' (expected uniform or truncated_exponential)");
}

void DensitySpec::validate() const {
  if (!(c_V > 0.0) || !std::isfinite(c_V))
    throw ConfigError("density support [0, c_V] needs finite c_V > 0");
  if (kind == DensityKind::truncated_exponential) {
    if (!std::isfinite(rate)) throw ConfigError("density log-derivative is unbounded");
    if (rate < 0.0)
      throw ConfigError("density log-derivative p'/p = rate must be >= 0 on (0, c_V)");
    if (rate * c_V > 700.0) throw ConfigError("density is numerically unbounded (rate * c_V > 700)");
  }
}

double DensitySpec::pdf(double t) const {
  if (t < 0.0 || t > c_V) return 0.0;
  if (kind == DensityKind::uniform || rate == 0.0) return 1.0 / c_V;
  return rate * std::exp(rate * t) / std::expm1(rate * c_V);
}

double DensitySpec::p_lower() const { return pdf(0.0); }
double DensitySpec::p_upper() const { return pdf(c_V); }

double DensitySpec::mean() const {
  if (kind == DensityKind::uniform || rate == 0.0) return 0.5 * c_V;
  const double a = rate * c_V;
  return c_V / -std::expm1(-a) - 1.0 / rate;
}

double DensitySpec::variance() const {
  if (kind == DensityKind::uniform || rate == 0.0) return c_V * c_V / 12.0;
  const double a = rate * c_V;
  // Var = 1/rate^2 - c_V^2 e^a / (e^a - 1)^2
  const double e = std::expm1(a);
  return 1.0 / (rate * rate) - c_V * c_V * (e + 1.0) / (e * e);
}

double DensitySpec::inverse_cdf(double u) const {
  if (kind == DensityKind::uniform || rate == 0.0) return u * c_V;
  return std::log1p(u * std::expm1(rate * c_V)) / rate;
}

// ---------------------------------------------------------------- site boxes

std::size_t SiteBox::size() const {
  std::size_t n = 1;
  for (std::size_t k = 0; k < lo.size(); ++k)
    n *= static_cast<std::size_t>(std::max(0, hi[k] - lo[k] + 1));
  return n;
}

bool SiteBox::contains(std::span<const int> site) const {
  for (std::size_t k = 0; k < lo.size(); ++k)
    if (site[k] < lo[k] || site[k] > hi[k]) return false;
  return true;
}

std::size_t SiteBox::index(std::span<const int> site) const {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < lo.size(); ++k)
    idx = idx * static_cast<std::size_t>(hi[k] - lo[k] + 1) + static_cast<std::size_t>(site[k] - lo[k]);
  return idx;
}

std::vector<int> SiteBox::site(std::size_t index) const {
  std::vector<int> s(lo.size());
  for (std::size_t k = lo.size(); k-- > 0;) {
    const auto w = static_cast<std::size_t>(hi[k] - lo[k] + 1);
    s[k] = lo[k] + static_cast<int>(index % w);
    index /= w;
  }
  return s;
}

SiteBox box_union(const SiteBox& a, const SiteBox& b) {
  if (a.dim() != b.dim()) throw ConfigError("site boxes differ in dimension");
  SiteBox u = a;
  for (int k = 0; k < a.dim(); ++k) {
    u.lo[k] = std::min(a.lo[k], b.lo[k]);
    u.hi[k] = std::max(a.hi[k], b.hi[k]);
  }
  return u;
}

// ---------------------------------------------------------------- disorder

double DisorderSample::amplitude(std::span<const int> site) const {
  if (!region.contains(site)) throw ConfigError("site outside the disorder region");
  return amplitudes[region.index(site)];
}

double& DisorderSample::amplitude_ref(std::span<const int> site) {
  if (!region.contains(site)) throw ConfigError("site outside the disorder region");
  return amplitudes[region.index(site)];
}

DisorderSample sample_disorder(const SiteBox& region, std::uint64_t seed,
                               std::uint64_t sample_index, const DensitySpec& density) {
  density.validate();
  DisorderSample s;
  s.region = region;
  s.seed = seed;
  s.sample_index = sample_index;
  s.density = density;
  s.amplitudes.resize(region.size());
  for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
    const auto site = region.site(i);
    s.amplitudes[i] = density.inverse_cdf(counter_uniform(seed, sample_index, hash_key(site)));
  }
  return s;
}

void resample_sites(DisorderSample& sample, std::span<const std::vector<int>> sites,
                    std::uint64_t new_index) {
  for (const auto& site : sites)
    sample.amplitude_ref(site) =
        sample.density.inverse_cdf(counter_uniform(sample.seed, new_index, hash_key(site)));
}

double alloy_potential(std::span<const double> x, const DisorderSample& sample, int fold) {
  if (fold < 1) throw ConfigError("tiling fold must be >= 1");
  const int d = sample.region.dim();
  if (static_cast<int>(x.size()) != d) throw ConfigError("point dimension differs from the region");
  // x - a in (-n/2, n/2]  <=>  a in [x - n/2, x + n/2)
  std::vector<int> lo(d), hi(d);
  for (int k = 0; k < d; ++k) {
    lo[k] = static_cast<int>(std::ceil(x[k] - 0.5 * fold));
    hi[k] = static_cast<int>(std::ceil(x[k] + 0.5 * fold)) - 1;
    if (lo[k] < sample.region.lo[k] || hi[k] > sample.region.hi[k])
      throw ConfigError("uncovered point");
  }
  double v = 0.0;
  std::vector<int> a = lo;
  while (true) {
    v += sample.amplitudes[sample.region.index(a)];
    int k = d - 1;
    while (k >= 0 && a[k] == hi[k]) {
      a[k] = lo[k];
      --k;
    }
    if (k < 0) break;
    ++a[k];
  }
  return v;
}

SiteBox covering_box(const CubeSpec& cube, int fold) {
  const int d = cube.dim();
  SiteBox b;
  b.lo.assign(d, 0);
  b.hi.assign(d, 0);
  // a in (u - L - (n+1)/2, u + L + (n+1)/2), open on both sides
  const double reach = cube.radius + 0.5 * (fold + 1);
  for (int k = 0; k < d; ++k) {
    int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
    for (int i = 0; i < cube.n_particles(); ++i) {
      const int u = cube.center.particle(i)[k];
      lo = std::min(lo, static_cast<int>(std::floor(u - reach)) + 1);
      hi = std::max(hi, static_cast<int>(std::ceil(u + reach)) - 1);
    }
    b.lo[k] = lo;
    b.hi[k] = hi;
  }
  return b;
}

std::vector<std::vector<int>> driving_sites(const CubeSpec& cube, int fold) {
  const int d = cube.dim();
  const double reach = cube.radius + 0.5 * (fold + 1);
  std::set<std::vector<int>> sites;
  for (int i = 0; i < cube.n_particles(); ++i) {
    const auto u = cube.center.particle(i);
    std::vector<int> lo(d), hi(d);
    for (int k = 0; k < d; ++k) {
      lo[k] = static_cast<int>(std::floor(u[k] - reach)) + 1;
      hi[k] = static_cast<int>(std::ceil(u[k] + reach)) - 1;
    }
    SiteBox box{lo, hi};
    for (std::size_t j = 0; j < box.size(); ++j) sites.insert(box.site(j));
  }
  return {sites.begin(), sites.end()};
}

// ---------------------------------------------------------------- interaction

void InteractionSpec::validate() const {
  if (!(C_U >= 0.0) || !std::isfinite(C_U)) throw ConfigError("interaction needs finite C_U >= 0");
  if (!(zeta > 0.0 && zeta <= 1.0)) throw ConfigError("interaction exponent zeta must lie in (0, 1]");
  if (!(truncation_radius > 0.0)) throw ConfigError("truncation radius must be positive");
}

double InteractionSpec::potential(double r) const {
  if (r > truncation_radius) return 0.0;
  return C_U * std::exp(-std::pow(r, zeta));
}

double interaction_energy(std::span<const double> positions, int dim, const InteractionSpec& spec) {
  const std::size_t n = positions.size() / static_cast<std::size_t>(dim);
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double r = 0.0;
      for (int k = 0; k < dim; ++k)
        r = std::max(r, std::abs(positions[i * dim + k] - positions[j * dim + k]));
      e += spec.potential(r);
    }
  return e;
}

SrcmSample srcm_statistics(std::span<const double> values) {
  if (values.empty()) throw ConfigError("SRCM statistics need a nonempty site set");
  SrcmSample s;
  s.values.assign(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.xi = sum / static_cast<double>(values.size());
  s.eta.reserve(values.size());
  for (double v : values) s.eta.push_back(v - s.xi);
  return s;
}

}  // namespace mploc
