#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mploc/msa.hpp"

namespace mploc {

std::string to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::NS: return "NS";
    case VerdictKind::S: return "S";
    case VerdictKind::NR: return "NR";
    case VerdictKind::R: return "R";
    case VerdictKind::CNR: return "CNR";
    case VerdictKind::CR: return "CR";
    case VerdictKind::good: return "good";
    case VerdictKind::bad: return "bad";
  }
  return "?";
}

bool ns_holds(double dnorm, double m, int L, int config_dim, double C_geom) {
  const double threshold = std::exp(-m * L) / (C_geom * std::pow(3.0 * L, config_dim));
  return dnorm <= threshold;
}

PredicateVerdict ns_verdict(const CubeSpec& cube, double E, double m, double C_geom, double dn) {
  PredicateVerdict v;
  v.cube = cube;
  v.energy = E;
  v.parameter = m;
  v.witness = dn;
  v.threshold = std::exp(-m * cube.radius) / (C_geom * std::pow(3.0 * cube.radius, cube.config_dim()));
  if (!std::isfinite(dn)) {
    v.kind = VerdictKind::S;
    v.flagged = true;
    v.note = "resonant energy";
    return v;
  }
  v.kind = ns_holds(dn, m, cube.radius, cube.config_dim(), C_geom) ? VerdictKind::NS : VerdictKind::S;
  return v;
}

PredicateVerdict is_ns(const DiscretizedOperator& op, double E, double m, double C_geom) {
  double dn = std::numeric_limits<double>::infinity();
  try {
    dn = dnorm(op, E);
  } catch (const ResonantEnergy&) {
  }
  return ns_verdict(op.grid().cube(), E, m, C_geom, dn);
}

PredicateVerdict nr_verdict(const CubeSpec& cube, double E, double beta, double L_eff, double dist) {
  PredicateVerdict v;
  v.cube = cube;
  v.energy = E;
  v.parameter = beta;
  v.witness = dist;
  v.threshold = std::exp(-std::pow(L_eff, beta));
  v.kind = dist >= v.threshold ? VerdictKind::NR : VerdictKind::R;
  return v;
}

PredicateVerdict is_nr(const DiscretizedOperator& op, double E, double beta, double L_eff) {
  return nr_verdict(op.grid().cube(), E, beta, L_eff, spectral_distance(op, E));
}

std::vector<int> cnr_radii(int Lk, int Lk1, int cube_radius, int stride) {
  std::vector<int> out;
  const int hi = std::min(Lk1 - Lk, cube_radius);
  if (stride < 1) stride = 1;
  for (int l = Lk; l <= hi; l += stride) out.push_back(l);
  if (!out.empty() && out.back() != hi) out.push_back(hi);
  return out;
}

PredicateVerdict is_cnr(const DiscretizedOperator& op, double E, double beta, int Lk, int Lk1, int stride) {
  const CubeSpec& cube = op.grid().cube();
  PredicateVerdict v;
  v.cube = cube;
  v.energy = E;
  v.parameter = beta;
  v.stride = stride;
  v.threshold = std::exp(-std::pow(static_cast<double>(Lk1), beta));
  v.witness = std::numeric_limits<double>::infinity();
  const auto radii = cnr_radii(Lk, Lk1, cube.radius, stride);
  std::ostringstream failing;
  for (int l : radii) {
    const double dist = l == cube.radius ? spectral_distance(op, E)
                                         : spectral_distance(sub_operator(op, CubeSpec{cube.center, l}), E);
    v.witness = std::min(v.witness, dist);
    if (dist < v.threshold) failing << (failing.tellp() > 0 ? "," : "") << l;
  }
  v.kind = failing.tellp() > 0 ? VerdictKind::CR : VerdictKind::CNR;
  if (radii.empty()) {
    v.flagged = true;
    v.note = "no feasible radii";
  } else if (v.kind == VerdictKind::CR) {
    v.note = "resonant radii " + failing.str();
  }
  return v;
}

std::vector<LatticeConfig> subcube_centers(const CubeSpec& parent, int Lk, int stride) {
  const int R = parent.radius - Lk;
  if (R < 0) return {};
  if (stride < 1) stride = 1;
  std::vector<int> axis;
  for (int t = -R; t <= R; t += stride) axis.push_back(t);
  if (axis.back() != R) axis.push_back(R);
  const int n = parent.config_dim();
  std::vector<LatticeConfig> out;
  std::vector<std::size_t> pos(static_cast<std::size_t>(n), 0);
  while (true) {
    std::vector<int> c(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) c[k] = parent.center[k] + axis[pos[k]];
    out.emplace_back(std::move(c), parent.n_particles(), parent.dim());
    int k = n - 1;
    while (k >= 0 && pos[k] + 1 == axis.size()) pos[k--] = 0;
    if (k < 0) break;
    ++pos[k];
  }
  return out;
}

PredicateVerdict classify_good_bad(const CubeSpec& parent, int Lk, const std::vector<SubcubeVerdict>& subs,
                                   const ScaleParams& p, double E, int stride) {
  std::map<LatticeConfig, const SubcubeVerdict*> by_center;
  for (const auto& s : subs) by_center[s.center] = &s;
  const auto centers = subcube_centers(parent, Lk, stride);
  std::vector<const SubcubeVerdict*> ordered;
  std::vector<std::string> gaps;
  for (const auto& c : centers) {
    auto it = by_center.find(c);
    if (it == by_center.end())
      gaps.push_back(c.to_string());
    else
      ordered.push_back(it->second);
  }
  if (!gaps.empty()) {
    std::ostringstream os;
    os << "missing sub-cube verdicts (" << gaps.size() << "):";
    for (std::size_t i = 0; i < std::min<std::size_t>(gaps.size(), 8); ++i) os << " " << gaps[i];
    throw std::invalid_argument(os.str());
  }

  PredicateVerdict v;
  v.cube = parent;
  v.energy = E;
  v.stride = stride;
  v.kind = VerdictKind::good;
  for (const auto* s : ordered)
    if (s->weak && s->singular) v.offending.push_back(s->center);
  if (!v.offending.empty()) {
    v.kind = VerdictKind::bad;
    v.note = "weakly interactive singular sub-cube";
    v.witness = static_cast<double>(v.offending.size());
    return v;
  }
  const double sep = 9.0 * parent.n_particles() * std::pow(static_cast<double>(Lk), p.tau);
  std::vector<LatticeConfig> family;
  for (const auto* s : ordered) {
    if (!s->singular) continue;
    const bool far = std::all_of(family.begin(), family.end(), [&](const LatticeConfig& f) {
      return max_norm_dist(f, s->center) >= sep;
    });
    if (far) family.push_back(s->center);
  }
  v.witness = static_cast<double>(family.size());
  v.threshold = p.K + 1.0;
  if (static_cast<int>(family.size()) >= p.K + 1) {
    v.kind = VerdictKind::bad;
    v.note = "distant family of strongly interactive singular sub-cubes";
  }
  v.offending = std::move(family);
  return v;
}

std::vector<SubcubeVerdict> subcube_verdicts(const DiscretizedOperator& parent, double E, int Lk, int stride,
                                             double m, double tau, double C_geom) {
  std::vector<SubcubeVerdict> out;
  for (const auto& c : subcube_centers(parent.grid().cube(), Lk, stride)) {
    SubcubeVerdict s;
    s.center = c;
    const CubeSpec cube{c, Lk};
    s.weak = classify_interactivity(cube, tau).kind == Interactivity::weak;
    try {
      s.dnorm = dnorm(sub_operator(parent, cube), E);
      s.singular = !ns_holds(s.dnorm, m, Lk, cube.config_dim(), C_geom);
    } catch (const ResonantEnergy&) {
      s.resonant = true;
      s.singular = true;
      s.dnorm = std::numeric_limits<double>::infinity();
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace mploc
