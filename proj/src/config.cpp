#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "mploc/experiments.hpp"

namespace mploc {

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {"wegner", "evc2",          "srcm",  "ils", "wi_prob",
                                                 "fe_to_ei", "scaling_step", "decay", "ct"};
  return kinds;
}

namespace {

ScaleParams toy_scale() {
  ScaleParams p;
  p.zeta = 1.0;
  p.tau = 1.0;
  p.beta = 0.1;
  p.alpha = 2;
  p.K = 0;
  p.P_star = 1.0;
  p.m_star = 0.5;
  p.L0 = 4;
  p.N_star = 2;
  p.d = 1;
  return p;
}

std::vector<double> halving_grid() { return {1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2, 3.2e-2, 6.4e-2, 1e-1}; }

template <class T>
void read(const Json& obj, const char* key, T& out, std::set<std::string>& seen, const std::string& prefix = "") {
  seen.insert(key);
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("key '" + prefix + key + "': wrong type");
  }
}

void read_double(const Json& obj, const char* key, double& out, std::set<std::string>& seen,
                 const std::string& prefix = "") {
  seen.insert(key);
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (it->is_null()) {
    out = std::numeric_limits<double>::infinity();
    return;
  }
  if (!it->is_number()) throw ConfigError("key '" + prefix + key + "': expected a number");
  out = it->get<double>();
}

void reject_unknown(const Json& obj, const std::set<std::string>& seen, const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!seen.count(it.key())) throw ConfigError("unknown key '" + prefix + it.key() + "'");
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

ExperimentConfig default_config(const std::string& kind) {
  if (std::find(experiment_kinds().begin(), experiment_kinds().end(), kind) == experiment_kinds().end())
    throw ConfigError("unknown experiment kind '" + kind + "'");
  ExperimentConfig c;
  c.kind = kind;
  c.scale = toy_scale();
  c.s_grid = halving_grid();
  c.g_sweep = {1.0, 4.0, 16.0};
  c.ct_gaps = {0.5, 1.0, 2.0};
  if (kind == "wegner") {
    c.samples = 2000;
    c.L = 4;
    c.E_star = 8.0;
    c.energy = 4.0;
  } else if (kind == "evc2") {
    c.samples = 2000;
    c.L = 2;
    c.E_star = 5.0;
  } else if (kind == "srcm") {
    c.samples = 2000;
    c.s_grid = {1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2, 3.2e-2};
  } else if (kind == "ils") {
    c.samples = 500;
    c.L = c.scale.L0;
    c.E_star = 8.0;
    c.grid_points = 32;
  } else if (kind == "wi_prob") {
    c.samples = 200;
    c.L = 4;
    c.center = {0, 30};
    c.energy = 2.0;
  } else if (kind == "fe_to_ei") {
    c.samples = 500;
    c.L = 3;
    c.E_star = 5.5;
    c.a_L = 1.0;
    c.b = 0.2;
  } else if (kind == "scaling_step") {
    c.samples = 200;
    c.model.g = 16.0;
    c.model.mesh_inverse = 1;
    c.L = static_cast<int>(scale(c.scale, 1));
    c.energy = 2.0;
  } else if (kind == "decay") {
    c.samples = 50;
    c.L = 12;
    c.model.mesh_inverse = 1;
    c.E_star = 60.0;
  } else if (kind == "ct") {
    c.samples = 100;
    c.L = 6;
    c.model.mesh_inverse = 1;
  }
  return c;
}

ScaleParams scale_params_from_json(const Json& j, bool require_all) {
  if (!j.is_object()) throw ConfigError("scale section must be an object");
  static const char* core[] = {"zeta", "tau", "beta", "alpha", "K", "P_star", "m_star", "L0", "N_star", "d"};
  if (require_all)
    for (const char* k : core)
      if (!j.contains(k)) throw ConfigError(std::string("missing key 'scale.") + k + "'");
  ScaleParams p = toy_scale();
  std::set<std::string> seen{"paper_faithful"};
  const std::string pre = "scale.";
  read_double(j, "zeta", p.zeta, seen, pre);
  read_double(j, "tau", p.tau, seen, pre);
  read_double(j, "beta", p.beta, seen, pre);
  read(j, "alpha", p.alpha, seen, pre);
  read(j, "K", p.K, seen, pre);
  read_double(j, "P_star", p.P_star, seen, pre);
  read_double(j, "m_star", p.m_star, seen, pre);
  read(j, "L0", p.L0, seen, pre);
  read(j, "N_star", p.N_star, seen, pre);
  read(j, "d", p.d, seen, pre);
  read_double(j, "delta", p.delta, seen, pre);
  std::string base = to_string(p.base);
  read(j, "exponent_base", base, seen, pre);
  try {
    p.base = exponent_base_from_string(base);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("key 'scale.exponent_base': ") + e.what());
  }
  reject_unknown(j, seen, pre);
  return p;
}

Json scale_params_to_json(const ScaleParams& p) {
  return Json{{"zeta", p.zeta},     {"tau", p.tau},       {"beta", p.beta},     {"alpha", p.alpha},
              {"K", p.K},           {"P_star", p.P_star}, {"m_star", p.m_star}, {"L0", p.L0},
              {"N_star", p.N_star}, {"d", p.d},           {"exponent_base", to_string(p.base)},
              {"delta", p.delta}};
}

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError("missing key 'kind'");
  ExperimentConfig c = default_config(j["kind"].get<std::string>());
  std::set<std::string> seen{"kind"};
  read(j, "seed", c.seed, seen);
  read(j, "samples", c.samples, seen);
  seen.insert("model");
  if (j.contains("model")) {
    const Json& m = j["model"];
    if (!m.is_object()) throw ConfigError("key 'model': expected an object");
    std::set<std::string> ms;
    const std::string pre = "model.";
    read(m, "d", c.model.d, ms, pre);
    read(m, "N", c.model.N, ms, pre);
    read_double(m, "g", c.model.g, ms, pre);
    read_double(m, "kappa", c.model.kappa, ms, pre);
    read(m, "mesh_inverse", c.model.mesh_inverse, ms, pre);
    read(m, "fold", c.model.fold, ms, pre);
    read_double(m, "c_V", c.model.c_V, ms, pre);
    read(m, "density", c.model.density, ms, pre);
    read_double(m, "density_rate", c.model.density_rate, ms, pre);
    read_double(m, "C_U", c.model.C_U, ms, pre);
    read_double(m, "zeta", c.model.zeta, ms, pre);
    read_double(m, "truncation", c.model.truncation, ms, pre);
    reject_unknown(m, ms, pre);
  }
  seen.insert("scale");
  if (j.contains("scale")) {
    const Json& s = j["scale"];
    c.scale = scale_params_from_json(s, false);
    if (s.contains("paper_faithful")) {
      if (!s["paper_faithful"].is_boolean()) throw ConfigError("key 'scale.paper_faithful': expected a boolean");
      c.paper_faithful = s["paper_faithful"].get<bool>();
    }
  }
  read(j, "L", c.L, seen);
  read(j, "center", c.center, seen);
  read(j, "other_center", c.other_center, seen);
  read_double(j, "E_star", c.E_star, seen);
  read_double(j, "energy", c.energy, seen);
  read(j, "s_grid", c.s_grid, seen);
  read(j, "g_sweep", c.g_sweep, seen);
  read(j, "q_size", c.q_size, seen);
  read_double(j, "srcm_bin", c.srcm_bin, seen);
  read_double(j, "srcm_window", c.srcm_window, seen);
  read(j, "grid_points", c.grid_points, seen);
  read_double(j, "resolution", c.resolution, seen);
  read_double(j, "a_L", c.a_L, seen);
  read_double(j, "b", c.b, seen);
  read(j, "k", c.k, seen);
  read_double(j, "C_geom", c.C_geom, seen);
  read(j, "stride", c.stride, seen);
  read(j, "toy_ratio", c.toy_ratio, seen);
  read(j, "max_eigenpairs", c.max_eigenpairs, seen);
  read(j, "edi_radius", c.edi_radius, seen);
  read(j, "edi_stride", c.edi_stride, seen);
  read(j, "wi_resamples", c.wi_resamples, seen);
  read(j, "ct_gaps", c.ct_gaps, seen);
  reject_unknown(j, seen, "");
  validate_config(c);
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  Json scale = scale_params_to_json(c.scale);
  scale["paper_faithful"] = c.paper_faithful;
  const auto& m = c.model;
  return Json{{"kind", c.kind},
              {"seed", c.seed},
              {"samples", c.samples},
              {"model",
               {{"d", m.d},
                {"N", m.N},
                {"g", m.g},
                {"kappa", m.kappa},
                {"mesh_inverse", m.mesh_inverse},
                {"fold", m.fold},
                {"c_V", m.c_V},
                {"density", m.density},
                {"density_rate", m.density_rate},
                {"C_U", m.C_U},
                {"zeta", m.zeta},
                {"truncation", finite_or_null(m.truncation)}}},
              {"scale", scale},
              {"L", c.L},
              {"center", c.center},
              {"other_center", c.other_center},
              {"E_star", c.E_star},
              {"energy", c.energy},
              {"s_grid", c.s_grid},
              {"g_sweep", c.g_sweep},
              {"q_size", c.q_size},
              {"srcm_bin", c.srcm_bin},
              {"srcm_window", c.srcm_window},
              {"grid_points", c.grid_points},
              {"resolution", c.resolution},
              {"a_L", c.a_L},
              {"b", c.b},
              {"k", c.k},
              {"C_geom", c.C_geom},
              {"stride", c.stride},
              {"toy_ratio", c.toy_ratio},
              {"max_eigenpairs", c.max_eigenpairs},
              {"edi_radius", c.edi_radius},
              {"edi_stride", c.edi_stride},
              {"wi_resamples", c.wi_resamples},
              {"ct_gaps", c.ct_gaps}};
}

void validate_config(const ExperimentConfig& c) {
  const auto& m = c.model;
  if (c.samples < 1) throw ConfigError("samples must be >= 1");
  if (m.d < 1) throw ConfigError("model.d must be >= 1");
  if (m.N < 1 || m.N > 4) throw ConfigError("model.N must be in 1..4");
  if (m.mesh_inverse < 1 || m.mesh_inverse > 16) throw ConfigError("model.mesh_inverse must be in 1..16");
  if (m.fold < 1) throw ConfigError("model.fold must be >= 1");
  if (c.L < 1) throw ConfigError("L must be >= 1");
  const std::size_t nd = static_cast<std::size_t>(m.N * m.d);
  if (!c.center.empty() && c.center.size() != nd) throw ConfigError("center must have N*d entries");
  if (!c.other_center.empty() && c.other_center.size() != nd) throw ConfigError("other_center must have N*d entries");
  if (!(c.E_star > 0)) throw ConfigError("E_star must be positive");
  if (c.s_grid.empty()) throw ConfigError("s_grid must not be empty");
  for (std::size_t i = 0; i < c.s_grid.size(); ++i) {
    if (!(c.s_grid[i] > 0)) throw ConfigError("s_grid entries must be positive");
    if (i > 0 && !(c.s_grid[i] > c.s_grid[i - 1])) throw ConfigError("s_grid must be strictly increasing");
  }
  if (c.q_size < 2 || c.q_size > 4) throw ConfigError("q_size must be in 2..4");
  if (c.grid_points < 2) throw ConfigError("grid_points must be >= 2");
  if (c.resolution < 0) throw ConfigError("resolution must be >= 0");
  if (!(c.a_L > 0) || !(c.b > 0)) throw ConfigError("a_L and b must be positive");
  if (c.max_eigenpairs < 1) throw ConfigError("max_eigenpairs must be >= 1");
  if (c.edi_radius < 0 || c.edi_stride < 1) throw ConfigError("edi_radius >= 0 and edi_stride >= 1 required");
  if (c.wi_resamples < 1) throw ConfigError("wi_resamples must be >= 1");
  if (c.C_geom <= 0) throw ConfigError("C_geom must be positive");
  density_spec(m).validate();
  model_params(m).interaction.validate();
  if (!(m.kappa > 0)) throw ConfigError("model.kappa must be positive");
  if (m.g < 0) throw ConfigError("model.g must be >= 0");
  for (double g : c.g_sweep)
    if (g < 0) throw ConfigError("g_sweep entries must be >= 0");
  for (double gap : c.ct_gaps)
    if (!(gap > 0)) throw ConfigError("ct_gaps entries must lie strictly below the ground energy (gap > 0)");
}

std::string config_digest(const Json& resolved) {
  const std::string text = resolved.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ModelParams model_params(const ModelConfig& m) {
  ModelParams p;
  p.kappa = m.kappa;
  p.g = m.g;
  p.fold = m.fold;
  p.interaction.C_U = m.C_U;
  p.interaction.zeta = m.zeta;
  p.interaction.truncation_radius = m.truncation;
  return p;
}

DensitySpec density_spec(const ModelConfig& m) {
  DensitySpec d;
  d.kind = density_kind_from_string(m.density);
  d.c_V = m.c_V;
  d.rate = m.density_rate;
  return d;
}

LatticeConfig cube_center(const ExperimentConfig& c) {
  if (c.center.empty()) return LatticeConfig::zero(c.model.N, c.model.d);
  return LatticeConfig(c.center, c.model.N, c.model.d);
}

LatticeConfig second_center(const ExperimentConfig& c) {
  if (!c.other_center.empty()) return LatticeConfig(c.other_center, c.model.N, c.model.d);
  // Every coordinate shifted: the one-particle projections, and so the
  // driving sites, of the two cubes are disjoint.
  LatticeConfig y = cube_center(c);
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += 4 * c.model.N * c.L;
  return y;
}

}  // namespace mploc
