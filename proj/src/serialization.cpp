#include "mploc/serialization.hpp"

#include <charconv>
#include <cmath>

namespace mploc {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json disorder_to_json(const DisorderSample& s) {
  return Json{{"region", {{"lo", s.region.lo}, {"hi", s.region.hi}}},
              {"seed", s.seed},
              {"sample_index", s.sample_index},
              {"density", {{"kind", to_string(s.density.kind)}, {"c_V", s.density.c_V}, {"rate", s.density.rate}}},
              {"amplitudes", s.amplitudes}};
}

DisorderSample disorder_from_json(const Json& j) {
  DisorderSample s;
  try {
    s.region.lo = j.at("region").at("lo").get<std::vector<int>>();
    s.region.hi = j.at("region").at("hi").get<std::vector<int>>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.sample_index = j.at("sample_index").get<std::uint64_t>();
    const auto& d = j.at("density");
    s.density.kind = density_kind_from_string(d.at("kind").get<std::string>());
    s.density.c_V = d.at("c_V").get<double>();
    s.density.rate = d.at("rate").get<double>();
    s.amplitudes = j.at("amplitudes").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("disorder sample: ") + e.what());
  }
  if (s.region.lo.size() != s.region.hi.size() || s.amplitudes.size() != s.region.size())
    throw ConfigError("disorder sample: amplitude count does not match the region");
  return s;
}

Json verdict_to_json(const PredicateVerdict& v) {
  Json off = Json::array();
  for (const auto& x : v.offending) off.push_back(x.coords());
  auto finite = [](double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); };
  return Json{{"kind", to_string(v.kind)},
              {"cube", {{"center", v.cube.center.coords()}, {"radius", v.cube.radius}}},
              {"scale", v.scale},
              {"energy", v.energy},
              {"parameter", v.parameter},
              {"witness", finite(v.witness)},
              {"threshold", finite(v.threshold)},
              {"flagged", v.flagged},
              {"stride", v.stride},
              {"offending", off},
              {"note", v.note}};
}

void write_verdict_line(std::ostream& os, const PredicateVerdict& v) { os << verdict_to_json(v).dump() << '\n'; }

void write_operator_csv(std::ostream& os, const DiscretizedOperator& op) {
  os << "row,col,value\n";
  const auto& m = op.matrix();
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      os << it.row() << ',' << it.col() << ',' << format_double(it.value()) << '\n';
}

Json operator_to_json(const DiscretizedOperator& op) {
  const auto& g = op.grid();
  Json rows = Json::array(), cols = Json::array(), vals = Json::array();
  const auto& m = op.matrix();
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      rows.push_back(it.row());
      cols.push_back(it.col());
      vals.push_back(it.value());
    }
  std::vector<double> pot(op.potential().data(), op.potential().data() + op.potential().size());
  return Json{{"cube", {{"center", g.cube().center.coords()}, {"radius", g.cube().radius}}},
              {"n_particles", g.cube().n_particles()},
              {"dim", g.cube().dim()},
              {"mesh_inverse", g.mesh_inverse()},
              {"size", g.size()},
              {"kappa", op.model().kappa},
              {"g", op.model().g},
              {"potential", pot},
              {"rows", rows},
              {"cols", cols},
              {"values", vals}};
}

Json spectrum_to_json(const SpectralData& s) {
  std::vector<double> ev(s.eigenvalues.data(), s.eigenvalues.data() + s.eigenvalues.size());
  Json j{{"lo", s.lo}, {"hi", s.hi}, {"method", s.method}, {"eigenvalues", ev}};
  if (s.has_vectors()) {
    Json vecs = Json::array();
    for (Index c = 0; c < s.eigenvectors.cols(); ++c) {
      const Eigen::VectorXd v = s.eigenvectors.col(c);
      vecs.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    }
    j["eigenvectors"] = std::move(vecs);
  }
  return j;
}

void flatten(const Json& value, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (value.is_object()) {
    for (auto it = value.begin(); it != value.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (value.is_array()) {
    for (std::size_t i = 0; i < value.size(); ++i) flatten(value[i], prefix + "." + std::to_string(i), out);
  } else if (value.is_string()) {
    out.emplace_back(prefix, value.get<std::string>());
  } else if (value.is_number_float()) {
    out.emplace_back(prefix, format_double(value.get<double>()));
  } else {
    out.emplace_back(prefix, value.dump());
  }
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

}  // namespace

void write_summary_csv(std::ostream& os, const Json& values) {
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(values, "", rows);
  os << "key,value\n";
  for (const auto& [k, v] : rows) os << csv_field(k) << ',' << csv_field(v) << '\n';
}

void write_series_tsv(std::ostream& os, const SeriesTable& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "\t" : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "\t" : "") << format_double(row[i]);
    os << '\n';
  }
}

}  // namespace mploc
