#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mploc/msa.hpp"

namespace mploc {

std::string to_string(ExponentBase b) { return b == ExponentBase::two_alpha ? "two_alpha" : "four_alpha"; }

ExponentBase exponent_base_from_string(const std::string& s) {
  if (s == "two_alpha") return ExponentBase::two_alpha;
  if (s == "four_alpha") return ExponentBase::four_alpha;
  throw std::invalid_argument("unknown exponent base '" + s + "' (expected two_alpha or four_alpha)");
}

namespace {

double table_mass(const ScaleParams& p, int n) {
  return p.m_star * std::pow(1.0 + 3.0 * std::pow(p.L0, -1.0 + p.beta), p.N_star - n);
}

double table_exponent(const ScaleParams& p, int n, int k) {
  return std::ldexp(p.P_star * std::pow(4.0 * p.alpha, p.N_star - n), k);
}

void check_particle_count(const ScaleParams& p, int n) {
  if (n < 1 || n > p.N_star) throw std::out_of_range("particle number outside 1..N*");
}

}  // namespace

ParamsReport validate_params(const ScaleParams& p) {
  ParamsReport r;
  auto row = [&](std::string name, std::string rel, double lhs, double rhs, bool pass) {
    r.rows.push_back({std::move(name), std::move(rel), lhs, rhs, pass});
  };
  const double tau_rhs = std::max(1.0 / p.zeta, 1.0);
  row("tau > max(1/zeta, 1)", ">", p.tau, tau_rhs, p.tau > tau_rhs);
  row("alpha > 2 tau", ">", p.alpha, 2.0 * p.tau, p.alpha > 2.0 * p.tau);
  const double beta_rhs = std::min({0.25, p.zeta, 7.0 / (8.0 * p.alpha)});
  row("0 < beta < min(1/4, zeta, 7/(8 alpha))", "<", p.beta, beta_rhs, p.beta > 0.0 && p.beta < beta_rhs);
  row("K + 1 > 4 alpha", ">", p.K + 1.0, 4.0 * p.alpha, p.K + 1.0 > 4.0 * p.alpha);

  const double m_lhs = p.N_star >= 1 ? mass(p, 1) : 0.0;
  const double m_rhs = p.N_star >= 1 ? table_mass(p, 1) : 0.0;
  row("m_N = m* (1 + 3 L0^(-1+beta))^(N*-N)", "=", m_lhs, m_rhs,
      std::abs(m_lhs - m_rhs) <= 1e-12 * std::max(1.0, std::abs(m_rhs)));
  const double m_floor = std::pow(p.L0, -0.5);
  row("m* >= L0^(-1/2)", ">=", p.m_star, m_floor, p.m_star >= m_floor);

  const double p_lhs = p.N_star >= 1 ? exponent(p, 1, 0) : 0.0;
  const double p_rhs = p.N_star >= 1 ? table_exponent(p, 1, 0) : 0.0;
  row("P(N,k) = 2^k P* (4 alpha)^(N*-N)", "=", p_lhs, p_rhs, p_lhs == p_rhs);
  const double pstar_rhs = 4.0 * p.N_star * p.d * p.alpha;
  row("P* > 4 N* d alpha", ">", p.P_star, pstar_rhs, p.P_star > pstar_rhs);

  double need = 0.0;
  double smallest = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= p.N_star; ++n) {
    need = std::max(need, std::max(4.0 * n * p.d, 2.0 * n * p.d * p.alpha));
    smallest = std::min(smallest, exponent(p, n, 0));
  }
  row("P(N) >= P* > max(4Nd, 2Nd alpha) for 1 <= N <= N*", ">", p.P_star, need,
      p.N_star >= 1 && smallest >= p.P_star && p.P_star > need);

  r.ok = std::all_of(r.rows.begin(), r.rows.end(), [](const ConstraintRow& c) { return c.pass; });
  return r;
}

boost::multiprecision::cpp_int scale_exact(const ScaleParams& p, int k) {
  using boost::multiprecision::cpp_int;
  if (k < 0) throw std::out_of_range("negative scale index");
  if (p.L0 < 1 || p.alpha < 1) throw std::invalid_argument("scales need L0 >= 1 and alpha >= 1");
  cpp_int power = boost::multiprecision::pow(cpp_int(p.alpha), static_cast<unsigned>(k));
  if (power > 1000000) throw std::overflow_error("L_k has more than a million digits");
  return boost::multiprecision::pow(cpp_int(p.L0), power.convert_to<unsigned>());
}

long long scale(const ScaleParams& p, int k) {
  const auto v = scale_exact(p, k);
  if (v > std::numeric_limits<long long>::max()) throw std::overflow_error("L_k does not fit in 64 bits");
  return v.convert_to<long long>();
}

double mass(const ScaleParams& p, int n) {
  check_particle_count(p, n);
  return p.m_star * std::pow(1.0 + 3.0 * std::pow(p.L0, -p.delta + p.beta), p.N_star - n);
}

double exponent(const ScaleParams& p, int n, int k) {
  check_particle_count(p, n);
  if (k < 0) throw std::out_of_range("negative scale index");
  const double base = (p.base == ExponentBase::four_alpha ? 4.0 : 2.0) * p.alpha;
  return std::ldexp(p.P_star * std::pow(base, p.N_star - n), k);
}

int default_stride(int Lk) { return Lk <= 4 ? 1 : Lk / 4; }

}  // namespace mploc
