// Acceptance run: one PASS/FAIL line per criterion with the measured value,
// the tolerance and the wall time. Criteria can be selected by name
// (e.g. `acceptance C4 C12`); the exit status is nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "mploc/appendix.hpp"
#include "mploc/experiments.hpp"
#include "support.hpp"

using namespace mploc;
using namespace testing_support;

namespace {

struct Outcome {
  bool pass = false;
  std::string measured;
  std::string tolerance;
};

using Clock = std::chrono::steady_clock;

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

double value(const Summary& s, const std::string& key) {
  const auto& v = s.values.at(key);
  return v.is_null() ? std::nan("") : v.get<double>();
}

bool flag(const Summary& s, const std::string& key) { return s.values.at(key).get<bool>(); }

// Experiment summaries shared between criteria, computed on first use.
class Runs {
 public:
  const Summary& get(const std::string& name, const std::function<ExperimentConfig()>& make) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    const auto c = make();
    const auto t0 = Clock::now();
    Summary s = summarize(c, collect_samples(c, workers()));
    seconds_[name] = std::chrono::duration<double>(Clock::now() - t0).count();
    return cache_.emplace(name, std::move(s)).first->second;
  }
  double seconds(const std::string& name) const {
    auto it = seconds_.find(name);
    return it == seconds_.end() ? 0.0 : it->second;
  }

 private:
  std::map<std::string, Summary> cache_;
  std::map<std::string, double> seconds_;
};

Runs runs;

ExperimentConfig with_samples(const std::string& kind, long n) {
  auto c = default_config(kind);
  c.samples = n;
  return c;
}

const Summary& scaling_run() { return runs.get("scaling_step", [] { return with_samples("scaling_step", 300); }); }
const Summary& decay_run() { return runs.get("decay", [] { return with_samples("decay", 50); }); }

// ------------------------------------------------------------------ C1

int brute_sym_dist(std::vector<int> x, const std::vector<int>& y) {
  std::sort(x.begin(), x.end());
  int best = 1 << 30;
  do {
    int m = 0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
    best = std::min(best, m);
  } while (std::next_permutation(x.begin(), x.end()));
  return best;
}

Outcome geometry() {
  long checks = 0, failures = 0;
  auto expect = [&](bool ok) {
    ++checks;
    failures += !ok;
  };
  for (int n = 1; n <= 3; ++n)
    for (int L = 0; L <= 4; ++L) {
      const CubeSpec cube{LatticeConfig::zero(n, 1), L};
      expect(lattice_ball(cube).size() == static_cast<std::size_t>(std::pow(2 * L + 1, n)));
      if (L == 0) continue;
      // Belt cover at every supported mesh up to 4.
      const auto bset = boundary_set(cube);
      for (int mesh : {1, 2, 4}) {
        const GridSpec grid(cube, mesh);
        std::set<Index> belt;
        for (Index i : grid.belt_points()) belt.insert(i);
        for (Index i = 0; i < grid.size(); ++i) {
          const auto p = grid.position(i);
          // Cells are half-open: (y - 1/2, y + 1/2].
          const bool covered = std::any_of(bset.begin(), bset.end(), [&](const LatticeConfig& y) {
            for (std::size_t k = 0; k < p.size(); ++k)
              if (!(p[k] > y[k] - 0.5 && p[k] <= y[k] + 0.5)) return false;
            return true;
          });
          expect(covered == static_cast<bool>(belt.count(i)));
        }
      }
    }
  // sym_dist pseudometric on every triple of small configurations.
  for (int n = 1; n <= 3; ++n) {
    const auto pts = lattice_ball({LatticeConfig::zero(n, 1), n == 3 ? 1 : 2});
    for (const auto& x : pts)
      for (const auto& y : pts) {
        const int dxy = sym_dist(x, y);
        expect(dxy == brute_sym_dist(x.coords(), y.coords()) && dxy == sym_dist(y, x));
        for (const auto& z : pts) expect(sym_dist(x, z) <= dxy + sym_dist(y, z));
      }
  }
  // WI iff factorization, with the separation recomputed from the partition.
  auto wi_check = [&](const LatticeConfig& u, int L, double tau) {
    const CubeSpec cube{u, L};
    const bool weak = classify_interactivity(cube, tau).kind == Interactivity::weak;
    bool factored = false;
    try {
      const auto f = canonical_factorization(cube, tau);
      double gap = 1e300;
      for (int i : f.J)
        for (int j : f.J_c) gap = std::min(gap, std::max(0.0, std::abs(u[i] - u[j]) - (2.0 * L + 1.0)));
      factored = gap > std::pow(L, tau);
    } catch (const GeometryError&) {
    }
    expect(weak == factored);
  };
  for (int L = 1; L <= 4; ++L) {
    for (int a = -200; a <= 200; ++a)
      for (int b = -200; b <= 200; ++b) wi_check(cfg({a, b}), L, 2.0);
    // N = 3 up to translation.
    for (int b = -200; b <= 200; ++b)
      for (int c = -200; c <= 200; ++c) wi_check(cfg({0, b, c}), L, 2.0);
  }
  return {failures == 0, std::to_string(failures) + " failures in " + std::to_string(checks) + " checks", "0 failures"};
}

// ------------------------------------------------------------------ C2

Outcome operator_correctness() {
  double free_err = 0, window_err = 0, green_err = 0, min_ground = 1e300;
  long window_mismatch = 0;
  for (int mesh : {1, 2})
    for (int L : {1, 2, 3}) {
      OpSpec s;
      s.center = {0, 0};
      s.radius = L;
      s.mesh = mesh;
      s.g = 0.0;
      s.C_U = 0.0;
      const auto op = make_op(s);
      const int n = op.grid().points_per_axis();
      const double h = 1.0 / mesh;
      std::vector<double> one, all;
      for (int k = 1; k <= n; ++k) one.push_back(0.5 / (h * h) * (2 - 2 * std::cos(k * std::numbers::pi / (n + 1))));
      for (double a : one)
        for (double b : one) all.push_back(a + b);
      std::sort(all.begin(), all.end());
      const auto ev = full_spectrum(op, false).eigenvalues;
      for (Index i = 0; i < ev.size(); ++i) free_err = std::max(free_err, std::abs(ev[i] - all[static_cast<std::size_t>(i)]));
    }

  std::vector<OpSpec> cases;
  for (int i = 0; i < 3; ++i) {
    OpSpec s;
    s.index = static_cast<std::uint64_t>(i);
    s.radius = 4;
    s.mesh = 2;
    s.g = 8.0;
    cases.push_back(s);
  }
  OpSpec three;
  three.center = {0, 1, -1};
  three.radius = 2;
  cases.push_back(three);
  OpSpec big;
  big.radius = 10;
  big.mesh = 2;
  cases.push_back(big);  // 41^2 = 1681 points
  for (const auto& s : cases) {
    const auto op = make_op(s);
    const Eigen::VectorXd dense =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(op.dense(), Eigen::EigenvaluesOnly).eigenvalues();
    const double lo = dense[0] + 1.0, hi = dense[0] + 4.0;
    std::vector<double> want;
    for (Index i = 0; i < dense.size(); ++i)
      if (dense[i] >= lo && dense[i] <= hi) want.push_back(dense[i]);
    for (EigenMethod m : {EigenMethod::dense, EigenMethod::sparse}) {
      WindowOptions o;
      o.method = m;
      const auto w = spectrum_window(op, lo, hi, o);
      if (w.count() != static_cast<Index>(want.size())) {
        ++window_mismatch;
        continue;
      }
      for (Index i = 0; i < w.count(); ++i)
        window_err = std::max(window_err, std::abs(w.eigenvalues[i] - want[static_cast<std::size_t>(i)]));
    }
    if (op.size() > 700) continue;
    const double E = 0.5 * (dense[5] + dense[6]);
    const Eigen::MatrixXd G = dense_green(op, E);
    const auto& grid = op.grid();
    const auto center = grid.center_cell_points();
    const double dn = svd_norm(restrict(G, grid.belt_points(), center));
    green_err = std::max(green_err, std::abs(dnorm(op, E) - dn) / dn);
    for (const auto& y : boundary_set(grid.cube())) {
      const double oracle = svd_norm(restrict(G, grid.cell_points(y), center));
      const double got = green_block(op, E, grid.cube().center, y).block_norm;
      green_err = std::max(green_err, std::abs(got - oracle) / std::max(oracle, 1e-300));
    }
  }

  // Ground energies of 500 random samples at the default experiment model.
  const auto c = default_config("wegner");
  for (std::uint64_t i = 0; i < 500; ++i) {
    OpSpec s;
    s.radius = c.L;
    s.mesh = c.model.mesh_inverse;
    s.g = c.model.g;
    s.seed = 1000 + i;
    s.index = i;
    min_ground = std::min(min_ground, full_spectrum(make_op(s), false).eigenvalues[0]);
  }
  const bool ok = free_err <= 1e-10 && window_mismatch == 0 && window_err <= 1e-8 && green_err <= 1e-9 &&
                  min_ground >= -1e-10;
  return {ok,
          "free " + fmt(free_err, 2) + ", window " + fmt(window_err, 2) + " (" + std::to_string(window_mismatch) +
              " count mismatches), green/dnorm rel " + fmt(green_err, 2) + ", min ground " + fmt(min_ground, 6),
          "free <= 1e-10, window <= 1e-8, green <= 1e-9, ground >= -1e-10"};
}

// ------------------------------------------------------------------ C3

Outcome tensor_identity() {
  const CubeSpec cube{cfg({0, 100}), 2};
  const auto f = canonical_factorization(cube, 2.0);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> energy(0.0, 12.0);
  double worst = 0;
  int instances = 0;
  for (std::uint64_t i = 0; instances < 20; ++i) {
    auto disorder = std::make_shared<const DisorderSample>(sample_disorder(covering_box(cube, 1), 77, i, DensitySpec{}));
    ModelParams m;
    m.g = 4.0;
    const auto ni = assemble(GridSpec(cube, 2), disorder, noninteracting_model(m, f, 2));
    const auto parts = cluster_operators(ni, f);
    try {
      const auto rep = tensor_green(ni, parts.first, parts.second, f, energy(rng));
      worst = std::max({worst, rep.residual_first, rep.residual_second, rep.order_gap});
      ++instances;
    } catch (const ResonantEnergy&) {
    }
  }
  return {worst <= 1e-8, "max residual " + fmt(worst, 3) + " over " + std::to_string(instances) + " instances",
          "<= 1e-8 on 20 instances"};
}

// ------------------------------------------------------------------ C4, C5

Outcome wegner() {
  const auto& s = runs.get("wegner", [] { return default_config("wegner"); });
  const double slope = value(s, "wegner_slope");
  return {slope >= 0.8 && slope <= 1.2,
          "slope " + fmt(slope) + " (r2 " + fmt(value(s, "wegner_r2")) + ", " + fmt(value(s, "records"), 6) + " samples)",
          "slope in [0.8, 1.2]"};
}

Outcome evc2() {
  const auto& s = runs.get("evc2", [] { return with_samples("evc2", 32000); });
  const auto c = default_config("evc2");
  const double slope = value(s, "evc2_slope");
  const bool distant = cubes_distant(cube_center(c), second_center(c), c.L, 4.0 * c.model.N);
  const auto shared = s.values.at("shared_driving_sites").get<long>();
  return {slope >= 0.8 && slope <= 1.2 && shared == 0 && distant,
          "slope " + fmt(slope) + " (r2 " + fmt(value(s, "evc2_r2")) + "), shared driving sites " +
              std::to_string(shared) + ", 4NL-distant " + (distant ? "yes" : "no"),
          "slope in [0.8, 1.2], disjoint amplitude sets"};
}

// ------------------------------------------------------------------ C6

Outcome srcm() {
  const auto& s = runs.get("srcm", [] { return with_samples("srcm", 200000); });
  const double err = value(s, "q2_max_relative_error");
  const double slope = value(s, "linearity_slope");
  return {flag(s, "q2_within_10pct") && slope >= 0.8 && slope <= 1.2,
          "|Q|=2 max relative error " + fmt(err, 3) + ", linearity slope " + fmt(slope),
          "error <= 0.10 for |delta| <= 0.8, slope in [0.8, 1.2]"};
}

// ------------------------------------------------------------------ C7, C9

Outcome gri_soundness() {
  const auto& s = scaling_run();
  const long n = s.values.at("gri_instances").get<long>();
  const long sound = s.values.at("gri_sound").get<long>();
  return {n >= 200 && sound == n,
          std::to_string(sound) + "/" + std::to_string(n) + " sound, max direct/bound " +
              fmt(value(s, "gri_max_direct_over_bound")),
          ">= 200 instances, 100% sound"};
}

Outcome scaling_census() {
  const auto& s = scaling_run();
  const long premises = s.values.at("premise_true").get<long>();
  const long counter = s.values.at("counterexamples").get<long>();
  return {premises >= 200 && counter == 0,
          std::to_string(counter) + " counterexamples in " + std::to_string(premises) + " premise-true instances (" +
              fmt(value(s, "records"), 6) + " sampled)",
          ">= 200 premise-true, 0 counterexamples"};
}

// ------------------------------------------------------------------ C8

Outcome edi() {
  const auto& s = decay_run();
  const long pairs = s.values.at("edi_pairs").get<long>();
  const long bad = s.values.at("edi_violations").get<long>();
  return {pairs >= 500 && bad == 0,
          std::to_string(bad) + " violations in " + std::to_string(pairs) + " pairs, " +
              std::to_string(s.values.at("edi_skipped_resonant").get<long>()) + " resonant skips, max ratio " +
              fmt(value(s, "edi_max_ratio")),
          ">= 500 pairs, 0 violations"};
}

// ------------------------------------------------------------------ C10

Outcome combes_thomas() {
  const auto& s = runs.get("ct", [] { return default_config("ct"); });
  const double frac = value(s, "monotone_fraction");
  const double err = value(s, "free_rate_relative_error");
  return {frac >= 0.95 && err <= 0.10,
          "monotone fraction " + fmt(frac) + " of " + fmt(value(s, "records"), 6) + ", free-rate error " + fmt(err, 3),
          "fraction >= 0.95, error <= 0.10"};
}

// ------------------------------------------------------------------ C11

Outcome decay_monotonicity() {
  const auto& s = decay_run();
  const auto& ils = runs.get("ils", [] { return default_config("ils"); });
  std::string medians, estars;
  for (const auto& g : s.values.at("per_g")) medians += (medians.empty() ? "" : ", ") + fmt(g.at("median_rate").get<double>(), 3);
  for (const auto& g : ils.values.at("per_g")) estars += (estars.empty() ? "" : ", ") + fmt(g.at("E_star_measured").get<double>(), 3);
  const double r2 = value(s, "largest_g_r2_fraction");
  return {flag(s, "median_rate_nondecreasing") && r2 >= 0.8 && flag(ils, "E_star_nondecreasing"),
          "median rates [" + medians + "], R2>=0.9 fraction at g=16 " + fmt(r2, 3) + ", E*_g [" + estars + "]",
          "nondecreasing medians, fraction >= 0.8, nondecreasing E*_g"};
}

// ------------------------------------------------------------------ C12

Outcome parameters() {
  ScaleParams ok;
  bool pass = validate_params(ok).ok && validate_params(ok).rows.size() == 9;
  struct Broken {
    std::function<void(ScaleParams&)> edit;
    std::string row;
  };
  const std::vector<Broken> broken = {{[](ScaleParams& p) { p.tau = 1.0; }, "tau > max(1/zeta, 1)"},
                                      {[](ScaleParams& p) { p.alpha = 4; }, "alpha > 2 tau"},
                                      {[](ScaleParams& p) { p.K = 23; }, "K + 1 > 4 alpha"}};
  int named = 0;
  for (const auto& b : broken) {
    ScaleParams p;
    b.edit(p);
    const auto r = validate_params(p);
    for (const auto& row : r.rows)
      if (row.name == b.row && !row.pass && !r.ok) ++named;
  }
  pass = pass && named == 3;
  bool identity = true;
  for (ExponentBase base : {ExponentBase::two_alpha, ExponentBase::four_alpha}) {
    ScaleParams p;
    p.base = base;
    for (int n = 1; n <= p.N_star; ++n)
      for (int k = 0; k < 40; ++k) identity = identity && 4 * exponent(p, n, k) == 2 * exponent(p, n, k + 1);
  }
  return {pass && identity,
          std::string("passing tuple ") + (validate_params(ok).ok ? "passes" : "fails") + ", failing tuples named " +
              std::to_string(named) + "/3, exponent identity " + (identity ? "exact" : "broken"),
          "all rows pass; 3/3 failures named; exact identity"};
}

// ------------------------------------------------------------------ C13

Outcome reproducibility() {
  long compared = 0, differing = 0;
  for (const auto& kind : experiment_kinds()) {
    auto c = default_config(kind);
    c.samples = kind == "scaling_step" || kind == "decay" ? 3 : 16;
    auto dump = [&](int threads) {
      std::string out;
      for (const auto& r : collect_samples(c, threads)) out += r.dump() + "\n";
      return out;
    };
    const auto one = dump(1);
    differing += one != dump(8);
    differing += one != dump(1);
    compared += 2;
  }
  return {differing == 0, std::to_string(differing) + " differing of " + std::to_string(compared) + " comparisons",
          "bit-identical records"};
}

struct Criterion {
  std::string id;
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
  std::vector<std::string> shared;  // cached runs whose time counts here
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {"C1", "geometry oracles", 60, geometry, {}},
      {"C2", "operator correctness", 300, operator_correctness, {}},
      {"C3", "tensor identity", 120, tensor_identity, {}},
      {"C4", "Wegner scaling", 900, wegner, {}},
      {"C5", "two-volume EVC scaling", 900, evc2, {}},
      {"C6", "SRCM density and linearity", 600, srcm, {}},
      {"C7", "GRI soundness", 600, gri_soundness, {"scaling_step"}},
      {"C8", "EDI", 600, edi, {"decay"}},
      {"C9", "scaling-step census", 1200, scaling_census, {"scaling_step"}},
      {"C10", "Combes-Thomas", 300, combes_thomas, {}},
      {"C11", "decay and g-monotonicity", 1800, decay_monotonicity, {"decay"}},
      {"C12", "parameter engine", 1, parameters, {}},
      {"C13", "reproducibility", 300, reproducibility, {}},
  };
  std::set<std::string> wanted(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what(), "-"};
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    // A cached run counts in full against every criterion that uses it.
    for (const auto& name : c.shared)
      if (secs < runs.seconds(name)) secs += runs.seconds(name);
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%-4s %-4s %-27s | %s | tolerance: %s | %.1f s (limit %.0f s)\n", c.id.c_str(), pass ? "PASS" : "FAIL",
                c.name.c_str(), o.measured.c_str(), o.tolerance.c_str(), secs, c.limit_seconds);
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
