#pragma once

// Seeded Monte-Carlo experiments over disorder. Every experiment is a pure
// per-sample function of (config, sample index) plus a summary computed from
// the records alone, so runs are reproducible and reports regenerable.

#include <json.hpp>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "mploc/msa.hpp"
#include "mploc/stats.hpp"

namespace mploc {

using Json = nlohmann::json;
using Record = nlohmann::ordered_json;

struct ModelConfig {
  int d = 1;
  int N = 2;
  double g = 8.0;
  double kappa = 0.5;
  int mesh_inverse = 2;
  int fold = 1;
  double c_V = 1.0;
  std::string density = "uniform";
  double density_rate = 0.0;
  double C_U = 1.0;
  double zeta = 1.0;
  double truncation = std::numeric_limits<double>::infinity();
};

struct ExperimentConfig {
  std::string kind = "wegner";
  std::uint64_t seed = 1;
  long samples = 2000;
  ModelConfig model;
  ScaleParams scale;
  bool paper_faithful = false;  // scale section is a toy tuple unless set

  int L = 4;                         // cube radius
  std::vector<int> center;           // empty: origin
  std::vector<int> other_center;     // second cube (evc2, fe_to_ei); empty: center + (4NL, ..., 4NL)
  double E_star = 4.0;               // window I* = [0, E*]
  double energy = 3.0;               // probe energy E
  std::vector<double> s_grid;        // strictly positive, sorted
  std::vector<double> g_sweep;       // ils, decay

  int q_size = 2;                    // srcm
  double srcm_bin = 0.1;             // width of spread bins
  double srcm_window = 0.1;          // s for the density estimate

  int grid_points = 2048;            // ils / fe_to_ei energy grid
  double resolution = 0.0;           // requested max spacing (0: |I*| / grid_points)
  double a_L = 1e-3;                 // fe_to_ei exceedance threshold
  double b = 0.05;                   // fe_to_ei measure cutoff

  int k = 0;                         // scaling_step scale index
  double C_geom = 1.0;
  int stride = 0;                    // 0: default stride
  int toy_ratio = 0;

  int max_eigenpairs = 4;            // decay
  int edi_radius = 2;
  int edi_stride = 3;
  int wi_resamples = 4;              // wi_prob
  std::vector<double> ct_gaps;       // ct
};

const std::vector<std::string>& experiment_kinds();

/// Defaults for a kind; every knob is filled in.
ExperimentConfig default_config(const std::string& kind);

/// Overlays a JSON document on the kind's defaults. Unknown keys and
/// ill-typed values throw ConfigError naming the key.
ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& c);
void validate_config(const ExperimentConfig& c);

/// Scale section with every core key required (for the validate command).
ScaleParams scale_params_from_json(const Json& j, bool require_all);
Json scale_params_to_json(const ScaleParams& p);

/// 64-bit FNV-1a digest of the canonical dump of the resolved config.
std::string config_digest(const Json& resolved);

ModelParams model_params(const ModelConfig& m);
DensitySpec density_spec(const ModelConfig& m);
LatticeConfig cube_center(const ExperimentConfig& c);
LatticeConfig second_center(const ExperimentConfig& c);

struct SeriesTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Summary {
  nlohmann::ordered_json values;
  std::map<std::string, SeriesTable> series;
};

Record run_sample(const ExperimentConfig& c, long index);
Summary summarize(const ExperimentConfig& c, const std::vector<Record>& records);

/// Runs samples [0, samples) on `threads` workers; `sink` sees records in
/// sample order. Throws on the first failing sample after flushing the
/// records before it.
void run_samples(const ExperimentConfig& c, int threads, const std::function<void(Record&&)>& sink);

std::vector<Record> collect_samples(const ExperimentConfig& c, int threads);

// Deterministic checks reported alongside the experiments.

/// Number of sites driving both cubes (zero for disjoint projections).
std::size_t shared_driving_sites(const CubeSpec& a, const CubeSpec& b, int fold);

/// Decay rate of the free one-particle operator at E = -1 (h = 1) together
/// with the closed-form value.
struct FreeCtCheck {
  double measured = 0.0;
  double closed_form = 0.0;
};
FreeCtCheck free_ct_check(double kappa, int L);

/// ||H psi - lambda psi|| <= tol with psi of unit norm.
bool passes_eigen_gate(const DiscretizedOperator& op, double lambda, const Eigen::VectorXd& psi, double tol = 1e-8);

/// Exponential fit of a cell profile: log of the largest cell norm at each
/// distance, over distances >= 1 whose norm exceeds the noise floor.
/// Distances are sym_dist from the peak cell, or max-norm from `origin`.
struct DecayFit {
  LatticeConfig peak;
  LinearFit fit;
  double rate() const { return -fit.slope; }
};
constexpr double kNoiseFloor = 1e-13;
DecayFit fit_decay(const std::vector<CellNorm>& profile, const LatticeConfig& origin, bool peak_relative);

}  // namespace mploc
