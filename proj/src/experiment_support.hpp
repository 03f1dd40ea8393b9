#pragma once

// Helpers shared by the experiment sources.

#include <memory>
#include <string>
#include <vector>

#include "mploc/experiments.hpp"
#include "mploc/stats.hpp"

namespace mploc::detail {

/// Disorder on `region` for the given sample index.
std::shared_ptr<const DisorderSample> disorder_for(const ExperimentConfig& c, const SiteBox& region, long index);

DiscretizedOperator build(const ExperimentConfig& c, const CubeSpec& cube,
                          std::shared_ptr<const DisorderSample> disorder, double g);

/// Non-finite values are stored as null.
Json num(double v);
double as_double(const Record& v);

/// Eigenvalues within [lo, hi].
std::vector<double> window(const Eigen::VectorXd& ev, double lo, double hi);

/// P(d <= s) over the s-grid with Wilson intervals, weighted log-log fit and
/// halving ratios; appends values and a series named `name`.
void s_curve(const ExperimentConfig& c, const std::vector<double>& dists, Summary& out, const std::string& name);

Record wegner_sample(const ExperimentConfig& c, long index);
Summary wegner_summary(const ExperimentConfig& c, const std::vector<Record>& records);
Record evc2_sample(const ExperimentConfig& c, long index);
Summary evc2_summary(const ExperimentConfig& c, const std::vector<Record>& records);
Record fe_to_ei_sample(const ExperimentConfig& c, long index);
Summary fe_to_ei_summary(const ExperimentConfig& c, const std::vector<Record>& records);
Record srcm_sample(const ExperimentConfig& c, long index);
Summary srcm_summary(const ExperimentConfig& c, const std::vector<Record>& records);
Record ils_sample(const ExperimentConfig& c, long index);
Summary ils_summary(const ExperimentConfig& c, const std::vector<Record>& records);
Record wi_prob_sample(const ExperimentConfig& c, long index);
Summary wi_prob_summary(const ExperimentConfig& c, const std::vector<Record>& records);
Record scaling_step_sample(const ExperimentConfig& c, long index);
Summary scaling_step_summary(const ExperimentConfig& c, const std::vector<Record>& records);
Record decay_sample(const ExperimentConfig& c, long index);
Summary decay_summary(const ExperimentConfig& c, const std::vector<Record>& records);
Record ct_sample(const ExperimentConfig& c, long index);
Summary ct_summary(const ExperimentConfig& c, const std::vector<Record>& records);

}  // namespace mploc::detail
