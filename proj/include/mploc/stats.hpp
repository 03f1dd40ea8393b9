#pragma once

// Small statistics helpers used by the experiments: least-squares lines,
// binomial confidence intervals, medians.

#include <span>
#include <vector>

namespace mploc {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
};

/// Weighted least squares y ~ a + b x; empty weights mean unit weights.
/// Needs two distinct abscissae.
LinearFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> w = {});

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double half_width() const { return 0.5 * (hi - lo); }
};

/// Wilson score interval for k successes in n trials (z = 1.96 default).
Interval wilson_interval(long k, long n, double z = 1.96);

double median(std::vector<double> v);
double mean(std::span<const double> v);

}  // namespace mploc
