#pragma once

// Small builders shared by the unit tests.

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "mploc/operator.hpp"

namespace testing_support {

using namespace mploc;

inline LatticeConfig cfg(std::vector<int> coords, int dim = 1) {
  const int n = static_cast<int>(coords.size()) / dim;
  return LatticeConfig(std::move(coords), n, dim);
}

struct OpSpec {
  std::vector<int> center{0, 0};
  int radius = 2;
  int mesh = 1;
  double g = 4.0;
  double kappa = 0.5;
  double C_U = 1.0;
  std::uint64_t seed = 11;
  std::uint64_t index = 0;
  int dim = 1;
};

inline DiscretizedOperator make_op(const OpSpec& s) {
  const CubeSpec cube{cfg(s.center, s.dim), s.radius};
  DensitySpec density;
  auto disorder = std::make_shared<const DisorderSample>(sample_disorder(covering_box(cube, 1), s.seed, s.index, density));
  ModelParams m;
  m.kappa = s.kappa;
  m.g = s.g;
  m.interaction.C_U = s.C_U;
  return assemble(GridSpec(cube, s.mesh), disorder, m);
}

/// Dense inverse of H - E.
inline Eigen::MatrixXd dense_green(const DiscretizedOperator& op, double E) {
  Eigen::MatrixXd a = op.dense();
  a.diagonal().array() -= E;
  return a.inverse();
}

inline Eigen::MatrixXd restrict(const Eigen::MatrixXd& m, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(static_cast<Index>(i), static_cast<Index>(j)) = m(rows[i], cols[j]);
  return out;
}

/// Largest singular value by a full SVD.
inline double svd_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

}  // namespace testing_support
