#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <variant>

#include "mploc/operator.hpp"

namespace mploc {

namespace {

constexpr double kResonance = 1e-12;
constexpr Index kFactorLimit = 50000;

SparseMatrix shifted(const SparseMatrix& h, double E) {
  SparseMatrix id(h.rows(), h.cols());
  id.setIdentity();
  SparseMatrix a = h - E * id;
  a.makeCompressed();
  return a;
}

[[noreturn]] void resonant(double E, const std::string& detail) {
  std::ostringstream os;
  os << "resonant energy: E=" << E << " " << detail;
  throw ResonantEnergy(os.str());
}

}  // namespace

struct Resolvent::Impl {
  SparseMatrix a;
  double a_norm = 0.0;  // max absolute row sum
  std::variant<std::monostate, Eigen::SparseLU<SparseMatrix>,
               Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double>>>
      solver;
};

Resolvent::Resolvent(const DiscretizedOperator& op, double E) : impl_(std::make_unique<Impl>()), energy_(E) {
  const SparseMatrix& h = op.matrix();
  const Index inside = count_below(h, E + kResonance) - count_below(h, E - kResonance);
  if (inside > 0) resonant(E, "(an eigenvalue lies within 1e-12)");
  impl_->a = shifted(h, E);
  impl_->a_norm = (impl_->a.cwiseAbs() * Eigen::VectorXd::Ones(impl_->a.cols())).maxCoeff();
  if (op.size() <= kFactorLimit) {
    auto& lu = impl_->solver.emplace<Eigen::SparseLU<SparseMatrix>>();
    lu.compute(impl_->a);
    if (lu.info() != Eigen::Success) resonant(E, "(factorization of H - E failed)");
  } else {
    auto& it = impl_->solver.emplace<Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double>>>();
    it.setTolerance(1e-10);
    it.setMaxIterations(20 * static_cast<int>(std::sqrt(static_cast<double>(op.size()))) + 1000);
    it.compute(impl_->a);
  }
}

Resolvent::~Resolvent() = default;
Resolvent::Resolvent(Resolvent&&) noexcept = default;
Resolvent& Resolvent::operator=(Resolvent&&) noexcept = default;

Eigen::VectorXd Resolvent::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x;
  double res = 0.0;
  if (auto* lu = std::get_if<Eigen::SparseLU<SparseMatrix>>(&impl_->solver)) {
    x = lu->solve(rhs);
    res = (impl_->a * x - rhs).norm();
    // Near resonance x is large; refinement recovers digits lost to cancellation.
    for (int step = 0; step < 2 && res > 1e-12 * rhs.norm(); ++step) {
      x += lu->solve(rhs - impl_->a * x);
      res = (impl_->a * x - rhs).norm();
    }
  } else {
    auto& it = std::get<Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double>>>(impl_->solver);
    x = it.solve(rhs);
    if (it.info() != Eigen::Success) throw EigensolverError("iterative resolvent solve did not converge");
    res = (impl_->a * x - rhs).norm();
  }
  // Normwise backward error.
  const double scale = impl_->a_norm * x.norm() + rhs.norm();
  if (!(res <= 1e-10 * scale)) {
    std::ostringstream os;
    os << "resolvent identity residual " << res << " exceeds 1e-10 (|A||x| + |b|) = " << 1e-10 * scale;
    throw EigensolverError(os.str());
  }
  return x;
}

Eigen::MatrixXd Resolvent::columns(std::span<const Index> cols) const {
  const Index n = impl_->a.rows();
  Eigen::MatrixXd out(n, static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[cols[j]] = 1.0;
    out.col(static_cast<Index>(j)) = solve(e);
  }
  return out;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  // Largest eigenvalue of the smaller Gram matrix.
  const Eigen::MatrixXd gram = m.rows() >= m.cols() ? Eigen::MatrixXd(m.transpose() * m)
                                                    : Eigen::MatrixXd(m * m.transpose());
  if (gram.rows() == 1) return std::sqrt(gram(0, 0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double restricted_norm(const Eigen::MatrixXd& cols, std::span<const Index> rows) {
  Eigen::MatrixXd sub(static_cast<Index>(rows.size()), cols.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) sub.row(static_cast<Index>(i)) = cols.row(rows[i]);
  return spectral_norm(sub);
}

GreenProbe green_block(const DiscretizedOperator& op, double E, const LatticeConfig& x,
                       const LatticeConfig& y) {
  const auto cols = op.grid().cell_points(x);
  const auto rows = op.grid().cell_points(y);
  if (cols.empty() || rows.empty()) throw GeometryError("cell does not meet the grid");
  Resolvent g(op, E);
  return {E, x, y, restricted_norm(g.columns(cols), rows)};
}

double dnorm(const DiscretizedOperator& op, const Resolvent& g) {
  const auto cols = op.grid().center_cell_points();
  const auto rows = op.grid().belt_points();
  return restricted_norm(g.columns(cols), rows);
}

double dnorm(const DiscretizedOperator& op, double E) { return dnorm(op, Resolvent(op, E)); }

SpectralResolvent::SpectralResolvent(const DiscretizedOperator& op) {
  const auto spec = full_spectrum(op, true);
  values_ = spec.eigenvalues;
  vectors_ = spec.eigenvectors;
  const auto& grid = op.grid();
  const auto center = grid.center_cell_points();
  center_rows_.resize(values_.size(), static_cast<Index>(center.size()));
  for (std::size_t j = 0; j < center.size(); ++j)
    center_rows_.col(static_cast<Index>(j)) = vectors_.row(center[j]).transpose();

  std::vector<Index> belt;
  if (grid.cube().radius > 0) {
    for (const auto& y : boundary_set(grid.cube())) {
      std::vector<Index> pos;
      for (Index p : grid.cell_points(y)) {
        pos.push_back(static_cast<Index>(belt.size()));
        belt.push_back(p);
      }
      boundary_cells_.push_back(std::move(pos));
    }
  } else {
    belt = center;
    std::vector<Index> pos(center.size());
    for (std::size_t j = 0; j < pos.size(); ++j) pos[j] = static_cast<Index>(j);
    boundary_cells_.push_back(std::move(pos));
  }
  belt_rows_.resize(static_cast<Index>(belt.size()), values_.size());
  for (std::size_t i = 0; i < belt.size(); ++i) belt_rows_.row(static_cast<Index>(i)) = vectors_.row(belt[i]);
}

Eigen::VectorXd SpectralResolvent::inverse_gaps(double E) const {
  Eigen::VectorXd w(values_.size());
  for (Index k = 0; k < values_.size(); ++k) {
    const double gap = values_[k] - E;
    if (std::abs(gap) <= kResonance) resonant(E, "(an eigenvalue lies within 1e-12)");
    w[k] = 1.0 / gap;
  }
  return w;
}

double SpectralResolvent::block_norm(double E, std::span<const Index> rows, std::span<const Index> cols) const {
  const Eigen::VectorXd w = inverse_gaps(E);
  Eigen::MatrixXd vr(static_cast<Index>(rows.size()), values_.size());
  for (std::size_t i = 0; i < rows.size(); ++i) vr.row(static_cast<Index>(i)) = vectors_.row(rows[i]);
  Eigen::MatrixXd vc(values_.size(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    vc.col(static_cast<Index>(j)) = w.cwiseProduct(vectors_.row(cols[j]).transpose());
  return spectral_norm(vr * vc);
}

Eigen::MatrixXd SpectralResolvent::belt_block(double E) const {
  const Eigen::VectorXd w = inverse_gaps(E);
  return belt_rows_ * (w.asDiagonal() * center_rows_);
}

double SpectralResolvent::dnorm(double E) const { return spectral_norm(belt_block(E)); }

double SpectralResolvent::boundary_max(double E) const {
  const Eigen::MatrixXd m = belt_block(E);
  double best = 0.0;
  for (const auto& cell : boundary_cells_) best = std::max(best, restricted_norm(m, cell));
  return best;
}

}  // namespace mploc
