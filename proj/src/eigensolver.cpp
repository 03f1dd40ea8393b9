#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mploc/operator.hpp"

namespace mploc {

namespace {

SparseMatrix shifted(const SparseMatrix& h, double sigma) {
  SparseMatrix id(h.rows(), h.cols());
  id.setIdentity();
  SparseMatrix a = h - sigma * id;
  a.makeCompressed();
  return a;
}

double operator_scale(const SparseMatrix& h) {
  double s = 0.0;
  for (int k = 0; k < h.outerSize(); ++k) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(h, k); it; ++it) row += std::abs(it.value());
    s = std::max(s, row);
  }
  return std::max(s, 1.0);
}

SpectralData dense_window(const DiscretizedOperator& op, double lo, double hi, bool vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      op.dense(), vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw EigensolverError("dense eigensolver failed to converge");
  const auto& ev = es.eigenvalues();
  std::vector<Index> keep;
  for (Index i = 0; i < ev.size(); ++i)
    if (ev[i] >= lo && ev[i] <= hi) keep.push_back(i);
  SpectralData out;
  out.lo = lo;
  out.hi = hi;
  out.method = "dense";
  out.eigenvalues.resize(static_cast<Index>(keep.size()));
  if (vectors) out.eigenvectors.resize(op.size(), static_cast<Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    out.eigenvalues[static_cast<Index>(j)] = ev[keep[j]];
    if (vectors) out.eigenvectors.col(static_cast<Index>(j)) = es.eigenvectors().col(keep[j]);
  }
  return out;
}

struct RitzPair {
  double value;
  Eigen::VectorXd vector;
};

// Deflated shift-invert Lanczos: collects `want` eigenpairs of h accepted by
// `accept`, locking converged pairs and restarting orthogonally to them so
// that repeated eigenvalues are found one copy per restart.
template <class Accept>
std::vector<RitzPair> shift_invert_lanczos(const SparseMatrix& h, double sigma, Index want,
                                           Accept&& accept, std::uint64_t seed) {
  const Index n = h.rows();
  Eigen::SparseLU<SparseMatrix> lu;
  double shift = sigma;
  const double scale = operator_scale(h);
  for (int attempt = 0;; ++attempt) {
    lu.compute(shifted(h, shift));
    if (lu.info() == Eigen::Success) break;
    if (attempt > 4) throw EigensolverError("shift-invert factorization failed near sigma");
    shift += 1e-9 * scale * (attempt + 1);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<RitzPair> locked;
  const double tol = 1e-11;
  Index m_max = std::min<Index>(n, std::max<Index>(2 * want + 30, 60));
  int stalls = 0;

  auto orth_locked = [&](Eigen::VectorXd& v) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& p : locked) v -= p.vector.dot(v) * p.vector;
  };

  while (static_cast<Index>(locked.size()) < want) {
    const Index avail = n - static_cast<Index>(locked.size());
    if (avail <= 0) break;
    const Index m_cap = std::min(m_max, avail);
    Eigen::MatrixXd q(n, m_cap + 1);
    std::vector<double> alpha, beta;
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal(rng);
    orth_locked(v);
    v.normalize();
    q.col(0) = v;

    Index steps = 0;
    Eigen::VectorXd theta;
    Eigen::MatrixXd s;
    for (Index j = 0; j < m_cap; ++j) {
      Eigen::VectorXd w = lu.solve(Eigen::VectorXd(q.col(j)));
      const double a = q.col(j).dot(w);
      alpha.push_back(a);
      for (int pass = 0; pass < 2; ++pass) {
        w -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
        orth_locked(w);
      }
      const double b = w.norm();
      beta.push_back(b);
      steps = j + 1;

      const bool breakdown = b < 1e-13 * std::max(1.0, std::abs(a));
      const bool last = steps == m_cap;
      if (breakdown || last || steps % 5 == 0) {
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(steps, steps);
        for (Index i = 0; i < steps; ++i) {
          t(i, i) = alpha[static_cast<std::size_t>(i)];
          if (i + 1 < steps) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        theta = es.eigenvalues();
        s = es.eigenvectors();
        Index good = 0;
        for (Index i = 0; i < steps; ++i) {
          if (theta[i] == 0.0) continue;
          const double lam = shift + 1.0 / theta[i];
          if (std::abs(b * s(steps - 1, i)) <= tol * std::abs(theta[i]) && accept(lam)) ++good;
        }
        if (breakdown || last || good >= want - static_cast<Index>(locked.size())) break;
      }
      q.col(j + 1) = w / b;
    }

    // Ritz vectors of converged, accepted values; Rayleigh-refined and gated.
    std::size_t before = locked.size();
    const double beta_last = beta.back();
    for (Index i = 0; i < steps && static_cast<Index>(locked.size()) < want; ++i) {
      if (theta[i] == 0.0) continue;
      if (std::abs(beta_last * s(steps - 1, i)) > 1e-8 * std::abs(theta[i])) continue;
      if (!accept(shift + 1.0 / theta[i])) continue;
      Eigen::VectorXd y = q.leftCols(steps) * s.col(i);
      orth_locked(y);
      const double keep = y.norm();
      if (keep < 0.5) continue;
      y /= keep;
      const Eigen::VectorXd hy = h * y;
      const double lam = y.dot(hy);
      const double res = (hy - lam * y).norm();
      if (res > 1e-9 * std::max(1.0, std::abs(lam)) || !accept(lam)) continue;
      locked.push_back({lam, std::move(y)});
    }
    if (locked.size() == before) {
      if (++stalls > 6) {
        std::ostringstream os;
        os << "shift-invert Lanczos stalled: found " << locked.size() << " of " << want
           << " eigenpairs (sigma=" << sigma << ", krylov=" << m_max << ", n=" << n << ")";
        throw EigensolverError(os.str());
      }
      m_max = std::min<Index>(n, 2 * m_max);
    }
  }
  return locked;
}

}  // namespace

Index count_below(const SparseMatrix& h, double sigma) {
  const double scale = operator_scale(h);
  double s = sigma;
  for (int attempt = 0; attempt < 6; ++attempt) {
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted(h, s));
    if (ldlt.info() == Eigen::Success) {
      const auto& dvec = ldlt.vectorD();
      bool zero = false;
      Index neg = 0;
      for (Index i = 0; i < dvec.size(); ++i) {
        if (dvec[i] == 0.0 || !std::isfinite(dvec[i])) zero = true;
        if (dvec[i] < 0.0) ++neg;
      }
      if (!zero) return neg;
    }
    s = sigma + 1e-12 * scale * (attempt + 1);
  }
  throw EigensolverError("inertia count failed: H - sigma is numerically singular");
}

SpectralData full_spectrum(const DiscretizedOperator& op, bool vectors) {
  return dense_window(op, -std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity(), vectors);
}

SpectralData spectrum_window(const DiscretizedOperator& op, double lo, double hi, const WindowOptions& opts) {
  if (!(lo <= hi)) throw EigensolverError("empty spectral window");
  const Index n = op.size();
  const bool use_dense = opts.method == EigenMethod::dense ||
                         (opts.method == EigenMethod::automatic && n <= opts.dense_limit);
  if (use_dense) return dense_window(op, lo, hi, opts.vectors);

  const Index expected = count_below(op.matrix(), std::nextafter(hi, std::numeric_limits<double>::infinity())) -
                         count_below(op.matrix(), lo);
  SpectralData out;
  out.lo = lo;
  out.hi = hi;
  out.method = "shift-invert-lanczos";
  if (expected < 0) throw EigensolverError("inconsistent inertia counts");
  if (expected > 0) {
    auto pairs = shift_invert_lanczos(
        op.matrix(), 0.5 * (lo + hi), expected, [&](double lam) { return lam >= lo && lam <= hi; },
        opts.seed);
    if (static_cast<Index>(pairs.size()) != expected) {
      std::ostringstream os;
      os << "window solve found " << pairs.size() << " eigenpairs, inertia predicts " << expected;
      throw EigensolverError(os.str());
    }
    std::sort(pairs.begin(), pairs.end(), [](const RitzPair& a, const RitzPair& b) { return a.value < b.value; });
    out.eigenvalues.resize(expected);
    if (opts.vectors) out.eigenvectors.resize(n, expected);
    for (Index j = 0; j < expected; ++j) {
      out.eigenvalues[j] = pairs[static_cast<std::size_t>(j)].value;
      if (opts.vectors) out.eigenvectors.col(j) = pairs[static_cast<std::size_t>(j)].vector;
    }
  } else {
    out.eigenvalues.resize(0);
  }
  if (opts.cross_check && n <= opts.dense_limit) {
    const auto ref = dense_window(op, lo, hi, false);
    if (ref.count() != out.count()) {
      std::ostringstream os;
      os << "sparse window count " << out.count() << " disagrees with dense count " << ref.count();
      throw EigensolverError(os.str());
    }
  }
  return out;
}

double spectral_distance(const Eigen::VectorXd& ev, double E) {
  double d = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < ev.size(); ++i) d = std::min(d, std::abs(ev[i] - E));
  return d;
}

double spectral_distance(const DiscretizedOperator& op, double E) {
  const Index n = op.size();
  if (n <= 2000) return spectral_distance(full_spectrum(op, false).eigenvalues, E);
  auto pairs = shift_invert_lanczos(op.matrix(), E, 1, [](double) { return true; }, 0x5eedULL);
  double d = std::abs(pairs.front().value - E);
  // Certify: nothing strictly closer than d.
  const double inner = d * (1.0 - 1e-9);
  if (inner > 0.0) {
    const Index closer = count_below(op.matrix(), E + inner) - count_below(op.matrix(), E - inner);
    if (closer > 0) {
      WindowOptions o;
      o.method = EigenMethod::sparse;
      const auto w = spectrum_window(op, E - inner, E + inner, o);
      d = std::min(d, spectral_distance(w.eigenvalues, E));
    }
  }
  return d;
}

double max_residual(const DiscretizedOperator& op, const SpectralData& data) {
  double worst = 0.0;
  for (Index j = 0; j < data.eigenvectors.cols(); ++j) {
    const Eigen::VectorXd psi = data.eigenvectors.col(j);
    worst = std::max(worst, (op.matrix() * psi - data.eigenvalues[j] * psi).norm());
  }
  return worst;
}

}  // namespace mploc
