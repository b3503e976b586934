#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>

#include "pcls/error.hpp"

namespace pcls {

/// Outcome of a positive-semidefiniteness test on a symmetric matrix.
struct PsdReport {
  bool pass = false;
  double min_eigenvalue = 0.0;
  double trace = 0.0;
};

namespace linalg {

inline Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigensolve(const Eigen::MatrixXd& m,
                                                                 bool vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      m, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("symmetric eigensolver did not converge");
  return es;
}

inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  return eigensolve(m, false).eigenvalues().minCoeff();
}

/// pass = (min eig >= -tol * |trace|). The trace normalization makes the
/// tolerance scale-free.
inline PsdReport psd_report(const Eigen::MatrixXd& m, double tol) {
  PsdReport r;
  r.trace = m.trace();
  r.min_eigenvalue = min_eigenvalue(m);
  r.pass = r.min_eigenvalue >= -tol * std::abs(r.trace);
  return r;
}

/// Square-root factor L with L L^T = V max(D,0) V^T. Works for semidefinite
/// matrices, where Cholesky would fail.
inline Eigen::MatrixXd sqrt_factor(const Eigen::MatrixXd& m) {
  const auto es = eigensolve(m, true);
  Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal();
}

/// Eigenvalue clipping at zero followed by re-symmetrization.
inline Eigen::MatrixXd clip_negative(const Eigen::MatrixXd& m) {
  const auto es = eigensolve(m, true);
  Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd r = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (r + r.transpose());
}

/// Pairwise (cascade) summation; the result depends only on the order of `x`.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t h = x.size() / 2;
  return pairwise_sum(x.first(h)) + pairwise_sum(x.subspan(h));
}

}  // namespace linalg
}  // namespace pcls
