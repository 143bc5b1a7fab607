#pragma once

#include <Eigen/Dense>

namespace larrr {

struct JitteredCholesky {
  Eigen::MatrixXd L;  // lower factor of C + jitter I
  double jitter = 0.0;
};

/// Cholesky of C + base_jitter I. On failure retries with an extra
/// 1e-12, 1e-11, ..., 1e-8 times trace(C)/N on the diagonal; throws
/// NumericalError when all attempts fail.
JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& C, double base_jitter);

/// R (n x rank) with K ~= R R^T by diagonal pivoting. Stops once the largest
/// remaining diagonal falls below n * eps * max diag(K) (or rel_tol * max
/// diag when rel_tol > 0). K is read column by column, never copied.
Eigen::MatrixXd pivoted_cholesky(const Eigen::MatrixXd& K, double rel_tol = -1.0);

struct SymmetricEigen {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns match values
};

/// Full decomposition of a symmetric matrix, eigenvalues descending.
SymmetricEigen symmetric_eigen_desc(const Eigen::MatrixXd& S);

/// Largest k eigenpairs of the symmetric tridiagonal matrix with the given
/// diagonal and off-diagonal, descending.
SymmetricEigen tridiagonal_top_eigen(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag,
                                     Eigen::Index k);

}  // namespace larrr
