#include "larrr/linalg.hpp"

#include "larrr/error.hpp"

#include <Eigen/Eigenvalues>
#include <lapacke.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace larrr {

JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& C, double base_jitter) {
  const Eigen::Index N = C.rows();
  if (N == 0 || C.cols() != N) throw InputError("cholesky: matrix must be square and non-empty");
  if (!C.allFinite()) throw NumericalError("cholesky: non-finite matrix entries");
  const double scale = std::abs(C.trace()) / static_cast<double>(N);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(N, N);

  double extra = 0.0;
  for (int attempt = 0; attempt <= 5; ++attempt) {
    if (attempt > 0) extra = std::pow(10.0, -13 + attempt) * scale;
    const double jitter = base_jitter + extra;
    Eigen::LLT<Eigen::MatrixXd> llt(C + jitter * eye);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd L = llt.matrixL();
      if (L.allFinite() && L.diagonal().minCoeff() > 0.0) return {std::move(L), jitter};
    }
  }
  std::ostringstream os;
  os << "regularized covariance is numerically singular after jitter up to "
     << base_jitter + extra << "; increase gamma or jitter";
  throw NumericalError(os.str());
}

Eigen::MatrixXd pivoted_cholesky(const Eigen::MatrixXd& K, double rel_tol) {
  const Eigen::Index n = K.rows();
  if (n == 0 || K.cols() != n) throw InputError("pivoted_cholesky: matrix must be square");
  Eigen::VectorXd d = K.diagonal();
  const double max_diag = d.maxCoeff();
  if (!(max_diag > 0.0)) throw NumericalError("pivoted_cholesky: matrix has no positive diagonal");
  const double tol = rel_tol > 0.0 ? rel_tol * max_diag
                                   : static_cast<double>(n) *
                                         std::numeric_limits<double>::epsilon() * max_diag;

  std::vector<Eigen::VectorXd> cols;
  std::vector<Eigen::Index> pivots;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  while (static_cast<Eigen::Index>(cols.size()) < n) {
    Eigen::Index p = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!used[static_cast<std::size_t>(i)] && d[i] > best) {
        best = d[i];
        p = i;
      }
    }
    if (p < 0 || best <= tol) break;
    const double piv = std::sqrt(best);
    Eigen::VectorXd c = K.col(p);
    for (std::size_t k = 0; k < cols.size(); ++k) c -= cols[k][p] * cols[k];
    c /= piv;
    for (Eigen::Index q : pivots) c[q] = 0.0;
    c[p] = piv;
    d -= c.cwiseAbs2();
    used[static_cast<std::size_t>(p)] = true;
    pivots.push_back(p);
    cols.push_back(std::move(c));
  }
  Eigen::MatrixXd R(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) R.col(static_cast<Eigen::Index>(k)) = cols[k];
  return R;
}

SymmetricEigen symmetric_eigen_desc(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  return {es.eigenvalues().reverse(), es.eigenvectors().rowwise().reverse()};
}

SymmetricEigen tridiagonal_top_eigen(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag,
                                     Eigen::Index k) {
  const auto n = static_cast<lapack_int>(diag.size());
  if (n < 1 || offdiag.size() != std::max<Eigen::Index>(diag.size() - 1, 0)) {
    throw InputError("tridiagonal eigensolver: inconsistent sizes");
  }
  if (k < 1 || k > diag.size()) throw InputError("tridiagonal eigensolver: need 1 <= k <= n");
  Eigen::VectorXd d = diag;
  Eigen::VectorXd e(diag.size());
  e.head(offdiag.size()) = offdiag;
  e[diag.size() - 1] = 0.0;
  lapack_int found = 0;
  Eigen::VectorXd w(diag.size());
  Eigen::MatrixXd Z(diag.size(), k);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(k));
  const auto il = n - static_cast<lapack_int>(k) + 1;
  const lapack_int info =
      LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, il, n, 0.0,
                     &found, w.data(), Z.data(), n, support.data());
  if (info != 0 || found != static_cast<lapack_int>(k)) {
    throw NumericalError("tridiagonal eigensolver failed (info " + std::to_string(info) + ")");
  }
  return {w.head(k).reverse(), Z.rowwise().reverse()};
}

}  // namespace larrr
