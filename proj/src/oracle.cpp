#include "larrr/oracle.hpp"

#include "larrr/error.hpp"
#include "larrr/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace larrr {

Eigen::MatrixXd GridGenerator1D::dense() const {
  const Eigen::Index G = size();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(G, G);
  L.diagonal() = diag;
  for (Eigen::Index i = 0; i + 1 < G; ++i) {
    L(i, i + 1) = upper[i];
    L(i + 1, i) = lower[i];
  }
  return L;
}

GridGenerator1D discretize_langevin_1d(const Potential& potential, double friction, double kT,
                                       double a, double b, Eigen::Index G) {
  if (G < 50) throw InputError("oracle: grid needs at least 50 points");
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) throw InputError("oracle: need a < b");
  if (!(friction > 0.0)) throw InputError("oracle: friction must be > 0");
  if (!(kT > 0.0)) throw InputError("oracle: kT must be > 0");

  GridGenerator1D gen{potential, friction, kT, a, b, {}, {}, {}, {}, {}};
  const double dx = (b - a) / static_cast<double>(G - 1);
  gen.x.resize(G);
  Eigen::VectorXd V(G);
  for (Eigen::Index i = 0; i < G; ++i) {
    gen.x[i] = a + dx * static_cast<double>(i);
    V[i] = potential.value(gen.x[i]);
  }
  if (!V.allFinite()) throw InputError("oracle: potential is not finite on the grid");

  const double rate = kT / friction / (dx * dx);
  gen.upper.resize(G - 1);
  gen.lower.resize(G - 1);
  for (Eigen::Index i = 0; i + 1 < G; ++i) {
    const double dv = V[i + 1] - V[i];
    gen.upper[i] = rate * std::exp(-dv / (2.0 * kT));
    gen.lower[i] = rate * std::exp(dv / (2.0 * kT));
  }
  gen.upper[0] *= 2.0;
  gen.lower[G - 2] *= 2.0;

  gen.diag.resize(G);
  for (Eigen::Index i = 0; i < G; ++i) {
    double out = 0.0;
    if (i + 1 < G) out += gen.upper[i];
    if (i > 0) out += gen.lower[i - 1];
    gen.diag[i] = -out;
  }

  const double vmin = V.minCoeff();
  gen.boltzmann.resize(G);
  for (Eigen::Index i = 0; i < G; ++i) {
    const double cell = (i == 0 || i == G - 1) ? 0.5 : 1.0;
    gen.boltzmann[i] = cell * std::exp(-(V[i] - vmin) / kT);
  }
  gen.boltzmann /= gen.boltzmann.sum();
  return gen;
}

OracleSpectrum spectrum(const GridGenerator1D& gen, Eigen::Index k) {
  const Eigen::Index G = gen.size();
  if (k < 1 || k > G) throw InputError("oracle spectrum: need 1 <= k <= G");
  Eigen::VectorXd off(G - 1);
  for (Eigen::Index i = 0; i + 1 < G; ++i) off[i] = std::sqrt(gen.upper[i] * gen.lower[i]);
  const SymmetricEigen eig = tridiagonal_top_eigen(gen.diag, off, k);

  OracleSpectrum out;
  out.eigenvalues = eig.values;
  out.eigenfunctions = eig.vectors;
  const Eigen::VectorXd inv_root = gen.boltzmann.cwiseSqrt().cwiseInverse();
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::VectorXd f = eig.vectors.col(j).cwiseProduct(inv_root);
    f /= std::sqrt(gen.boltzmann.dot(f.cwiseAbs2()));
    const double mean = gen.boltzmann.dot(f);
    Eigen::Index peak = 0;
    f.cwiseAbs().maxCoeff(&peak);
    const double sign = std::abs(mean) > 1e-6 ? mean : f[peak];
    if (sign < 0.0) f = -f;
    out.eigenfunctions.col(j) = f;
  }
  return out;
}

namespace {

bool before(const std::complex<double>& x, const std::complex<double>& y) {
  if (x.real() != y.real()) return x.real() > y.real();
  return x.imag() > y.imag();
}

}  // namespace

std::vector<std::complex<double>> ou_spectrum(const Eigen::MatrixXd& A, std::size_t k) {
  require_stable(A);
  if (k < 1) throw InputError("ou_spectrum: k must be >= 1");
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw NumericalError("ou_spectrum: eigensolver failed");
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
  const Eigen::VectorXd sv = svd.singularValues();
  if (!(sv[sv.size() - 1] > 1e-8 * sv[0])) {
    throw InputError("ou_spectrum: drift is not diagonalizable (Jordan-block case unsupported)");
  }
  std::vector<std::complex<double>> alpha;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    auto v = es.eigenvalues()[i];
    if (std::abs(v.imag()) <= 1e-14 * std::abs(v)) v = {v.real(), 0.0};
    alpha.push_back(v);
  }
  double slowest = -std::numeric_limits<double>::infinity();
  for (const auto& v : alpha) slowest = std::max(slowest, v.real());

  const std::size_t d = alpha.size();
  std::vector<std::complex<double>> sums{0.0};
  // Sums of total degree D are appended by extending degree D-1 multi-indices
  // with a non-decreasing last index to avoid duplicates.
  std::vector<std::pair<std::complex<double>, std::size_t>> frontier{{0.0, 0}};
  for (std::size_t degree = 1;; ++degree) {
    std::vector<std::complex<double>> sorted = sums;
    std::sort(sorted.begin(), sorted.end(), before);
    if (sorted.size() >= k && sorted[k - 1].real() >= static_cast<double>(degree) * slowest) {
      sorted.resize(k);
      return sorted;
    }
    std::vector<std::pair<std::complex<double>, std::size_t>> next;
    for (const auto& [value, last] : frontier) {
      for (std::size_t i = last; i < d; ++i) next.emplace_back(value + alpha[i], i);
    }
    if (next.size() > 2000000) throw NumericalError("ou_spectrum: enumeration too large");
    for (const auto& e : next) sums.push_back(e.first);
    frontier = std::move(next);
  }
}

}  // namespace larrr
