#pragma once

#include "larrr/simulate.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace larrr {

/// Tridiagonal discretization of Lf = -V'/friction f' + (kT/friction) f'' on a
/// vertex-centered uniform grid with reflecting ends.
///
/// Each link carries the symmetric-exponential flux weight
///   L_{i,i+-1} = (kT/friction)/dx^2 * exp(-(V_{i+-1} - V_i) / (2 kT)),
/// so the scheme is exactly reversible w.r.t. the discrete Boltzmann weights
/// and second-order consistent. The ghost-point mirror doubles the inward link
/// at both ends.
struct GridGenerator1D {
  Potential potential;
  double friction = 1.0;
  double kT = 1.0;
  double a = 0.0;
  double b = 1.0;
  Eigen::VectorXd x;
  Eigen::VectorXd diag;   // L_{i,i}
  Eigen::VectorXd upper;  // L_{i,i+1}
  Eigen::VectorXd lower;  // L_{i+1,i}
  /// Trapezoid cell weight times e^{-V/kT}, normalized to sum 1.
  Eigen::VectorXd boltzmann;

  Eigen::Index size() const { return x.size(); }
  Eigen::MatrixXd dense() const;
};

GridGenerator1D discretize_langevin_1d(const Potential& potential, double friction, double kT,
                                       double a, double b, Eigen::Index G);

struct OracleSpectrum {
  Eigen::VectorXd eigenvalues;     // descending
  Eigen::MatrixXd eigenfunctions;  // G x k, unit norm in L2(boltzmann)
};

OracleSpectrum spectrum(const GridGenerator1D& gen, Eigen::Index k);

/// The k largest-real-part sums sum_i n_i alpha_i (n_i >= 0) over the
/// eigenvalues alpha_i of A, with multiplicity.
std::vector<std::complex<double>> ou_spectrum(const Eigen::MatrixXd& A, std::size_t k);

}  // namespace larrr
