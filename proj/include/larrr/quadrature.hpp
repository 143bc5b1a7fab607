#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace larrr {

enum class WeightMode { uniform, non_uniform, transfer_operator };

std::string to_string(WeightMode mode);
WeightMode weight_mode_from_string(const std::string& name);

/// Quadrature rule for the Laplace transform of the transfer-operator
/// semigroup: sum_j m_j e^{-mu t_j} A_{t_j}.
struct LaplaceWeights {
  double mu = 0.0;
  /// Grid step for uniform and transfer-operator modes, 0 for non-uniform.
  double step = 0.0;
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  WeightMode mode = WeightMode::uniform;

  /// Index of the last node (l).
  std::size_t horizon() const { return static_cast<std::size_t>(weights.size()) - 1; }
  /// Sample lag of node j, round(t_j / step). Uniform and TO modes only.
  Eigen::Index lag(Eigen::Index j) const;
};

/// Smallest l with mu * l * dt >= 10.
std::size_t default_horizon(double mu, double dt);

LaplaceWeights trapezoid_weights(double mu, double dt, std::size_t horizon);
/// mu may be 0 here; times[0] must be 0.
LaplaceWeights nonuniform_weights(double mu, const Eigen::VectorXd& times);
/// Single lag: node dt, weight 1.
LaplaceWeights transfer_operator_weights(double dt);

/// max gap / min gap of a time grid.
double grid_conditioning(const Eigen::VectorXd& times);

/// Partial diagonal: Y[row_begin + k] += coef * X[row_begin + k + offset]
/// for k in [0, count).
struct Band {
  Eigen::Index offset = 0;
  Eigen::Index row_begin = 0;
  Eigen::Index count = 0;
  double coef = 0.0;
};

/// Sparse square matrix made of constant partial diagonals.
class CombinationMatrix {
 public:
  CombinationMatrix(Eigen::Index size, std::vector<Band> bands, bool symmetrized);

  Eigen::Index size() const { return size_; }
  const std::vector<Band>& bands() const { return bands_; }
  bool symmetrized() const { return symmetrized_; }

  /// M X for X with size() rows.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
  /// M^T X.
  Eigen::MatrixXd apply_transpose(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& X) const;
  Eigen::MatrixXcd apply_transpose(const Eigen::MatrixXcd& X) const;

  /// (M + M^T) / 2.
  CombinationMatrix symmetrize() const;
  CombinationMatrix transpose() const;

  /// Dense copy; refused above kMaxDense rows.
  Eigen::MatrixXd to_dense() const;
  static constexpr Eigen::Index kMaxDense = 2000;

 private:
  Eigen::Index size_;
  std::vector<Band> bands_;
  bool symmetrized_;
};

/// M_{i,i+lag_j} = n m_j / (n - lag_j).
CombinationMatrix toeplitz_matrix(const LaplaceWeights& w, Eigen::Index n, bool symmetrize);
/// Block form for trajectories on a shared grid, samples stacked time-major:
/// M_{i, j n + i} = (l + 1) m_j.
CombinationMatrix bundle_matrix(const LaplaceWeights& w, Eigen::Index n_traj,
                                bool symmetrize = false);

struct QuadratureCheck {
  std::complex<double> approx;
  std::complex<double> exact;
  double abs_error = 0.0;
};

/// Compares sum_j m_j e^{lambda t_j} with 1 / (mu - lambda).
QuadratureCheck scalar_quadrature_check(const LaplaceWeights& w, std::complex<double> lambda);

}  // namespace larrr
