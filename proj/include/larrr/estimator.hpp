#pragma once

#include "larrr/features.hpp"
#include "larrr/quadrature.hpp"
#include "larrr/trajectory.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace larrr {

struct FitConfig {
  double mu = 1.0;
  double gamma = 1e-6;
  std::size_t rank = 1;
  LaplaceWeights weights;
  /// Symmetrize M and solve symmetric reduced problems (real spectrum).
  bool self_adjoint = true;
  /// Added to the diagonal of the regularized covariance before factoring.
  double jitter = 0.0;

  void validate() const;
};

enum class FitMode { primal, dual };

std::string to_string(FitMode mode);

/// Resolvent mode: mu - 1/nu. Transfer-operator mode: Log(nu)/dt.
/// |nu| < kNuFloor yields -inf with a warning.
std::complex<double> eigenvalue_map(std::complex<double> nu, const LaplaceWeights& w,
                                    std::string* warning = nullptr);
inline constexpr double kNuFloor = 1e-14;

struct FitDiagnostics {
  /// max |X - X^T| / max |X| before explicit symmetrization.
  double covariance_asymmetry = 0.0;
  double cross_asymmetry = 0.0;     // H (meaningful in self-adjoint mode)
  double line5_asymmetry = 0.0;     // whitened H H^T
  double reduced_asymmetry = 0.0;   // V_r^T H V_r  (V_r^T M V_r in dual mode)
  double normalization_residual = 0.0;
  /// <g_i, h_j> in the RKHS pairing used by forecast; identity by construction.
  Eigen::MatrixXcd biorthogonality;
  /// Numerical rank of the Gram factor (dual) or feature count (primal).
  Eigen::Index basis_rank = 0;
};

/// Fitted reduced-rank resolvent estimator.
///
/// Eigenfunctions are stored as expansions over a basis: dictionary features
/// z_j (primal) or k(x_k, .)/sqrt(n) over training states (dual).
struct SpectralModel {
  FitMode mode = FitMode::primal;
  FitConfig config;

  std::vector<std::complex<double>> eigenvalues;  // lambda_i, sorted
  std::vector<std::complex<double>> nu;           // reduced-problem eigenvalues
  Eigen::VectorXd singular_values;                // r + 1 entries
  Eigen::VectorXd metric_distortions;

  KernelSpec kernel;              // linear_features over the dictionary in primal mode
  Eigen::MatrixXd train_states;   // n x d
  Eigen::MatrixXcd right_coef;    // basis x r, h_i
  Eigen::MatrixXcd left_coef;     // basis x r, g_i
  Eigen::MatrixXcd right_train;   // n x r, h_i on the training states
  Eigen::MatrixXcd pairing;       // n x r, <g_i, h> = pairing(:, i)^T h(train)

  double jitter_used = 0.0;
  FitDiagnostics diagnostics;
  std::vector<std::string> warnings;
  Meta provenance;

  std::size_t rank() const { return eigenvalues.size(); }
  std::size_t sample_count() const { return static_cast<std::size_t>(right_train.rows()); }

  /// m x basis matrix of basis functions at the rows of X.
  Eigen::MatrixXd basis_values(const Eigen::MatrixXd& X) const;
  /// m x r values of h_i / g_i at the rows of X.
  Eigen::MatrixXcd evaluate_right(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXcd evaluate_left(const Eigen::MatrixXd& X) const;
};

/// Low level: Z is N x n (columns z(x_i)), K is the n x n Gram scaled by 1/n.
/// The one-argument-matrix forms build M = toeplitz_matrix(cfg.weights, n,
/// cfg.self_adjoint). The returned models carry no basis; use the
/// state-level overloads to get evaluable models.
SpectralModel fit_primal(const Eigen::MatrixXd& Z, const FitConfig& cfg);
SpectralModel fit_primal(const Eigen::MatrixXd& Z, const CombinationMatrix& M, const FitConfig& cfg);
SpectralModel fit_dual(const Eigen::MatrixXd& K, const FitConfig& cfg);
SpectralModel fit_dual(const Eigen::MatrixXd& K, const CombinationMatrix& M, const FitConfig& cfg);

/// States are n x d rows in time order with uniform spacing cfg.weights.step.
SpectralModel fit_primal(const Dictionary& dict, const Eigen::MatrixXd& states, const FitConfig& cfg);
SpectralModel fit_dual(const KernelSpec& kernel, const Eigen::MatrixXd& states, const FitConfig& cfg);

/// Trajectories on a shared grid; cfg.weights must come from
/// nonuniform_weights (or trapezoid_weights) on that grid shifted to 0.
SpectralModel fit_bundle(const TrajectoryBundle& bundle, const FitConfig& cfg, const Dictionary& dict);
SpectralModel fit_bundle(const TrajectoryBundle& bundle, const FitConfig& cfg, const KernelSpec& kernel);

double metric_distortion(const SpectralModel& model, std::size_t i);
/// sigma_{r+1}; 0 when the problem rank is <= r.
double singular_tail(const SpectralModel& model);

/// sum_i e^{lambda_i t} <g_i, h> h_i(x0) with h given by its values on the
/// training states. Throws for t < 0 or, in self-adjoint mode, when the
/// imaginary part exceeds 1e-10.
double forecast(const SpectralModel& model, const Eigen::VectorXd& h_train,
                const Eigen::VectorXd& x0, double t);
double forecast(const SpectralModel& model,
                const std::function<double(const Eigen::VectorXd&)>& observable,
                const Eigen::VectorXd& x0, double t);
std::vector<double> forecast_series(const SpectralModel& model, const Eigen::VectorXd& h_train,
                                    const Eigen::VectorXd& x0, const std::vector<double>& times);

/// <g_i, h> for i = 1..r.
Eigen::VectorXcd observable_coefficients(const SpectralModel& model, const Eigen::VectorXd& h_train);

}  // namespace larrr
