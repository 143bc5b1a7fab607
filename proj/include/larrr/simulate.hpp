#pragma once

#include "larrr/trajectory.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace larrr {

/// amplitude * exp(-rate * (x - center)^2)
struct GaussianTerm {
  double amplitude = 0.0;
  double center = 0.0;
  double rate = 0.0;
};

/// One-dimensional potential of the form
///   V(x) = scale * (sum_k c_k x^k + sum_i a_i exp(-b_i (x - x_i)^2)).
class Potential {
 public:
  Potential(std::string name, std::vector<double> polynomial, std::vector<GaussianTerm> gaussians,
            double scale = 1.0);

  /// 4 (x^8 + 0.8 e^{-80x^2} + 0.2 e^{-80(x-0.5)^2} + 0.5 e^{-40(x+0.5)^2})
  static Potential triple_well();
  /// stiffness * x^2 / 2
  static Potential quadratic(double stiffness = 1.0);
  /// V = 0
  static Potential free();

  double value(double x) const;
  double derivative(double x) const;

  /// Global minimizer located by grid search on [lo, hi]; ties go to the
  /// point closest to zero.
  double minimum(double lo = -5.0, double hi = 5.0) const;

  const std::string& name() const { return name_; }
  const std::vector<double>& polynomial() const { return polynomial_; }
  const std::vector<GaussianTerm>& gaussians() const { return gaussians_; }
  double scale() const { return scale_; }

 private:
  std::string name_;
  std::vector<double> polynomial_;
  std::vector<GaussianTerm> gaussians_;
  double scale_;
};

inline constexpr std::uint64_t kDefaultBurnIn = 100000;

/// Overdamped Langevin dynamics dX = -V'(X)/friction dt + sqrt(2 kT / friction) dW.
struct LangevinSpec {
  LangevinSpec(Potential potential, double friction, double kT, double step,
               std::uint64_t burn_in = kDefaultBurnIn, std::uint64_t seed = 0);

  Potential potential;
  double friction;
  double kT;
  double step;
  std::uint64_t burn_in;
  std::uint64_t seed;
  /// Start of the burn-in; defaults to the potential minimum.
  std::optional<double> initial_state;
};

/// Ornstein-Uhlenbeck process dX = A X dt + B dW. A must be stable.
struct OUSpec {
  OUSpec(Eigen::MatrixXd drift, Eigen::MatrixXd diffusion, double step,
         std::uint64_t burn_in = kDefaultBurnIn, std::uint64_t seed = 0);

  Eigen::MatrixXd drift;
  Eigen::MatrixXd diffusion;
  double step;
  std::uint64_t burn_in;
  std::uint64_t seed;
  /// Start of the burn-in; defaults to a draw from the stationary law.
  std::optional<Eigen::VectorXd> initial_state;

  Eigen::Index dimension() const { return drift.rows(); }
};

/// Generator used by every simulator; recorded in trajectory metadata.
using Engine = std::mt19937_64;
inline constexpr const char* kEngineName = "mt19937_64+std::normal_distribution";

/// Euler-Maruyama: n_out samples spaced step*out_stride apart, after burn-in.
Trajectory euler_maruyama(const LangevinSpec& spec, std::size_t n_out, std::size_t out_stride);
Trajectory euler_maruyama(const OUSpec& spec, std::size_t n_out, std::size_t out_stride);

/// Euler-Maruyama on an arbitrary increasing grid starting at times[0]. Each
/// gap is split into ceil(gap/step) equal sub-steps so every grid time is hit
/// exactly. Burn-in still precedes times[0].
Trajectory euler_maruyama_on_grid(const OUSpec& spec, const Eigen::VectorXd& times);

/// Solution of A S + S A^T = -B B^T.
Eigen::MatrixXd stationary_covariance(const OUSpec& spec);
Eigen::MatrixXd stationary_covariance(const Eigen::MatrixXd& drift,
                                      const Eigen::MatrixXd& diffusion);

/// count x d matrix of i.i.d. draws from N(0, stationary covariance).
Eigen::MatrixXd sample_stationary(const OUSpec& spec, std::size_t count);
Eigen::MatrixXd sample_stationary(const OUSpec& spec, std::size_t count, Engine& engine);

/// Throws InputError unless every eigenvalue of `drift` has negative real part.
void require_stable(const Eigen::MatrixXd& drift);

}  // namespace larrr
