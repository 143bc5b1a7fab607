#pragma once

#include "larrr/estimator.hpp"
#include "larrr/simulate.hpp"
#include "larrr/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <vector>

namespace larrr::testing {

inline std::filesystem::path source_dir() { return LARRR_SOURCE_DIR; }

/// dX = -X dt + sqrt(2) dW, unit stationary variance.
inline OUSpec unit_ou(double step, std::uint64_t seed, std::uint64_t burn_in = 20000) {
  return OUSpec(Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::MatrixXd::Constant(1, 1, std::sqrt(2.0)),
                step, burn_in, seed);
}

inline Trajectory unit_ou_trajectory(std::size_t n, double dt, std::uint64_t seed, std::size_t substeps = 10) {
  return euler_maruyama(unit_ou(dt / static_cast<double>(substeps), seed), n, substeps);
}

inline Trajectory triple_well_trajectory(std::size_t n, std::uint64_t seed, std::size_t stride = 50) {
  return euler_maruyama(LangevinSpec(Potential::triple_well(), 1.0, 1.0, 1e-3, kDefaultBurnIn, seed), n,
                        stride);
}

inline FitConfig laplace_config(double mu, double gamma, std::size_t rank, double dt,
                                bool self_adjoint = true) {
  FitConfig cfg;
  cfg.mu = mu;
  cfg.gamma = gamma;
  cfg.rank = rank;
  cfg.self_adjoint = self_adjoint;
  cfg.weights = trapezoid_weights(mu, dt, default_horizon(mu, dt));
  return cfg;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return NAN;
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? NAN : s / static_cast<double>(v.size());
}

inline double rel_error(std::complex<double> est, double ref) { return std::abs(est - ref) / std::abs(ref); }

/// Coefficient of variation of the real part of a training-sample column.
inline double coefficient_of_variation(const Eigen::VectorXcd& values) {
  const Eigen::ArrayXd re = values.real().array();
  const double m = re.mean();
  const double sd = std::sqrt((re - m).square().mean());
  return sd / std::abs(m);
}

}  // namespace larrr::testing
