#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace larrr {

using Meta = std::map<std::string, std::string>;

/// Time-stamped samples of one realization of a process.
///
/// Rows of `states()` are in time order, columns are state coordinates.
/// Construction validates: n >= 2, strictly increasing times, finite states.
/// Instances are immutable.
class Trajectory {
 public:
  Trajectory(Eigen::MatrixXd states, Eigen::VectorXd times, Meta meta = {});

  const Eigen::MatrixXd& states() const { return states_; }
  const Eigen::VectorXd& times() const { return times_; }
  const Meta& meta() const { return meta_; }

  std::size_t size() const { return static_cast<std::size_t>(states_.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(states_.cols()); }

 private:
  Eigen::MatrixXd states_;
  Eigen::VectorXd times_;
  Meta meta_;
};

/// Several trajectories observed on one shared (possibly non-uniform) grid.
class TrajectoryBundle {
 public:
  explicit TrajectoryBundle(std::vector<Trajectory> trajectories);

  const std::vector<Trajectory>& trajectories() const { return trajectories_; }
  const Eigen::VectorXd& times() const { return trajectories_.front().times(); }
  std::size_t count() const { return trajectories_.size(); }
  std::size_t grid_size() const { return trajectories_.front().size(); }
  std::size_t dimension() const { return trajectories_.front().dimension(); }

  /// Samples stacked time-major: all trajectories at t0, then all at t1, ...
  Eigen::MatrixXd stacked_states() const;

 private:
  std::vector<Trajectory> trajectories_;
};

struct Uniformity {
  bool uniform = false;
  double step = 0.0;  // mean step; meaningful only when uniform
};

inline constexpr double kDefaultUniformTolerance = 1e-6;

/// True iff max gap / min gap - 1 <= rel_tol.
Uniformity is_uniform(const Trajectory& traj, double rel_tol = kDefaultUniformTolerance);

/// Keeps rows 0, stride, 2*stride, ...
Trajectory subsample(const Trajectory& traj, std::size_t stride);

Trajectory load_csv(const std::filesystem::path& path);
void save_csv(const Trajectory& traj, const std::filesystem::path& path);

}  // namespace larrr
