#include "larrr/quadrature.hpp"

#include "larrr/error.hpp"

#include <cmath>

namespace larrr {

std::string to_string(WeightMode mode) {
  switch (mode) {
    case WeightMode::uniform: return "uniform";
    case WeightMode::non_uniform: return "non_uniform";
    case WeightMode::transfer_operator: return "transfer_operator";
  }
  return "unknown";
}

WeightMode weight_mode_from_string(const std::string& name) {
  if (name == "uniform") return WeightMode::uniform;
  if (name == "non_uniform") return WeightMode::non_uniform;
  if (name == "transfer_operator") return WeightMode::transfer_operator;
  throw InputError("unknown weight mode '" + name + "'");
}

Eigen::Index LaplaceWeights::lag(Eigen::Index j) const {
  if (mode == WeightMode::non_uniform || !(step > 0.0)) {
    throw InputError("lag: non-uniform weights have no integer lags");
  }
  return static_cast<Eigen::Index>(std::llround(nodes[j] / step));
}

std::size_t default_horizon(double mu, double dt) {
  if (!(mu > 0.0) || !(dt > 0.0)) throw InputError("default_horizon: need mu > 0 and dt > 0");
  const double x = 10.0 / (mu * dt);
  const auto l = static_cast<std::size_t>(std::ceil(x * (1.0 - 1e-12)));
  return l < 1 ? 1 : l;
}

LaplaceWeights trapezoid_weights(double mu, double dt, std::size_t horizon) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InputError("trapezoid_weights: mu must be > 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("trapezoid_weights: dt must be > 0");
  if (horizon < 1) {
    throw InputError("trapezoid_weights: horizon must be >= 1 (use transfer_operator_weights for l = 0)");
  }
  const auto size = static_cast<Eigen::Index>(horizon) + 1;
  LaplaceWeights w;
  w.mu = mu;
  w.step = dt;
  w.mode = WeightMode::uniform;
  w.nodes.resize(size);
  w.weights.resize(size);
  for (Eigen::Index j = 0; j < size; ++j) {
    const double t = static_cast<double>(j) * dt;
    const double h = (j == 0 || j == size - 1) ? dt / 2.0 : dt;
    w.nodes[j] = t;
    w.weights[j] = h * std::exp(-mu * t);
  }
  return w;
}

LaplaceWeights nonuniform_weights(double mu, const Eigen::VectorXd& times) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw InputError("nonuniform_weights: mu must be >= 0");
  if (times.size() < 2) throw InputError("nonuniform_weights: need at least 2 times");
  if (!times.allFinite()) throw InputError("nonuniform_weights: non-finite time");
  if (times[0] != 0.0) throw InputError("nonuniform_weights: first time must be 0");
  for (Eigen::Index j = 1; j < times.size(); ++j) {
    if (!(times[j] > times[j - 1])) {
      throw InputError("nonuniform_weights: duplicate or decreasing time at index " +
                       std::to_string(j));
    }
  }
  const Eigen::Index last = times.size() - 1;
  LaplaceWeights w;
  w.mu = mu;
  w.step = 0.0;
  w.mode = WeightMode::non_uniform;
  w.nodes = times;
  w.weights.resize(times.size());
  for (Eigen::Index j = 0; j <= last; ++j) {
    const double lo = times[j == 0 ? 0 : j - 1];
    const double hi = times[j == last ? last : j + 1];
    w.weights[j] = (hi - lo) / 2.0 * std::exp(-mu * times[j]);
  }
  return w;
}

LaplaceWeights transfer_operator_weights(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("transfer_operator_weights: dt must be > 0");
  LaplaceWeights w;
  w.mu = 0.0;
  w.step = dt;
  w.mode = WeightMode::transfer_operator;
  w.nodes = Eigen::VectorXd::Constant(1, dt);
  w.weights = Eigen::VectorXd::Ones(1);
  return w;
}

double grid_conditioning(const Eigen::VectorXd& times) {
  if (times.size() < 2) return 1.0;
  const Eigen::Index gaps = times.size() - 1;
  const Eigen::VectorXd d = times.tail(gaps) - times.head(gaps);
  return d.maxCoeff() / d.minCoeff();
}

// ---------------------------------------------------------------- CombinationMatrix

CombinationMatrix::CombinationMatrix(Eigen::Index size, std::vector<Band> bands, bool symmetrized)
    : size_(size), bands_(std::move(bands)), symmetrized_(symmetrized) {
  if (size_ < 1) throw InputError("combination matrix: size must be >= 1");
  for (const auto& b : bands_) {
    const Eigen::Index col = b.row_begin + b.offset;
    if (b.count < 0 || b.row_begin < 0 || col < 0 || b.row_begin + b.count > size_ ||
        col + b.count > size_) {
      throw InputError("combination matrix: band out of range");
    }
  }
}

namespace {

template <typename Mat>
Mat apply_bands(const std::vector<Band>& bands, Eigen::Index size, const Mat& X, bool transpose) {
  if (X.rows() != size) {
    throw InputError("combination matrix: operand has " + std::to_string(X.rows()) +
                     " rows, expected " + std::to_string(size));
  }
  Mat Y = Mat::Zero(X.rows(), X.cols());
  for (const auto& b : bands) {
    if (b.count == 0 || b.coef == 0.0) continue;
    const Eigen::Index row = transpose ? b.row_begin + b.offset : b.row_begin;
    const Eigen::Index col = transpose ? b.row_begin : b.row_begin + b.offset;
    Y.middleRows(row, b.count) += b.coef * X.middleRows(col, b.count);
  }
  return Y;
}

}  // namespace

Eigen::MatrixXd CombinationMatrix::apply(const Eigen::MatrixXd& X) const {
  return apply_bands(bands_, size_, X, false);
}

Eigen::MatrixXd CombinationMatrix::apply_transpose(const Eigen::MatrixXd& X) const {
  return apply_bands(bands_, size_, X, true);
}

Eigen::MatrixXcd CombinationMatrix::apply(const Eigen::MatrixXcd& X) const {
  return apply_bands(bands_, size_, X, false);
}

Eigen::MatrixXcd CombinationMatrix::apply_transpose(const Eigen::MatrixXcd& X) const {
  return apply_bands(bands_, size_, X, true);
}

CombinationMatrix CombinationMatrix::transpose() const {
  std::vector<Band> out;
  out.reserve(bands_.size());
  for (const auto& b : bands_) out.push_back({-b.offset, b.row_begin + b.offset, b.count, b.coef});
  return CombinationMatrix(size_, std::move(out), symmetrized_);
}

CombinationMatrix CombinationMatrix::symmetrize() const {
  if (symmetrized_) return *this;
  std::vector<Band> out;
  out.reserve(2 * bands_.size());
  for (const auto& b : bands_) {
    if (b.offset == 0) {
      out.push_back(b);
      continue;
    }
    out.push_back({b.offset, b.row_begin, b.count, 0.5 * b.coef});
    out.push_back({-b.offset, b.row_begin + b.offset, b.count, 0.5 * b.coef});
  }
  return CombinationMatrix(size_, std::move(out), true);
}

Eigen::MatrixXd CombinationMatrix::to_dense() const {
  if (size_ > kMaxDense) {
    throw InputError("combination matrix: dense form refused for n = " + std::to_string(size_) +
                     " > " + std::to_string(kMaxDense));
  }
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(size_, size_);
  for (const auto& b : bands_) {
    for (Eigen::Index k = 0; k < b.count; ++k) {
      D(b.row_begin + k, b.row_begin + k + b.offset) += b.coef;
    }
  }
  return D;
}

CombinationMatrix toeplitz_matrix(const LaplaceWeights& w, Eigen::Index n, bool symmetrize) {
  if (w.mode == WeightMode::non_uniform) {
    throw InputError("toeplitz_matrix: needs uniform or transfer-operator weights");
  }
  std::vector<Band> bands;
  for (Eigen::Index j = 0; j < w.weights.size(); ++j) {
    const Eigen::Index lag = w.lag(j);
    if (n <= lag) {
      throw InputError("trajectory shorter than quadrature horizon (n = " + std::to_string(n) +
                       ", longest lag = " + std::to_string(lag) + ")");
    }
    const double coef = static_cast<double>(n) * w.weights[j] / static_cast<double>(n - lag);
    bands.push_back({lag, 0, n - lag, coef});
  }
  CombinationMatrix m(n, std::move(bands), false);
  return symmetrize ? m.symmetrize() : m;
}

CombinationMatrix bundle_matrix(const LaplaceWeights& w, Eigen::Index n_traj, bool symmetrize) {
  if (n_traj < 1) throw InputError("bundle_matrix: need at least one trajectory");
  const Eigen::Index blocks = w.weights.size();
  const double scale = static_cast<double>(blocks);
  std::vector<Band> bands;
  for (Eigen::Index j = 0; j < blocks; ++j) {
    bands.push_back({j * n_traj, 0, n_traj, scale * w.weights[j]});
  }
  CombinationMatrix m(n_traj * blocks, std::move(bands), false);
  return symmetrize ? m.symmetrize() : m;
}

QuadratureCheck scalar_quadrature_check(const LaplaceWeights& w, std::complex<double> lambda) {
  std::complex<double> approx = 0.0;
  for (Eigen::Index j = 0; j < w.weights.size(); ++j) {
    approx += w.weights[j] * std::exp(lambda * w.nodes[j]);
  }
  const std::complex<double> exact = 1.0 / (w.mu - lambda);
  return {approx, exact, std::abs(approx - exact)};
}

}  // namespace larrr
