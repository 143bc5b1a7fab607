#include "larrr/estimator.hpp"

#include "larrr/error.hpp"
#include "larrr/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace larrr {

void FitConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InputError("fit: gamma must be > 0");
  if (rank < 1) throw InputError("fit: rank must be >= 1");
  if (!(jitter >= 0.0) || !std::isfinite(jitter)) throw InputError("fit: jitter must be >= 0");
  if (weights.weights.size() < 1 || weights.nodes.size() != weights.weights.size()) {
    throw InputError("fit: quadrature weights are missing");
  }
  if (!weights.weights.allFinite() || (weights.weights.array() <= 0.0).any()) {
    throw InputError("fit: quadrature weights must be finite and positive");
  }
  if (weights.mode != WeightMode::transfer_operator) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw InputError("fit: mu must be > 0");
    if (std::abs(weights.mu - mu) > 1e-15 * mu) {
      throw InputError("fit: quadrature weights were built for a different mu");
    }
  }
}

std::string to_string(FitMode mode) { return mode == FitMode::primal ? "primal" : "dual"; }

std::complex<double> eigenvalue_map(std::complex<double> nu, const LaplaceWeights& w,
                                    std::string* warning) {
  if (std::abs(nu) < kNuFloor) {
    if (warning) *warning = "resolvent eigenvalue at numerical zero; lambda reported as -inf";
    return {-std::numeric_limits<double>::infinity(), 0.0};
  }
  if (w.mode == WeightMode::transfer_operator) {
    if (nu.imag() == 0.0) {
      if (nu.real() > 0.0) return {std::log(nu.real()) / w.step, 0.0};
      if (warning) *warning = "transfer-operator eigenvalue on the negative real axis; complex log";
      nu = {nu.real(), 0.0};
    }
    return std::log(nu) / w.step;
  }
  if (nu.imag() == 0.0) return {w.mu - 1.0 / nu.real(), 0.0};
  return w.mu - 1.0 / nu;
}

namespace {

double relative_asymmetry(const Eigen::MatrixXd& X) {
  const double scale = X.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (X - X.transpose()).cwiseAbs().maxCoeff() / scale;
}

struct Whitened {
  Eigen::VectorXd sigma;  // r + 1
  Eigen::MatrixXd V;      // p x r with v^T C v = 1
  double jitter = 0.0;
  double line5_asymmetry = 0.0;
  double normalization_residual = 0.0;
};

// Solves H H^T v = sigma^2 C v by whitening with the Cholesky factor of C.
Whitened whiten_and_truncate(const Eigen::MatrixXd& C, const Eigen::MatrixXd& H, std::size_t r,
                             double base_jitter) {
  const Eigen::Index p = C.rows();
  const auto rr = static_cast<Eigen::Index>(r);
  const JitteredCholesky chol = cholesky_with_jitter(C, base_jitter);
  const auto L = chol.L.triangularView<Eigen::Lower>();
  const Eigen::MatrixXd B = L.solve(H);
  Eigen::MatrixXd S = B * B.transpose();
  Whitened out;
  out.line5_asymmetry = relative_asymmetry(S);
  S = (0.5 * (S + S.transpose())).eval();
  const SymmetricEigen eig = symmetric_eigen_desc(S);

  out.sigma = Eigen::VectorXd::Zero(rr + 1);
  for (Eigen::Index i = 0; i < std::min(rr + 1, p); ++i) {
    out.sigma[i] = std::sqrt(std::max(eig.values[i], 0.0));
  }
  out.V = chol.L.transpose().triangularView<Eigen::Upper>().solve(eig.vectors.leftCols(rr));
  out.jitter = chol.jitter;
  const Eigen::MatrixXd Cj = C + chol.jitter * Eigen::MatrixXd::Identity(p, p);
  for (Eigen::Index i = 0; i < rr; ++i) {
    out.V.col(i) /= std::sqrt(out.V.col(i).dot(Cj * out.V.col(i)));
    out.normalization_residual =
        std::max(out.normalization_residual, std::abs(out.V.col(i).dot(Cj * out.V.col(i)) - 1.0));
  }
  return out;
}

struct Reduced {
  Eigen::VectorXcd nu;
  Eigen::MatrixXcd P;  // right eigenvectors (columns)
  Eigen::MatrixXcd Q;  // left eigenvectors (rows), Q P = I
  double asymmetry = 0.0;
};

Reduced reduced_eigen(Eigen::MatrixXd A, bool self_adjoint) {
  Reduced out;
  out.asymmetry = relative_asymmetry(A);
  if (!A.allFinite()) throw NumericalError("reduced eigenproblem has non-finite entries");
  if (self_adjoint) {
    A = (0.5 * (A + A.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success) throw NumericalError("reduced symmetric eigensolver failed");
    out.nu = es.eigenvalues().cast<std::complex<double>>();
    out.P = es.eigenvectors().cast<std::complex<double>>();
    out.Q = out.P.transpose();
    return out;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw NumericalError("reduced eigensolver failed");
  out.nu = es.eigenvalues();
  out.P = es.eigenvectors();
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(out.P);
  if (!lu.isInvertible()) {
    throw NumericalError("reduced eigenproblem is defective (eigenvector matrix singular)");
  }
  out.Q = lu.inverse();
  return out;
}

// Basis-dependent pieces of a fit.
struct Basis {
  Eigen::MatrixXd right;  // basis x r coordinates of the whitened directions
  std::function<Eigen::MatrixXcd(const Eigen::MatrixXcd&)> train;  // coefficients -> n x k values
  std::function<double(const Eigen::VectorXcd&)> rkhs_norm;
  std::function<Eigen::MatrixXcd(const Eigen::MatrixXcd&)> left_from_pairing;
};

void finish(SpectralModel& model, const Basis& basis, const Reduced& red, const CombinationMatrix& M,
            const FitConfig& cfg) {
  const auto r = static_cast<Eigen::Index>(cfg.rank);
  const double n = static_cast<double>(M.size());

  std::vector<std::complex<double>> lambda(static_cast<std::size_t>(r));
  for (Eigen::Index i = 0; i < r; ++i) {
    std::string warning;
    lambda[static_cast<std::size_t>(i)] = eigenvalue_map(red.nu[i], cfg.weights, &warning);
    if (!warning.empty()) model.warnings.push_back(warning);
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(r));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const auto& la = lambda[static_cast<std::size_t>(a)];
    const auto& lb = lambda[static_cast<std::size_t>(b)];
    if (la.real() != lb.real()) return la.real() > lb.real();
    return la.imag() > lb.imag();
  });

  Eigen::MatrixXcd P(r, r);
  Eigen::MatrixXcd Q(r, r);
  Eigen::VectorXcd nu(r);
  for (Eigen::Index k = 0; k < r; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    P.col(k) = red.P.col(src);
    Q.row(k) = red.Q.row(src);
    nu[k] = red.nu[src];
    model.eigenvalues.push_back(lambda[static_cast<std::size_t>(src)]);
    model.nu.push_back(red.nu[src]);
  }

  const Eigen::MatrixXcd right_basis = basis.right.cast<std::complex<double>>();
  model.right_coef = right_basis * P;
  model.right_train = basis.train(model.right_coef);

  for (Eigen::Index i = 0; i < r; ++i) {
    Eigen::Index k = 0;
    const double peak = model.right_train.col(i).cwiseAbs().maxCoeff(&k);
    if (!(peak > 0.0)) throw NumericalError("eigenfunction vanishes on sample (index " + std::to_string(i + 1) + ")");
    const std::complex<double> s = std::conj(model.right_train(k, i)) / peak;
    model.right_coef.col(i) *= s;
    model.right_train.col(i) *= s;
    Q.row(i) /= s;
  }

  Eigen::MatrixXcd phi = right_basis * Q.transpose();
  for (Eigen::Index i = 0; i < r; ++i) {
    if (std::abs(nu[i]) < kNuFloor) {
      phi.col(i).setZero();
    } else {
      phi.col(i) /= nu[i];
    }
  }
  model.pairing = M.apply_transpose(basis.train(phi)) / n;
  model.left_coef = basis.left_from_pairing(model.pairing);

  model.metric_distortions.resize(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const double rms = std::sqrt(model.right_train.col(i).squaredNorm() / n);
    if (!(rms > 0.0)) throw NumericalError("eigenfunction vanishes on sample");
    model.metric_distortions[i] = basis.rkhs_norm(model.right_coef.col(i)) / rms;
  }
  model.diagnostics.reduced_asymmetry = red.asymmetry;
  model.diagnostics.biorthogonality = model.pairing.transpose() * model.right_train;
}

void check_rank(const FitConfig& cfg, Eigen::Index features, Eigen::Index n) {
  if (static_cast<Eigen::Index>(cfg.rank) > features || static_cast<Eigen::Index>(cfg.rank) > n) {
    throw InputError("fit: rank " + std::to_string(cfg.rank) + " exceeds min(N, n) = " +
                     std::to_string(std::min(features, n)));
  }
}

}  // namespace

SpectralModel fit_primal(const Eigen::MatrixXd& Z, const CombinationMatrix& M, const FitConfig& cfg) {
  cfg.validate();
  const Eigen::Index N = Z.rows();
  const Eigen::Index n = Z.cols();
  if (M.size() != n) {
    throw InputError("fit_primal: combination matrix is " + std::to_string(M.size()) +
                     " but there are " + std::to_string(n) + " samples");
  }
  check_rank(cfg, N, n);
  if (!Z.allFinite()) throw InputError("fit_primal: non-finite features");

  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::MatrixXd C = inv_n * (Z * Z.transpose());
  const double c_asym = relative_asymmetry(C);
  C = (0.5 * (C + C.transpose())).eval();
  C.diagonal().array() += cfg.gamma;
  Eigen::MatrixXd H = inv_n * (Z * M.apply(Eigen::MatrixXd(Z.transpose())));
  const double h_asym = relative_asymmetry(H);
  if (cfg.self_adjoint) H = (0.5 * (H + H.transpose())).eval();

  const Whitened w = whiten_and_truncate(C, H, cfg.rank, cfg.jitter);
  const Eigen::MatrixXd& V = w.V;
  const Reduced red = reduced_eigen(V.transpose() * H * V, cfg.self_adjoint);

  SpectralModel model;
  model.mode = FitMode::primal;
  model.config = cfg;
  model.singular_values = w.sigma;
  model.jitter_used = w.jitter;
  model.diagnostics.covariance_asymmetry = c_asym;
  model.diagnostics.cross_asymmetry = h_asym;
  model.diagnostics.line5_asymmetry = w.line5_asymmetry;
  model.diagnostics.normalization_residual = w.normalization_residual;
  model.diagnostics.basis_rank = N;

  Basis basis;
  basis.right = V;
  basis.train = [&Z](const Eigen::MatrixXcd& c) -> Eigen::MatrixXcd {
    return Z.transpose().cast<std::complex<double>>() * c;
  };
  basis.rkhs_norm = [](const Eigen::VectorXcd& c) { return c.norm(); };
  basis.left_from_pairing = [&Z](const Eigen::MatrixXcd& pairing) -> Eigen::MatrixXcd {
    return Z.cast<std::complex<double>>() * pairing;
  };
  finish(model, basis, red, M, cfg);
  return model;
}

SpectralModel fit_primal(const Eigen::MatrixXd& Z, const FitConfig& cfg) {
  cfg.validate();
  return fit_primal(Z, toeplitz_matrix(cfg.weights, Z.cols(), cfg.self_adjoint), cfg);
}

SpectralModel fit_dual(const Eigen::MatrixXd& K, const CombinationMatrix& M, const FitConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = K.rows();
  if (K.cols() != n) throw InputError("fit_dual: Gram matrix must be square");
  if (M.size() != n) {
    throw InputError("fit_dual: Gram matrix is " + std::to_string(n) + " x " + std::to_string(n) +
                     " but the combination matrix has size " + std::to_string(M.size()));
  }
  if (!K.allFinite()) throw InputError("fit_dual: non-finite Gram entries");
  check_rank(cfg, n, n);

  // K ~= R R^T; the whitened problem lives in the rank-p coordinates of R.
  const Eigen::MatrixXd R = pivoted_cholesky(K);
  const Eigen::Index p = R.cols();
  if (static_cast<Eigen::Index>(cfg.rank) > p) {
    throw NumericalError("fit_dual: rank " + std::to_string(cfg.rank) +
                         " exceeds the numerical rank " + std::to_string(p) +
                         " of the Gram matrix");
  }
  const Eigen::MatrixXd RtR = R.transpose() * R;
  Eigen::MatrixXd C = RtR;
  C.diagonal().array() += cfg.gamma;
  Eigen::MatrixXd H = R.transpose() * M.apply(R);
  const double h_asym = relative_asymmetry(H);
  if (cfg.self_adjoint) H = (0.5 * (H + H.transpose())).eval();

  const Whitened w = whiten_and_truncate(C, H, cfg.rank, cfg.jitter);
  const auto r = static_cast<Eigen::Index>(cfg.rank);
  if (!(w.sigma[r - 1] > 1e-12 * w.sigma[0])) {
    throw NumericalError("fit_dual: singular value " + std::to_string(r) +
                         " is numerically zero; lower the rank");
  }
  const double g = cfg.gamma + w.jitter;

  // u = K_gamma^{-1} M K M^T (S v) / sigma^2, K_gamma^{-1} by Woodbury.
  const Eigen::MatrixXd SV = R * w.V;
  Eigen::MatrixXd y = M.apply_transpose(SV);
  y = R * (R.transpose() * y);
  y = M.apply(y);
  for (Eigen::Index i = 0; i < r; ++i) y.col(i) /= w.sigma[i] * w.sigma[i];
  Eigen::MatrixXd G = RtR;
  G.diagonal().array() += g;
  Eigen::MatrixXd U = (y - R * G.ldlt().solve(R.transpose() * y)) / g;

  double norm_residual = 0.0;
  for (Eigen::Index i = 0; i < r; ++i) {
    auto quad = [&](const Eigen::VectorXd& u) {
      const Eigen::VectorXd t = R.transpose() * u;
      return (R * t).squaredNorm() + g * t.squaredNorm();
    };
    U.col(i) /= std::sqrt(quad(U.col(i)));
    norm_residual = std::max(norm_residual, std::abs(quad(U.col(i)) - 1.0));
  }
  const Eigen::MatrixXd Vr = R * (R.transpose() * U);
  const Reduced red = reduced_eigen(Vr.transpose() * M.apply(Vr), cfg.self_adjoint);

  SpectralModel model;
  model.mode = FitMode::dual;
  model.config = cfg;
  model.singular_values = w.sigma;
  model.jitter_used = w.jitter;
  model.diagnostics.covariance_asymmetry = relative_asymmetry(K);
  model.diagnostics.cross_asymmetry = h_asym;
  model.diagnostics.line5_asymmetry = w.line5_asymmetry;
  model.diagnostics.normalization_residual = norm_residual;
  model.diagnostics.basis_rank = p;

  const double sqrt_n = std::sqrt(static_cast<double>(n));
  Basis basis;
  basis.right = U;
  basis.train = [&R, sqrt_n](const Eigen::MatrixXcd& c) -> Eigen::MatrixXcd {
    const Eigen::MatrixXcd Rc = R.cast<std::complex<double>>();
    return sqrt_n * (Rc * (Rc.transpose() * c));
  };
  basis.rkhs_norm = [&R](const Eigen::VectorXcd& c) {
    return (R.transpose().cast<std::complex<double>>() * c).norm();
  };
  basis.left_from_pairing = [sqrt_n](const Eigen::MatrixXcd& pairing) -> Eigen::MatrixXcd {
    return sqrt_n * pairing;
  };
  finish(model, basis, red, M, cfg);
  return model;
}

SpectralModel fit_dual(const Eigen::MatrixXd& K, const FitConfig& cfg) {
  cfg.validate();
  return fit_dual(K, toeplitz_matrix(cfg.weights, K.rows(), cfg.self_adjoint), cfg);
}

SpectralModel fit_primal(const Dictionary& dict, const Eigen::MatrixXd& states, const FitConfig& cfg) {
  SpectralModel model = fit_primal(dict.evaluate(states), cfg);
  model.kernel = KernelSpec::linear(dict);
  model.train_states = states;
  return model;
}

SpectralModel fit_dual(const KernelSpec& kernel, const Eigen::MatrixXd& states, const FitConfig& cfg) {
  cfg.validate();
  SpectralModel model = fit_dual(gram_matrix(kernel, states, true), cfg);
  model.kernel = kernel;
  model.train_states = states;
  return model;
}

namespace {

CombinationMatrix bundle_operator(const TrajectoryBundle& bundle, const FitConfig& cfg) {
  cfg.validate();
  const Eigen::VectorXd& t = bundle.times();
  const Eigen::VectorXd& nodes = cfg.weights.nodes;
  if (cfg.weights.mode == WeightMode::transfer_operator || nodes.size() != t.size()) {
    throw InputError("fit_bundle: weights must have one node per grid time");
  }
  const double scale = std::max(1.0, std::abs(t[t.size() - 1] - t[0]));
  for (Eigen::Index j = 0; j < t.size(); ++j) {
    if (std::abs((t[j] - t[0]) - nodes[j]) > 1e-12 * scale) {
      throw InputError("fit_bundle: weight nodes do not match the bundle grid at index " +
                       std::to_string(j));
    }
  }
  return bundle_matrix(cfg.weights, static_cast<Eigen::Index>(bundle.count()), cfg.self_adjoint);
}

}  // namespace

SpectralModel fit_bundle(const TrajectoryBundle& bundle, const FitConfig& cfg, const Dictionary& dict) {
  const CombinationMatrix M = bundle_operator(bundle, cfg);
  const Eigen::MatrixXd states = bundle.stacked_states();
  SpectralModel model = fit_primal(dict.evaluate(states), M, cfg);
  model.kernel = KernelSpec::linear(dict);
  model.train_states = states;
  return model;
}

SpectralModel fit_bundle(const TrajectoryBundle& bundle, const FitConfig& cfg, const KernelSpec& kernel) {
  const CombinationMatrix M = bundle_operator(bundle, cfg);
  const Eigen::MatrixXd states = bundle.stacked_states();
  SpectralModel model = fit_dual(gram_matrix(kernel, states, true), M, cfg);
  model.kernel = kernel;
  model.train_states = states;
  return model;
}

// ---------------------------------------------------------------- model queries

Eigen::MatrixXd SpectralModel::basis_values(const Eigen::MatrixXd& X) const {
  if (train_states.size() == 0) throw InputError("model has no stored basis for evaluation");
  if (X.cols() != train_states.cols()) {
    throw InputError("evaluation states have dimension " + std::to_string(X.cols()) +
                     ", model expects " + std::to_string(train_states.cols()));
  }
  if (mode == FitMode::primal) {
    if (!kernel.dictionary) throw InputError("primal model has no dictionary");
    return kernel.dictionary->evaluate(X).transpose();
  }
  const double sqrt_n = std::sqrt(static_cast<double>(train_states.rows()));
  return kernel_matrix(kernel, X, train_states) / sqrt_n;
}

Eigen::MatrixXcd SpectralModel::evaluate_right(const Eigen::MatrixXd& X) const {
  return basis_values(X).cast<std::complex<double>>() * right_coef;
}

Eigen::MatrixXcd SpectralModel::evaluate_left(const Eigen::MatrixXd& X) const {
  return basis_values(X).cast<std::complex<double>>() * left_coef;
}

double metric_distortion(const SpectralModel& model, std::size_t i) {
  if (i < 1 || i > model.rank()) {
    throw InputError("metric_distortion: index " + std::to_string(i) + " outside 1.." +
                     std::to_string(model.rank()));
  }
  return model.metric_distortions[static_cast<Eigen::Index>(i - 1)];
}

double singular_tail(const SpectralModel& model) {
  return model.singular_values[model.singular_values.size() - 1];
}

Eigen::VectorXcd observable_coefficients(const SpectralModel& model, const Eigen::VectorXd& h_train) {
  if (h_train.size() != model.pairing.rows()) {
    throw InputError("observable has " + std::to_string(h_train.size()) +
                     " training values, model has " + std::to_string(model.pairing.rows()) +
                     " samples");
  }
  if (!h_train.allFinite()) throw InputError("observable has non-finite values");
  return model.pairing.transpose() * h_train.cast<std::complex<double>>();
}

std::vector<double> forecast_series(const SpectralModel& model, const Eigen::VectorXd& h_train,
                                    const Eigen::VectorXd& x0, const std::vector<double>& times) {
  for (double t : times) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("forecast: time must be finite and >= 0");
  }
  const Eigen::VectorXcd c = observable_coefficients(model, h_train);
  const Eigen::VectorXcd h0 = model.evaluate_right(x0.transpose()).row(0).transpose();
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    std::complex<double> sum = 0.0;
    for (std::size_t i = 0; i < model.rank(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const std::complex<double> lam = model.eigenvalues[i];
      std::complex<double> decay = 1.0;
      if (t > 0.0) decay = std::isinf(lam.real()) ? 0.0 : std::exp(lam * t);
      sum += decay * c[k] * h0[k];
    }
    if (model.config.self_adjoint && std::abs(sum.imag()) > 1e-10 * std::max(1.0, std::abs(sum.real()))) {
      std::ostringstream os;
      os << "forecast: imaginary part " << sum.imag() << " in self-adjoint mode";
      throw NumericalError(os.str());
    }
    out.push_back(sum.real());
  }
  return out;
}

double forecast(const SpectralModel& model, const Eigen::VectorXd& h_train,
                const Eigen::VectorXd& x0, double t) {
  return forecast_series(model, h_train, x0, {t}).front();
}

double forecast(const SpectralModel& model,
                const std::function<double(const Eigen::VectorXd&)>& observable,
                const Eigen::VectorXd& x0, double t) {
  if (model.train_states.size() == 0) throw InputError("forecast: model has no stored training sample");
  Eigen::VectorXd h(model.train_states.rows());
  for (Eigen::Index k = 0; k < h.size(); ++k) h[k] = observable(model.train_states.row(k).transpose());
  return forecast(model, h, x0, t);
}

}  // namespace larrr
