#include "larrr/simulate.hpp"

#include "larrr/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <sstream>

namespace larrr {

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

[[noreturn]] void blow_up(std::uint64_t step) {
  throw NumericalError("euler-maruyama: blow-up at step " + std::to_string(step) +
                       " (non-finite state; reduce the integration step)");
}

}  // namespace

// ---------------------------------------------------------------- Potential

Potential::Potential(std::string name, std::vector<double> polynomial,
                     std::vector<GaussianTerm> gaussians, double scale)
    : name_(std::move(name)),
      polynomial_(std::move(polynomial)),
      gaussians_(std::move(gaussians)),
      scale_(scale) {
  if (!std::isfinite(scale_)) throw InputError("potential: non-finite scale");
  for (double c : polynomial_) {
    if (!std::isfinite(c)) throw InputError("potential: non-finite polynomial coefficient");
  }
  for (const auto& g : gaussians_) {
    if (!std::isfinite(g.amplitude) || !std::isfinite(g.center) || !std::isfinite(g.rate) ||
        g.rate < 0.0) {
      throw InputError("potential: gaussian terms need finite amplitude/center and rate >= 0");
    }
  }
}

Potential Potential::triple_well() {
  return Potential("triple_well", {0, 0, 0, 0, 0, 0, 0, 0, 1},
                   {{0.8, 0.0, 80.0}, {0.2, 0.5, 80.0}, {0.5, -0.5, 40.0}}, 4.0);
}

Potential Potential::quadratic(double stiffness) {
  if (!(stiffness > 0.0)) throw InputError("quadratic potential: stiffness must be > 0");
  return Potential("quadratic", {0.0, 0.0, 0.5 * stiffness}, {}, 1.0);
}

Potential Potential::free() { return Potential("free", {}, {}, 1.0); }

double Potential::value(double x) const {
  double poly = 0.0;
  for (auto it = polynomial_.rbegin(); it != polynomial_.rend(); ++it) poly = poly * x + *it;
  double gauss = 0.0;
  for (const auto& g : gaussians_) {
    const double u = x - g.center;
    gauss += g.amplitude * std::exp(-g.rate * u * u);
  }
  return scale_ * (poly + gauss);
}

double Potential::derivative(double x) const {
  double poly = 0.0;
  for (std::size_t k = polynomial_.size(); k-- > 1;) {
    poly = poly * x + static_cast<double>(k) * polynomial_[k];
  }
  double gauss = 0.0;
  for (const auto& g : gaussians_) {
    const double u = x - g.center;
    gauss -= 2.0 * g.rate * u * g.amplitude * std::exp(-g.rate * u * u);
  }
  return scale_ * (poly + gauss);
}

double Potential::minimum(double lo, double hi) const {
  constexpr int kPoints = 200001;
  double best_x = 0.0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kPoints; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / (kPoints - 1);
    const double v = value(x);
    if (v < best_v || (v == best_v && std::abs(x) < std::abs(best_x))) {
      best_v = v;
      best_x = x;
    }
  }
  return best_x;
}

// ---------------------------------------------------------------- specs

LangevinSpec::LangevinSpec(Potential potential_, double friction_, double kT_, double step_,
                           std::uint64_t burn_in_, std::uint64_t seed_)
    : potential(std::move(potential_)),
      friction(friction_),
      kT(kT_),
      step(step_),
      burn_in(burn_in_),
      seed(seed_) {
  if (!(friction > 0.0) || !std::isfinite(friction)) throw InputError("langevin: friction must be > 0");
  if (!(kT > 0.0) || !std::isfinite(kT)) throw InputError("langevin: kT must be > 0");
  if (!(step > 0.0) || !std::isfinite(step)) throw InputError("langevin: step must be > 0");
}

void require_stable(const Eigen::MatrixXd& drift) {
  if (drift.rows() == 0 || drift.rows() != drift.cols()) {
    throw InputError("ou: drift matrix must be square and non-empty");
  }
  if (!drift.allFinite()) throw InputError("ou: drift matrix has non-finite entries");
  const Eigen::VectorXcd ev = drift.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (!(ev[i].real() < 0.0)) {
      throw InputError("ou: drift matrix is not stable (eigenvalue with real part " +
                       format_double(ev[i].real()) + ")");
    }
  }
}

OUSpec::OUSpec(Eigen::MatrixXd drift_, Eigen::MatrixXd diffusion_, double step_,
               std::uint64_t burn_in_, std::uint64_t seed_)
    : drift(std::move(drift_)),
      diffusion(std::move(diffusion_)),
      step(step_),
      burn_in(burn_in_),
      seed(seed_) {
  require_stable(drift);
  if (diffusion.rows() != drift.rows() || diffusion.cols() < 1) {
    throw InputError("ou: diffusion matrix must have d rows and at least one column");
  }
  if (!diffusion.allFinite()) throw InputError("ou: diffusion matrix has non-finite entries");
  if (!(step > 0.0) || !std::isfinite(step)) throw InputError("ou: step must be > 0");
}

// ---------------------------------------------------------------- Lyapunov

Eigen::MatrixXd stationary_covariance(const Eigen::MatrixXd& drift,
                                      const Eigen::MatrixXd& diffusion) {
  require_stable(drift);
  const Eigen::Index d = drift.rows();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  // Column-major vec: vec(A S) = (I kron A) vec S, vec(S A^T) = (A kron I) vec S.
  Eigen::MatrixXd kron(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      kron.block(i * d, j * d, d, d) = eye(i, j) * drift + drift(i, j) * eye;
    }
  }
  const Eigen::MatrixXd q = diffusion * diffusion.transpose();
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(q.data(), d * d);
  const Eigen::VectorXd vec = kron.fullPivLu().solve(rhs);
  Eigen::MatrixXd sigma = Eigen::Map<const Eigen::MatrixXd>(vec.data(), d, d);
  sigma = (0.5 * (sigma + sigma.transpose())).eval();
  return sigma;
}

Eigen::MatrixXd stationary_covariance(const OUSpec& spec) {
  return stationary_covariance(spec.drift, spec.diffusion);
}

namespace {

// Returns F with F F^T = sigma; Cholesky first, eigen-decomposition when
// sigma is singular.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

}  // namespace

Eigen::MatrixXd sample_stationary(const OUSpec& spec, std::size_t count, Engine& engine) {
  const Eigen::Index d = spec.dimension();
  const Eigen::MatrixXd factor = covariance_factor(stationary_covariance(spec));
  std::normal_distribution<double> normal;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), d);
  Eigen::VectorXd xi(d);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index k = 0; k < d; ++k) xi[k] = normal(engine);
    out.row(i) = (factor * xi).transpose();
  }
  return out;
}

Eigen::MatrixXd sample_stationary(const OUSpec& spec, std::size_t count) {
  Engine engine(spec.seed);
  return sample_stationary(spec, count, engine);
}

// ---------------------------------------------------------------- integrators

namespace {

class OUStepper {
 public:
  OUStepper(const OUSpec& spec, Engine& engine)
      : spec_(spec),
        engine_(engine),
        xi_(spec.diffusion.cols()),
        drift_(spec.dimension()),
        noise_(spec.dimension()) {}

  void advance(Eigen::VectorXd& x, double h, std::uint64_t& counter) {
    for (Eigen::Index k = 0; k < xi_.size(); ++k) xi_[k] = normal_(engine_);
    drift_.noalias() = spec_.drift * x;
    noise_.noalias() = spec_.diffusion * xi_;
    x += h * drift_ + std::sqrt(h) * noise_;
    ++counter;
    if (!x.allFinite()) blow_up(counter);
  }

 private:
  const OUSpec& spec_;
  Engine& engine_;
  std::normal_distribution<double> normal_;
  Eigen::VectorXd xi_;
  Eigen::VectorXd drift_;
  Eigen::VectorXd noise_;
};

Meta ou_meta(const OUSpec& spec) {
  std::ostringstream a;
  std::ostringstream b;
  a.precision(17);
  b.precision(17);
  a << spec.drift.reshaped().transpose();
  b << spec.diffusion.reshaped().transpose();
  return {{"process", "ou"},
          {"rng", kEngineName},
          {"seed", std::to_string(spec.seed)},
          {"step", format_double(spec.step)},
          {"burn_in", std::to_string(spec.burn_in)},
          {"drift_colmajor", a.str()},
          {"diffusion_colmajor", b.str()}};
}

Eigen::VectorXd ou_start(const OUSpec& spec, Engine& engine) {
  if (spec.initial_state) {
    if (spec.initial_state->size() != spec.dimension()) {
      throw InputError("ou: initial state has wrong dimension");
    }
    return *spec.initial_state;
  }
  return sample_stationary(spec, 1, engine).row(0).transpose();
}

}  // namespace

Trajectory euler_maruyama(const LangevinSpec& spec, std::size_t n_out, std::size_t out_stride) {
  if (n_out < 2) throw InputError("euler-maruyama: n_out must be >= 2");
  if (out_stride < 1) throw InputError("euler-maruyama: out_stride must be >= 1");

  Engine engine(spec.seed);
  std::normal_distribution<double> normal;
  const double h = spec.step;
  const double drift_scale = h / spec.friction;
  const double noise_scale = std::sqrt(2.0 * spec.kT / spec.friction * h);
  const Potential& pot = spec.potential;

  double x = spec.initial_state ? *spec.initial_state : pot.minimum();
  if (!std::isfinite(x)) throw InputError("langevin: non-finite initial state");
  std::uint64_t counter = 0;
  auto advance = [&]() {
    x += -pot.derivative(x) * drift_scale + noise_scale * normal(engine);
    ++counter;
    if (!std::isfinite(x)) blow_up(counter);
  };

  for (std::uint64_t k = 0; k < spec.burn_in; ++k) advance();

  Eigen::MatrixXd states(static_cast<Eigen::Index>(n_out), 1);
  Eigen::VectorXd times(static_cast<Eigen::Index>(n_out));
  const double dt = h * static_cast<double>(out_stride);
  for (std::size_t i = 0; i < n_out; ++i) {
    states(static_cast<Eigen::Index>(i), 0) = x;
    times[static_cast<Eigen::Index>(i)] = static_cast<double>(i) * dt;
    if (i + 1 < n_out) {
      for (std::size_t s = 0; s < out_stride; ++s) advance();
    }
  }

  Meta meta{{"process", "langevin"},
            {"potential", pot.name()},
            {"rng", kEngineName},
            {"seed", std::to_string(spec.seed)},
            {"step", format_double(h)},
            {"out_stride", std::to_string(out_stride)},
            {"burn_in", std::to_string(spec.burn_in)},
            {"friction", format_double(spec.friction)},
            {"kT", format_double(spec.kT)}};
  return Trajectory(std::move(states), std::move(times), std::move(meta));
}

Trajectory euler_maruyama(const OUSpec& spec, std::size_t n_out, std::size_t out_stride) {
  if (n_out < 2) throw InputError("euler-maruyama: n_out must be >= 2");
  if (out_stride < 1) throw InputError("euler-maruyama: out_stride must be >= 1");

  Engine engine(spec.seed);
  OUStepper stepper(spec, engine);
  Eigen::VectorXd x = ou_start(spec, engine);
  std::uint64_t counter = 0;
  for (std::uint64_t k = 0; k < spec.burn_in; ++k) stepper.advance(x, spec.step, counter);

  Eigen::MatrixXd states(static_cast<Eigen::Index>(n_out), spec.dimension());
  Eigen::VectorXd times(static_cast<Eigen::Index>(n_out));
  const double dt = spec.step * static_cast<double>(out_stride);
  for (std::size_t i = 0; i < n_out; ++i) {
    states.row(static_cast<Eigen::Index>(i)) = x.transpose();
    times[static_cast<Eigen::Index>(i)] = static_cast<double>(i) * dt;
    if (i + 1 < n_out) {
      for (std::size_t s = 0; s < out_stride; ++s) stepper.advance(x, spec.step, counter);
    }
  }
  Meta meta = ou_meta(spec);
  meta["out_stride"] = std::to_string(out_stride);
  return Trajectory(std::move(states), std::move(times), std::move(meta));
}

Trajectory euler_maruyama_on_grid(const OUSpec& spec, const Eigen::VectorXd& times) {
  if (times.size() < 2) throw InputError("euler-maruyama: grid needs at least 2 times");
  Engine engine(spec.seed);
  OUStepper stepper(spec, engine);
  Eigen::VectorXd x = ou_start(spec, engine);
  std::uint64_t counter = 0;
  for (std::uint64_t k = 0; k < spec.burn_in; ++k) stepper.advance(x, spec.step, counter);

  Eigen::MatrixXd states(times.size(), spec.dimension());
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    if (i > 0) {
      const double gap = times[i] - times[i - 1];
      if (!(gap > 0.0)) throw InputError("euler-maruyama: grid times must be increasing");
      const auto substeps = static_cast<std::uint64_t>(std::ceil(gap / spec.step - 1e-9));
      const double h = gap / static_cast<double>(substeps);
      for (std::uint64_t s = 0; s < substeps; ++s) stepper.advance(x, h, counter);
    }
    states.row(i) = x.transpose();
  }
  Meta meta = ou_meta(spec);
  meta["grid"] = "explicit";
  return Trajectory(std::move(states), times, std::move(meta));
}

}  // namespace larrr
