#include "larrr/features.hpp"

#include "larrr/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace larrr {

namespace {

void require_finite(const Eigen::MatrixXd& X, const char* who) {
  if (!X.allFinite()) throw InputError(std::string(who) + ": non-finite state value");
}

// Exponent vectors of total degree `degree`, x1-heavy first.
void graded(std::size_t d, unsigned degree, std::size_t pos, std::vector<unsigned>& cur,
            std::vector<std::vector<unsigned>>& out) {
  if (pos + 1 == d) {
    cur[pos] = degree;
    out.push_back(cur);
    return;
  }
  for (unsigned e = degree + 1; e-- > 0;) {
    cur[pos] = e;
    graded(d, degree - e, pos + 1, cur, out);
  }
}

}  // namespace

Dictionary Dictionary::monomials(std::size_t d, unsigned max_degree) {
  if (d < 1) throw InputError("dictionary: dimension must be >= 1");
  std::vector<std::vector<unsigned>> exps;
  std::vector<unsigned> cur(d, 0);
  for (unsigned k = 0; k <= max_degree; ++k) graded(d, k, 0, cur, exps);
  return from_exponents(d, std::move(exps));
}

Dictionary Dictionary::from_exponents(std::size_t d, std::vector<std::vector<unsigned>> exponents) {
  if (d < 1) throw InputError("dictionary: dimension must be >= 1");
  if (exponents.empty()) throw InputError("dictionary: need at least one feature");
  for (const auto& e : exponents) {
    if (e.size() != d) throw InputError("dictionary: exponent vector has wrong length");
  }
  Dictionary dict;
  dict.kind_ = Kind::monomial;
  dict.dimension_ = d;
  dict.exponents_ = std::move(exponents);
  return dict;
}

Dictionary Dictionary::constant(std::size_t d) {
  return from_exponents(d, {std::vector<unsigned>(d, 0)});
}

Dictionary Dictionary::random_fourier(Eigen::MatrixXd frequencies, Eigen::VectorXd phases,
                                      double length_scale, std::uint64_t seed) {
  if (frequencies.rows() < 1 || frequencies.cols() < 1 || frequencies.rows() != phases.size()) {
    throw InputError("rff dictionary: frequencies must be N x d with N phases");
  }
  Dictionary dict;
  dict.kind_ = Kind::rff;
  dict.dimension_ = static_cast<std::size_t>(frequencies.cols());
  dict.frequencies_ = std::move(frequencies);
  dict.phases_ = std::move(phases);
  dict.length_scale_ = length_scale;
  dict.seed_ = seed;
  return dict;
}

std::size_t Dictionary::size() const {
  return kind_ == Kind::monomial ? exponents_.size() : static_cast<std::size_t>(phases_.size());
}

std::vector<std::string> Dictionary::names() const {
  std::vector<std::string> out;
  if (kind_ == Kind::rff) {
    for (std::size_t k = 0; k < size(); ++k) out.push_back("rff" + std::to_string(k));
    return out;
  }
  for (const auto& e : exponents_) {
    std::string name;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      if (!name.empty()) name += "*";
      name += "x" + std::to_string(i + 1);
      if (e[i] > 1) name += "^" + std::to_string(e[i]);
    }
    out.push_back(name.empty() ? "1" : name);
  }
  return out;
}

Eigen::MatrixXd Dictionary::evaluate(const Eigen::MatrixXd& X) const {
  require_finite(X, "dictionary");
  if (static_cast<std::size_t>(X.cols()) != dimension_) {
    throw InputError("dictionary: states have dimension " + std::to_string(X.cols()) +
                     ", dictionary expects " + std::to_string(dimension_));
  }
  const auto N = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd Z(N, X.rows());
  if (kind_ == Kind::rff) {
    const double amp = std::sqrt(2.0 / static_cast<double>(N));
    Z = frequencies_ * X.transpose();
    Z.colwise() += phases_;
    Z = amp * Z.array().cos();
    return Z;
  }
  for (Eigen::Index f = 0; f < N; ++f) {
    const auto& e = exponents_[static_cast<std::size_t>(f)];
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      double v = 1.0;
      for (std::size_t c = 0; c < e.size(); ++c) {
        for (unsigned p = 0; p < e[c]; ++p) v *= X(i, static_cast<Eigen::Index>(c));
      }
      Z(f, i) = v;
    }
  }
  if (!Z.allFinite()) throw NumericalError("dictionary: feature overflow");
  return Z;
}

Eigen::MatrixXd evaluate_dictionary(const Dictionary& dict, const Eigen::MatrixXd& X) {
  return dict.evaluate(X);
}

// ---------------------------------------------------------------- kernels

KernelSpec KernelSpec::gaussian(double length_scale) {
  KernelSpec k;
  k.family = Family::gaussian_rbf;
  k.length_scale = length_scale;
  k.validate();
  return k;
}

KernelSpec KernelSpec::linear(Dictionary dictionary) {
  KernelSpec k;
  k.family = Family::linear_features;
  k.length_scale = 0.0;
  k.dictionary = std::make_shared<const Dictionary>(std::move(dictionary));
  return k;
}

void KernelSpec::validate() const {
  if (family == Family::gaussian_rbf && (!(length_scale > 0.0) || !std::isfinite(length_scale))) {
    throw InputError("kernel: length_scale must be > 0");
  }
  if (family == Family::linear_features && !dictionary) {
    throw InputError("kernel: linear_features family needs a dictionary");
  }
}

std::string KernelSpec::family_name() const {
  return family == Family::gaussian_rbf ? "gaussian_rbf" : "linear_features";
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& k, const Eigen::MatrixXd& X,
                              const Eigen::MatrixXd& Y) {
  k.validate();
  require_finite(X, "kernel");
  require_finite(Y, "kernel");
  if (X.cols() != Y.cols()) throw InputError("kernel: state dimensions differ");
  if (k.family == KernelSpec::Family::linear_features) {
    return k.dictionary->evaluate(X).transpose() * k.dictionary->evaluate(Y);
  }
  const double inv = 1.0 / (k.length_scale * k.length_scale);
  Eigen::MatrixXd out(X.rows(), Y.rows());
  for (Eigen::Index j = 0; j < Y.rows(); ++j) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      out(i, j) = std::exp(-(X.row(i) - Y.row(j)).squaredNorm() * inv);
    }
  }
  return out;
}

Eigen::MatrixXd gram_matrix(const KernelSpec& k, const Eigen::MatrixXd& X, bool scale_by_n) {
  k.validate();
  require_finite(X, "gram_matrix");
  const Eigen::Index n = X.rows();
  if (n < 1) throw InputError("gram_matrix: need at least one state");
  Eigen::MatrixXd G(n, n);
  if (k.family == KernelSpec::Family::linear_features) {
    const Eigen::MatrixXd Z = k.dictionary->evaluate(X);
    G.triangularView<Eigen::Upper>() = Z.transpose() * Z;
  } else {
    const double inv = 1.0 / (k.length_scale * k.length_scale);
    const Eigen::Index d = X.cols();
    const Eigen::MatrixXd Xt = X.transpose();
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i <= j; ++i) {
        double s = 0.0;
        for (Eigen::Index c = 0; c < d; ++c) {
          const double u = Xt(c, i) - Xt(c, j);
          s += u * u;
        }
        G(i, j) = std::exp(-s * inv);
      }
    }
  }
  if (scale_by_n) G.triangularView<Eigen::Upper>() /= static_cast<double>(n);
  G.triangularView<Eigen::StrictlyLower>() = G.transpose();
  return G;
}

Dictionary rff_dictionary(const KernelSpec& k, std::size_t count, std::size_t d,
                          std::uint64_t seed) {
  if (k.family != KernelSpec::Family::gaussian_rbf) {
    throw InputError("rff_dictionary: only the gaussian_rbf kernel has a Fourier sampler");
  }
  k.validate();
  if (count < 1) throw InputError("rff_dictionary: need at least one feature");
  if (d < 1) throw InputError("rff_dictionary: dimension must be >= 1");
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0) / k.length_scale);
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
  const auto N = static_cast<Eigen::Index>(count);
  const auto D = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd freq(N, D);
  Eigen::VectorXd phase(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index c = 0; c < D; ++c) freq(i, c) = normal(engine);
    phase[i] = uniform(engine);
  }
  return Dictionary::random_fourier(std::move(freq), std::move(phase), k.length_scale, seed);
}

double median_heuristic(const Eigen::MatrixXd& X, std::size_t max_points) {
  require_finite(X, "median_heuristic");
  if (X.rows() < 2) throw InputError("median_heuristic: need at least two states");
  const auto n = static_cast<std::size_t>(X.rows());
  const std::size_t stride = max_points == 0 ? 1 : std::max<std::size_t>(1, (n + max_points - 1) / max_points);
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < n; i += stride) rows.push_back(static_cast<Eigen::Index>(i));
  std::vector<double> dist;
  dist.reserve(rows.size() * (rows.size() - 1) / 2);
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      dist.push_back((X.row(rows[a]) - X.row(rows[b])).norm());
    }
  }
  if (dist.empty()) throw InputError("median_heuristic: need at least two states");
  const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  double med = *mid;
  if (dist.size() % 2 == 0) {
    med = 0.5 * (med + *std::max_element(dist.begin(), mid));
  }
  if (!(med > 0.0)) throw NumericalError("median_heuristic: all sampled states coincide");
  return med;
}

}  // namespace larrr
