#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace larrr {

/// Explicit feature map z: R^d -> R^N.
class Dictionary {
 public:
  enum class Kind { monomial, rff };

  /// All monomials of total degree <= max_degree in d variables, graded
  /// order (1, x1, .., xd, x1^2, x1 x2, ...).
  static Dictionary monomials(std::size_t d, unsigned max_degree);
  /// Monomials with explicit exponent vectors (each of length d).
  static Dictionary from_exponents(std::size_t d, std::vector<std::vector<unsigned>> exponents);
  /// The single feature z(x) = 1.
  static Dictionary constant(std::size_t d);
  /// z_k(x) = sqrt(2/N) cos(w_k . x + b_k).
  static Dictionary random_fourier(Eigen::MatrixXd frequencies, Eigen::VectorXd phases,
                                   double length_scale, std::uint64_t seed);

  Kind kind() const { return kind_; }
  std::size_t size() const;
  std::size_t dimension() const { return dimension_; }
  std::vector<std::string> names() const;

  const std::vector<std::vector<unsigned>>& exponents() const { return exponents_; }
  /// N x d.
  const Eigen::MatrixXd& frequencies() const { return frequencies_; }
  const Eigen::VectorXd& phases() const { return phases_; }
  double length_scale() const { return length_scale_; }
  std::uint64_t seed() const { return seed_; }

  /// N x n matrix whose columns are z(x_i) for the rows x_i of X.
  Eigen::MatrixXd evaluate(const Eigen::MatrixXd& X) const;

 private:
  Dictionary() = default;

  Kind kind_ = Kind::monomial;
  std::size_t dimension_ = 0;
  std::vector<std::vector<unsigned>> exponents_;
  Eigen::MatrixXd frequencies_;
  Eigen::VectorXd phases_;
  double length_scale_ = 0.0;
  std::uint64_t seed_ = 0;
};

struct KernelSpec {
  enum class Family { gaussian_rbf, linear_features };

  Family family = Family::gaussian_rbf;
  double length_scale = 1.0;
  /// Feature map of the linear_features family, k(x, y) = z(x)^T z(y).
  std::shared_ptr<const Dictionary> dictionary;

  static KernelSpec gaussian(double length_scale);
  static KernelSpec linear(Dictionary dictionary);

  void validate() const;
  std::string family_name() const;
};

/// k(x_i, y_j) for rows of X (n x d) and Y (m x d).
Eigen::MatrixXd kernel_matrix(const KernelSpec& k, const Eigen::MatrixXd& X,
                              const Eigen::MatrixXd& Y);

/// [k(x_i, x_j)], exactly symmetric; divided by n when scale_by_n.
Eigen::MatrixXd gram_matrix(const KernelSpec& k, const Eigen::MatrixXd& X, bool scale_by_n);

/// Columns z(x_i) of the dictionary.
Eigen::MatrixXd evaluate_dictionary(const Dictionary& dict, const Eigen::MatrixXd& X);

/// Bochner sampling: w_k ~ N(0, 2/l^2 I_d), b_k ~ U[0, 2 pi).
Dictionary rff_dictionary(const KernelSpec& k, std::size_t count, std::size_t d,
                          std::uint64_t seed);

/// Median pairwise Euclidean distance over at most max_points evenly strided rows.
double median_heuristic(const Eigen::MatrixXd& X, std::size_t max_points = 2000);

}  // namespace larrr
