#include "support.hpp"

#include "larrr/error.hpp"
#include "larrr/features.hpp"

#include <Eigen/Eigenvalues>

using namespace larrr;
using namespace larrr::testing;

TEST_SUITE("features") {
  TEST_CASE("gram matrix examples") {
    const auto k = KernelSpec::gaussian(1.0);
    Eigen::MatrixXd same(2, 1);
    same << 0.7, 0.7;
    const Eigen::MatrixXd G = gram_matrix(k, same, false);
    CHECK((G - Eigen::MatrixXd::Ones(2, 2)).cwiseAbs().maxCoeff() == 0.0);
    const double l = 1.3;
    Eigen::MatrixXd half(2, 1);
    half << 0.0, l * std::sqrt(std::log(2.0));
    CHECK(gram_matrix(KernelSpec::gaussian(l), half, false)(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
    Gen g(41);
    const Eigen::MatrixXd X = g.matrix(3, 2);
    CHECK((gram_matrix(k, X, true) - gram_matrix(k, X, false) / 3.0).cwiseAbs().maxCoeff() <= 1e-16);
    Eigen::MatrixXd bad = X;
    bad(1, 1) = INFINITY;
    CHECK_THROWS_AS(gram_matrix(k, bad, false), InputError);
    CHECK_THROWS_AS(KernelSpec::gaussian(0.0).validate(), InputError);
  }

  TEST_CASE("gram matrix is symmetric and positive semidefinite") {
    Gen g(42);
    for (int trial = 0; trial < 30; ++trial) {
      const auto n = static_cast<Eigen::Index>(g.index(1, 80));
      const auto d = static_cast<Eigen::Index>(g.index(1, 3));
      const Eigen::MatrixXd X = g.matrix(n, d) * g.uniform(0.1, 3.0);
      const Eigen::MatrixXd K = gram_matrix(KernelSpec::gaussian(g.uniform(0.05, 2.0)), X, false);
      CHECK(K == K.transpose());
      const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K).eigenvalues().minCoeff();
      CHECK(min_eig >= -1e-10 * K.trace() / static_cast<double>(n));
    }
  }

  TEST_CASE("gaussian kernel entries follow the closed form") {
    Gen g(43);
    const Eigen::MatrixXd X = g.matrix(20, 2);
    const Eigen::MatrixXd Y = g.matrix(7, 2);
    const double l = 0.8;
    const Eigen::MatrixXd K = kernel_matrix(KernelSpec::gaussian(l), X, Y);
    for (Eigen::Index i = 0; i < 20; ++i) {
      for (Eigen::Index j = 0; j < 7; ++j) {
        CHECK(K(i, j) == doctest::Approx(std::exp(-(X.row(i) - Y.row(j)).squaredNorm() / (l * l))).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("dictionary evaluation examples") {
    Eigen::MatrixXd x(2, 1);
    x << 2.0, 3.0;
    const Eigen::MatrixXd Z = evaluate_dictionary(Dictionary::monomials(1, 1), x);
    Eigen::Matrix2d want;
    want << 1, 1, 2, 3;
    CHECK(Z == want);
    Gen g(44);
    const Eigen::MatrixXd X = g.matrix(9, 3);
    const Eigen::MatrixXd C = evaluate_dictionary(Dictionary::constant(3), X);
    CHECK(C.rows() == 1);
    CHECK((C.array() == 1.0).all());
    const std::size_t N = 64;
    const Eigen::MatrixXd R = evaluate_dictionary(rff_dictionary(KernelSpec::gaussian(1.0), N, 3, 5), 5.0 * X);
    CHECK(R.cwiseAbs().maxCoeff() <= std::sqrt(2.0 / N) * (1.0 + 1e-15));
  }

  TEST_CASE("monomials in graded order") {
    const Dictionary d = Dictionary::monomials(2, 2);
    REQUIRE(d.size() == 6);
    const auto names = d.names();
    CHECK(names.front() == "1");
    Eigen::MatrixXd x(1, 2);
    x << 2.0, 5.0;
    const Eigen::VectorXd z = evaluate_dictionary(d, x).col(0);
    const std::vector<double> want{1, 2, 5, 4, 10, 25};
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(z[static_cast<Eigen::Index>(i)] == want[i]);
    const Dictionary e = Dictionary::from_exponents(2, {{0, 0}, {3, 1}});
    CHECK(evaluate_dictionary(e, x)(1, 0) == 40.0);
    CHECK_THROWS_AS(Dictionary::from_exponents(2, {{1}}), InputError);
    CHECK_THROWS_AS(evaluate_dictionary(d, Eigen::MatrixXd::Zero(3, 3)), InputError);
  }

  TEST_CASE("linear-features kernel equals Z^T Z") {
    Gen g(45);
    for (int trial = 0; trial < 20; ++trial) {
      const auto d = static_cast<std::size_t>(g.index(1, 3));
      const Dictionary dict = Dictionary::monomials(d, static_cast<unsigned>(g.index(0, 3)));
      const Eigen::MatrixXd X = g.matrix(static_cast<Eigen::Index>(g.index(1, 50)), static_cast<Eigen::Index>(d));
      const Eigen::MatrixXd Z = evaluate_dictionary(dict, X);
      const Eigen::MatrixXd ref = Z.transpose() * Z;
      const Eigen::MatrixXd K = gram_matrix(KernelSpec::linear(dict), X, false);
      CHECK((K - ref).cwiseAbs().maxCoeff() <= 1e-12 * ref.cwiseAbs().maxCoeff());
    }
  }

  TEST_CASE("random Fourier features") {
    const auto k = KernelSpec::gaussian(1.0);
    const Dictionary a = rff_dictionary(k, 50, 2, 9);
    const Dictionary b = rff_dictionary(k, 50, 2, 9);
    CHECK(a.frequencies() == b.frequencies());
    CHECK(a.phases() == b.phases());
    CHECK(rff_dictionary(k, 50, 2, 10).frequencies() != a.frequencies());
    CHECK((a.phases().array() >= 0.0).all());
    CHECK((a.phases().array() < 2.0 * M_PI).all());

    const Dictionary big = rff_dictionary(k, 4096, 1, 3);
    Gen g(46);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double x = g.uniform(-3.0, 3.0);
      const double y = std::clamp(x + g.uniform(-3.0, 3.0), x - 3.0, x + 3.0);
      Eigen::MatrixXd pts(2, 1);
      pts << x, y;
      const Eigen::MatrixXd Z = evaluate_dictionary(big, pts);
      worst = std::max(worst, std::abs(Z.col(0).dot(Z.col(1)) - std::exp(-(x - y) * (x - y))));
    }
    MESSAGE("max |z(x)^T z(y) - k(x,y)| = " << worst);
    CHECK(worst <= 0.05);

    const Dictionary flat = rff_dictionary(KernelSpec::gaussian(1e9), 200, 1, 4);
    Eigen::MatrixXd pts(2, 1);
    pts << -2.0, 3.0;
    const Eigen::MatrixXd Z = evaluate_dictionary(flat, pts);
    const double limit = 2.0 * flat.phases().array().cos().square().sum() / 200.0;
    CHECK(Z.col(0).dot(Z.col(1)) == doctest::Approx(limit).epsilon(1e-6));
  }

  TEST_CASE("RFF gram error decays with the feature count") {
    Gen g(47);
    const Eigen::MatrixXd X = g.matrix(60, 2);
    const auto k = KernelSpec::gaussian(1.0);
    const Eigen::MatrixXd exact = gram_matrix(k, X, false);
    auto error = [&](std::size_t N) {
      double sum = 0.0;
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Eigen::MatrixXd Z = evaluate_dictionary(rff_dictionary(k, N, 2, 100 + seed), X);
        sum += (Z.transpose() * Z - exact).norm();
      }
      return sum / 5.0;
    };
    for (std::size_t n0 : {64u, 256u, 1024u}) {
      const double ratio = error(4 * n0) / error(n0);
      MESSAGE("N0 = " << n0 << ": ratio " << ratio);
      CHECK(ratio <= 0.6);
    }
  }

  TEST_CASE("median heuristic") {
    Eigen::MatrixXd x(3, 1);
    x << 0.0, 1.0, 3.0;
    CHECK(median_heuristic(x) == doctest::Approx(2.0));
    CHECK_THROWS_AS(median_heuristic(Eigen::MatrixXd::Zero(1, 1)), InputError);
    CHECK_THROWS_AS(median_heuristic(Eigen::MatrixXd::Zero(4, 1)), NumericalError);
  }
}
