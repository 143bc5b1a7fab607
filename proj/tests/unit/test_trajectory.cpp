#include "support.hpp"

#include "larrr/error.hpp"
#include "larrr/trajectory.hpp"

#include <fstream>

using namespace larrr;
using namespace larrr::testing;

namespace {

Trajectory ramp(Eigen::Index n, Eigen::Index d = 1) {
  Eigen::MatrixXd s(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) s(i, k) = static_cast<double>(i * d + k);
  }
  return Trajectory(s, Eigen::VectorXd::LinSpaced(n, 0.0, 0.1 * static_cast<double>(n - 1)));
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_SUITE("trajectory") {
  TEST_CASE("construction rejects invalid samples") {
    const Eigen::MatrixXd one = Eigen::MatrixXd::Zero(1, 1);
    CHECK_THROWS_AS(Trajectory(one, Eigen::VectorXd::Zero(1)), InputError);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(3, 1);
    CHECK_THROWS_AS(Trajectory(s, Eigen::Vector3d(0.0, 0.2, 0.1)), InputError);
    CHECK_THROWS_AS(Trajectory(s, Eigen::Vector3d(0.0, 0.1, 0.1)), InputError);
    s(1, 0) = NAN;
    CHECK_THROWS_AS(Trajectory(s, Eigen::Vector3d(0.0, 0.1, 0.2)), InputError);
    CHECK_THROWS_AS(Trajectory(Eigen::MatrixXd::Zero(3, 1), Eigen::Vector2d(0.0, 1.0)), InputError);
  }

  TEST_CASE("is_uniform examples") {
    const Eigen::MatrixXd s = Eigen::MatrixXd::Zero(4, 1);
    const auto u = is_uniform(Trajectory(s, Eigen::Vector4d(0.0, 0.1, 0.2, 0.3)), 1e-9);
    CHECK(u.uniform);
    CHECK(u.step == doctest::Approx(0.1).epsilon(1e-14));
    CHECK_FALSE(is_uniform(Trajectory(s.topRows(3), Eigen::Vector3d(0.0, 0.1, 0.25)), 1e-9).uniform);
    CHECK_FALSE(is_uniform(Trajectory(s.topRows(3), Eigen::Vector3d(0.0, 0.1, 0.1 + 1e-12)), 1e-9).uniform);
  }

  TEST_CASE("is_uniform is invariant under positive time rescaling") {
    Gen g(11);
    for (int trial = 0; trial < 200; ++trial) {
      const auto n = static_cast<Eigen::Index>(g.index(2, 40));
      const bool make_uniform = trial % 2 == 0;
      const double step = g.uniform(1e-3, 2.0);
      Eigen::VectorXd t = make_uniform ? Eigen::VectorXd(Eigen::VectorXd::LinSpaced(n, 0.0, step * (n - 1)))
                                       : g.times(n, 0.0, 0.5 * step, 1.5 * step);
      const Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, 1);
      const bool before = is_uniform(Trajectory(s, t)).uniform;
      const double c = std::exp2(static_cast<double>(g.index(0, 12)) - 6.0);
      const bool after = is_uniform(Trajectory(s, c * t)).uniform;
      CHECK(before == after);
    }
  }

  TEST_CASE("subsample keeps every stride-th row") {
    const Trajectory t = ramp(10);
    const Trajectory same = subsample(t, 1);
    CHECK(same.states() == t.states());
    CHECK(same.times() == t.times());
    const Trajectory s3 = subsample(t, 3);
    REQUIRE(s3.size() == 4);
    CHECK(s3.states()(0, 0) == 0.0);
    CHECK(s3.states()(1, 0) == 3.0);
    CHECK(s3.states()(2, 0) == 6.0);
    CHECK(s3.states()(3, 0) == 9.0);
    CHECK(contains(thrown_message<InputError>([&] { subsample(ramp(5), 5); }), "empty result"));
    CHECK_THROWS_AS(subsample(t, 0), InputError);
  }

  TEST_CASE("subsample composes multiplicatively") {
    Gen g(12);
    for (int trial = 0; trial < 200; ++trial) {
      const auto n = static_cast<Eigen::Index>(g.index(2, 200));
      const Trajectory t = ramp(n, 2);
      const std::size_t a = g.index(1, 8);
      const std::size_t b = g.index(1, 8);
      if (a * b >= static_cast<std::size_t>(n) || a >= static_cast<std::size_t>(n)) continue;
      const Trajectory inner = subsample(t, a);
      if (b >= inner.size()) continue;
      const Trajectory lhs = subsample(t, a * b);
      const Trajectory rhs = subsample(inner, b);
      CHECK(lhs.states() == rhs.states());
      CHECK(lhs.times() == rhs.times());
    }
  }

  TEST_CASE("bundle validates shared grid and stacks time-major") {
    CHECK_THROWS_AS(TrajectoryBundle({}), InputError);
    const Trajectory a = ramp(3);
    const Trajectory b(Eigen::MatrixXd::Constant(3, 1, -1.0), a.times());
    const TrajectoryBundle bundle({a, b});
    const Eigen::MatrixXd st = bundle.stacked_states();
    REQUIRE(st.rows() == 6);
    CHECK(st(0, 0) == 0.0);
    CHECK(st(1, 0) == -1.0);
    CHECK(st(2, 0) == 1.0);
    CHECK(st(3, 0) == -1.0);
    const Trajectory shifted(Eigen::MatrixXd::Zero(3, 1), Eigen::Vector3d(0.0, 0.1, 0.3));
    CHECK_THROWS_AS(TrajectoryBundle({a, shifted}), InputError);
    CHECK_THROWS_AS(TrajectoryBundle({a, ramp(3, 2)}), InputError);
  }

  TEST_CASE("csv parse example") {
    TempDir dir("csv");
    write_file(dir / "a.csv", "t,x1\n0.0,1.5\n0.1,1.2\n");
    const Trajectory t = load_csv(dir / "a.csv");
    CHECK(t.size() == 2);
    CHECK(t.dimension() == 1);
    CHECK(t.states()(0, 0) == 1.5);
    CHECK(t.states()(1, 0) == 1.2);
    CHECK(t.times()[1] == 0.1);
  }

  TEST_CASE("csv errors name the row") {
    TempDir dir("csv");
    write_file(dir / "bad.csv", "t,x1\n0.0,1.0\n0.1,2.0\n0.2,abc\n");
    const auto msg = thrown_message<InputError>([&] { load_csv(dir / "bad.csv"); });
    CHECK(contains(msg, "row 4"));
    CHECK(contains(msg, "abc"));
    write_file(dir / "cited.csv", "t,x1\n0.1,1.0\n0.2,abc\n");
    CHECK(contains(thrown_message<InputError>([&] { load_csv(dir / "cited.csv"); }), "row 3"));
    write_file(dir / "nohead.csv", "0.0,1.0\n0.1,2.0\n");
    CHECK(contains(thrown_message<InputError>([&] { load_csv(dir / "nohead.csv"); }), "header"));
    write_file(dir / "order.csv", "t,x1\n0.0,1.0\n0.0,2.0\n");
    CHECK(contains(thrown_message<InputError>([&] { load_csv(dir / "order.csv"); }), "not increasing"));
    CHECK(contains(thrown_message<InputError>([&] { load_csv(dir / "missing.csv"); }), "missing.csv"));
  }

  TEST_CASE("csv round trip is exact") {
    TempDir dir("csv");
    Gen g(13);
    for (int trial = 0; trial < 20; ++trial) {
      const auto n = trial == 0 ? Eigen::Index{100} : static_cast<Eigen::Index>(g.index(2, 60));
      const auto d = trial == 0 ? Eigen::Index{3} : static_cast<Eigen::Index>(g.index(1, 4));
      Eigen::MatrixXd s = g.matrix(n, d);
      s.col(0) *= std::pow(10.0, g.uniform(-200, 200));
      const Trajectory t(s, g.times(n, g.uniform(0.0, 5.0), 1e-9, 1.0));
      save_csv(t, dir / "rt.csv");
      const Trajectory back = load_csv(dir / "rt.csv");
      CHECK(back.states() == t.states());
      CHECK(back.times() == t.times());
    }
  }
}
