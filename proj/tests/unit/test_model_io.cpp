#include "support.hpp"

#include "larrr/error.hpp"
#include "larrr/model_io.hpp"

#include <fstream>
#include <sstream>

using namespace larrr;
using namespace larrr::testing;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SpectralModel small_dual(std::uint64_t seed) {
  const Trajectory traj = triple_well_trajectory(400, seed);
  return fit_dual(KernelSpec::gaussian(0.3), traj.states(), laplace_config(1.0, 1e-5, 3, 0.05));
}

}  // namespace

TEST_SUITE("model_io") {
  TEST_CASE("sha256 known digests") {
    CHECK(sha256_hex("", 0) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc", 3) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const std::string two_blocks = "abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq";
    CHECK(sha256_hex(two_blocks.data(), two_blocks.size()) ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
    Eigen::MatrixXd a(2, 2);
    a << 1, 2, 3, 4;
    Eigen::MatrixXd b = a;
    b(0, 1) = std::nextafter(2.0, 3.0);
    CHECK(sha256_states(a) != sha256_states(b));
    CHECK(sha256_states(a) == sha256_states(Eigen::MatrixXd(a)));
  }

  TEST_CASE("model round trip through a file") {
    TempDir dir("model_io");
    for (const SpectralModel& m :
         {small_dual(1), fit_primal(Dictionary::monomials(1, 3), unit_ou_trajectory(2000, 0.05, 2).states(),
                                    laplace_config(1.0, 1e-6, 2, 0.05, false))}) {
      const auto path = dir / "model.json";
      save_model(m, path, "2026-01-01T00:00:00Z");
      const json raw = read_json(path);
      CHECK(raw.at("timestamp") == "2026-01-01T00:00:00Z");
      const SpectralModel back = load_model(path);
      CHECK(back.eigenvalues == m.eigenvalues);
      CHECK(back.nu == m.nu);
      CHECK(back.singular_values == m.singular_values);
      CHECK(back.train_states == m.train_states);
      CHECK(back.right_coef == m.right_coef);
      CHECK(back.right_train == m.evaluate_right(m.train_states));
      CHECK(to_json(back).dump(2) == to_json(m).dump(2));

      Eigen::MatrixXd probe(3, 1);
      probe << -0.7, 0.1, 0.4;
      CHECK(back.evaluate_right(probe) == m.evaluate_right(probe));
      const std::string text = slurp(path);
      CHECK(text.back() == '\n');
      CHECK(text.rfind("{\n  \"format\"", 0) == 0);
    }
  }

  TEST_CASE("negative infinity is stored as null") {
    SpectralModel m = small_dual(3);
    m.eigenvalues.back() = {-INFINITY, 0.0};
    const json j = to_json(m);
    CHECK(j.at("eigenvalues_re").back().is_null());
    const SpectralModel back = model_from_json(json::parse(j.dump()));
    CHECK(std::isinf(back.eigenvalues.back().real()));
    CHECK(back.eigenvalues.back().real() < 0.0);
  }

  TEST_CASE("tampered training states are rejected") {
    TempDir dir("model_io");
    const SpectralModel m = small_dual(4);
    json j = to_json(m);
    j["training_states"][5][0] = j["training_states"][5][0].get<double>() + 1e-9;
    const auto path = dir / "bad.json";
    write_json(j, path);
    const std::string msg = thrown_message<InputError>([&] { load_model(path); });
    CHECK(contains(msg, "data_sha256"));
    CHECK(contains(msg, "bad.json"));

    j = to_json(m);
    j["format"] = "something else";
    CHECK_THROWS_AS(model_from_json(j), InputError);
    j = to_json(m);
    j.erase("config");
    CHECK(contains(thrown_message<InputError>([&] { model_from_json(j); }), "malformed model JSON"));
    CHECK(contains(thrown_message<InputError>([&] { load_model(dir / "missing.json"); }), "cannot open"));
    std::ofstream(dir / "junk.json") << "{not json";
    CHECK(contains(thrown_message<InputError>([&] { read_json(dir / "junk.json"); }), "invalid JSON"));
  }

  TEST_CASE("feature and weight documents round trip") {
    const std::vector<Dictionary> dicts{Dictionary::monomials(2, 3), Dictionary::constant(1),
                                        Dictionary::from_exponents(1, {{0}, {4}}),
                                        rff_dictionary(KernelSpec::gaussian(0.7), 16, 2, 11)};
    Gen g(71);
    const Eigen::MatrixXd X = g.matrix(5, 2);
    for (const auto& d : dicts) {
      const Dictionary back = dictionary_from_json(json::parse(to_json(d).dump()));
      CHECK(back.size() == d.size());
      if (back.dimension() == 2) CHECK(evaluate_dictionary(back, X) == evaluate_dictionary(d, X));
    }
    const KernelSpec k = kernel_from_json(to_json(KernelSpec::gaussian(0.3)));
    CHECK(gram_matrix(k, X, false) == gram_matrix(KernelSpec::gaussian(0.3), X, false));
    const KernelSpec lin = kernel_from_json(to_json(KernelSpec::linear(Dictionary::monomials(2, 2))));
    CHECK(gram_matrix(lin, X, false) == gram_matrix(KernelSpec::linear(Dictionary::monomials(2, 2)), X, false));

    for (const LaplaceWeights& w : {trapezoid_weights(0.8, 0.05, 40), transfer_operator_weights(0.2),
                                    nonuniform_weights(0.0, Eigen::Vector4d(0.0, 0.1, 0.5, 2.0))}) {
      const LaplaceWeights back = weights_from_json(json::parse(to_json(w).dump()));
      CHECK(back.mode == w.mode);
      CHECK(back.mu == w.mu);
      CHECK(back.step == w.step);
      CHECK(back.nodes == w.nodes);
      CHECK(back.weights == w.weights);
    }
  }

  TEST_CASE("oracle fixture round trip") {
    const OracleFixture f = fixture_from_json(read_json(source_dir() / "tests/fixtures/oracle_fixture.json"));
    const OracleFixture back = fixture_from_json(json::parse(to_json(f).dump()));
    CHECK(back.eigenvalues == f.eigenvalues);
    CHECK(back.refined_eigenvalues == f.refined_eigenvalues);
    CHECK(back.grid == f.grid);
    CHECK(back.potential.name() == f.potential.name());
    CHECK(back.potential.value(0.3) == f.potential.value(0.3));
    CHECK(to_json(back).dump() == to_json(f).dump());
    CHECK_THROWS_AS(fixture_from_json(json{{"format", "nope"}}), InputError);
  }
}
