#include "support.hpp"

#include "larrr/cli.hpp"
#include "larrr/error.hpp"
#include "larrr/model_io.hpp"

#include <fstream>
#include <sstream>

using namespace larrr;
using namespace larrr::cli;
using namespace larrr::testing;

namespace {

int genspec(std::vector<std::string> args) {
  args.insert(args.begin(), "genspec");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

std::filesystem::path write_config(const TempDir& dir, const std::string& name, const json& doc) {
  const auto path = dir / name;
  write_json(doc, path);
  return path;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json ou_process(std::size_t n, std::size_t trajectories, std::uint64_t seed) {
  return {{"type", "ou"},         {"drift", {{-1.0}}}, {"diffusion", {{std::sqrt(2.0)}}},
          {"step", 0.001},        {"out_stride", 10},  {"n_out", n},
          {"burn_in", 20000},     {"trajectories", trajectories}, {"seed", seed}};
}

json primal_fit() {
  return {{"features", {{"type", "dictionary"}, {"dictionary", {{"kind", "monomial"}, {"degree", 1}}}}},
          {"estimator", {{"mode", "primal"}, {"mu", 1.0}, {"gamma", 1e-8}, {"rank", 2}}}};
}

std::string config_error(const json& doc) {
  return thrown_message<InputError>([&] { parse_config(doc); });
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config validation") {
    json doc{{"process", ou_process(100, 1, 1)}};
    CHECK_NOTHROW(parse_config(doc));
    doc["process"]["colour"] = "blue";
    CHECK(contains(config_error(doc), "config: unknown key 'process.colour'"));
    CHECK(contains(config_error(json{{"bogus", 1}}), "config: unknown key"));

    json lang{{"process",
               {{"type", "langevin"}, {"potential", "triple_well"}, {"kT", 0.0}, {"step", 0.001}, {"n_out", 10}}}};
    CHECK(contains(config_error(lang), "kT"));
    lang["process"]["kT"] = -1.0;
    CHECK_THROWS_AS(parse_config(lang), InputError);
    lang["process"]["kT"] = 1.0;
    CHECK_NOTHROW(parse_config(lang));
    lang["process"]["potential"] = "mexican_hat";
    CHECK(contains(config_error(lang), "unknown potential"));

    json mismatch = primal_fit();
    mismatch["estimator"]["mode"] = "dual";
    CHECK(contains(config_error(mismatch), "does not match"));
    json unstable{{"process", ou_process(100, 1, 1)}};
    unstable["process"]["drift"] = {{0.5}};
    CHECK_THROWS_AS(parse_config(unstable), InputError);
    json forecast{{"forecast", {{"x0", {1.0}}, {"times", {0.0, -1.0}}}}};
    CHECK(contains(config_error(forecast), "times"));
    forecast["forecast"]["times"] = {0.0};
    forecast["forecast"]["observable"] = "energy";
    CHECK(contains(config_error(forecast), "observable"));
  }

  TEST_CASE("exit codes") {
    TempDir dir("cli");
    json doc = primal_fit();
    doc["output"] = {{"directory", (dir / "out").string()}};
    const auto cfg = write_config(dir, "fit.json", doc);
    CHECK(genspec({"fit", "--config", cfg.string(), (dir / "missing.csv").string()}) == 2);
    CHECK(genspec({}) == 2);
    CHECK(genspec({"teleport", "--config", cfg.string()}) == 2);
    CHECK(genspec({"fit"}) == 2);
    CHECK(genspec({"fit", "--config", (dir / "nope.json").string()}) == 2);
    json bad = doc;
    bad["estimator"]["rank"] = 0;
    CHECK(genspec({"fit", "--config", write_config(dir, "bad.json", bad).string()}) == 2);

    // constant data leaves a rank-one Gram matrix, so asking for two
    // eigenpairs is a numerical failure
    const auto flat = dir / "flat.csv";
    save_csv(Trajectory(Eigen::MatrixXd::Constant(50, 1, 0.3), Eigen::VectorXd::LinSpaced(50, 0.0, 4.9)), flat);
    json dual{{"features", {{"type", "kernel"}, {"family", "gaussian_rbf"}, {"length_scale", 1.0}}},
              {"estimator", {{"mode", "dual"}, {"mu", 1.0}, {"gamma", 1e-6}, {"rank", 2}, {"horizon", 5}}},
              {"output", {{"directory", (dir / "out").string()}}}};
    CHECK(genspec({"fit", "--config", write_config(dir, "dual.json", dual).string(), flat.string()}) == 1);
  }

  TEST_CASE("simulate is deterministic and writes headers") {
    TempDir dir("cli");
    json doc{{"process", ou_process(200, 3, 42)}};
    const auto cfg = write_config(dir, "sim.json", doc);
    REQUIRE(genspec({"simulate", "--config", cfg.string(), "--out", (dir / "a").string()}) == 0);
    REQUIRE(genspec({"simulate", "--config", cfg.string(), "--out", (dir / "b").string(), "--jobs", "3"}) == 0);
    for (const char* name : {"traj_000.csv", "traj_001.csv", "traj_002.csv"}) {
      CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
    }
    CHECK(slurp(dir / "a/traj_000.csv") != slurp(dir / "a/traj_001.csv"));
    CHECK(slurp(dir / "a/traj_000.csv").rfind("t,x1\n", 0) == 0);

    REQUIRE(genspec({"simulate", "--config", cfg.string(), "--out", (dir / "c").string(), "--seed", "43"}) == 0);
    CHECK(slurp(dir / "c/traj_000.csv") == slurp(dir / "a/traj_001.csv"));

    doc["process"]["drift"] = {{-1.0, 0.0}, {0.0, -2.0}};
    doc["process"]["diffusion"] = {{1.0, 0.0}, {0.0, 1.0}};
    doc["process"]["trajectories"] = 1;
    REQUIRE(genspec({"simulate", "--config", write_config(dir, "sim2.json", doc).string(), "--out",
                     (dir / "d").string()}) == 0);
    const Trajectory t = load_csv(dir / "d/traj_000.csv");
    CHECK(t.dimension() == 2);
    CHECK(t.size() == 200);
    CHECK(slurp(dir / "d/traj_000.csv").rfind("t,x1,x2\n", 0) == 0);
  }

  TEST_CASE("fit then compare a model against itself") {
    TempDir dir("cli");
    json sim{{"process", ou_process(5000, 1, 7)}};
    REQUIRE(genspec({"simulate", "--config", write_config(dir, "sim.json", sim).string(), "--out",
                     (dir / "data").string()}) == 0);
    const auto csv = dir / "data/traj_000.csv";

    json fit = primal_fit();
    REQUIRE(genspec({"fit", "--config", write_config(dir, "fit.json", fit).string(), "--out",
                     (dir / "models").string(), csv.string()}) == 0);
    const auto model_path = dir / "models/model_000.json";
    const SpectralModel m = load_model(model_path);
    MESSAGE("lambda = " << m.eigenvalues[0] << ", " << m.eigenvalues[1]);
    CHECK(std::abs(m.eigenvalues[0]) <= 0.05);
    CHECK(std::abs(m.eigenvalues[1] + 1.0) <= 0.3);
    CHECK(m.provenance.at("source.sha256") == sha256_file(csv));
    CHECK(read_json(model_path).contains("timestamp"));

    std::vector<double> own;
    for (const auto& l : m.eigenvalues) own.push_back(l.real());
    json cmp{{"compare", {{"reference", {{"type", "values"}, {"eigenvalues", own}}}}}};
    REQUIRE(genspec({"compare", "--config", write_config(dir, "cmp.json", cmp).string(), "--out",
                     (dir / "cmp").string(), model_path.string()}) == 0);
    std::ifstream in(dir / "cmp/errors.csv");
    std::string header;
    std::getline(in, header);
    CHECK(contains(header, "model"));
    const auto err_col = [&] {
      std::stringstream hs(header);
      std::string cell;
      std::size_t i = 0;
      while (std::getline(hs, cell, ',')) {
        if (cell == "abs_error") return i;
        ++i;
      }
      return i;
    }();
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      std::stringstream ls(line);
      std::string cell;
      for (std::size_t i = 0; i <= err_col; ++i) std::getline(ls, cell, ',');
      CHECK(std::stod(cell) == 0.0);
      ++rows;
    }
    CHECK(rows == 2);
    CHECK(std::filesystem::exists(dir / "cmp/summary.csv"));

    json wrong{{"compare", {{"reference", {{"type", "values"}, {"eigenvalues", {0.0}}}}, {"count", 2}}}};
    CHECK(genspec({"compare", "--config", write_config(dir, "wrong.json", wrong).string(), "--out",
                   (dir / "cmp2").string(), model_path.string()}) == 2);
  }

  TEST_CASE("forecast command on OU") {
    TempDir dir("cli");
    json doc = primal_fit();
    doc["process"] = ou_process(20000, 1, 11);
    doc["process"]["out_stride"] = 50;
    REQUIRE(genspec({"fit", "--config", write_config(dir, "fit.json", doc).string(), "--out",
                     (dir / "m").string()}) == 0);
    json fc{{"forecast",
             {{"model", (dir / "m/model_000.json").string()}, {"x0", {1.0}}, {"times", {0.0, 0.5, 1.0}}}}};
    REQUIRE(genspec({"forecast", "--config", write_config(dir, "fc.json", fc).string(), "--out",
                     (dir / "f").string()}) == 0);
    std::ifstream in(dir / "f/forecast.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,prediction");
    for (double t : {0.0, 0.5, 1.0}) {
      REQUIRE(std::getline(in, line));
      const auto comma = line.find(',');
      CHECK(std::stod(line.substr(0, comma)) == t);
      CHECK(std::abs(std::stod(line.substr(comma + 1)) - std::exp(-t)) <= 0.1);
    }
    fc["forecast"]["x0"] = {1.0, 2.0};
    CHECK(genspec({"forecast", "--config", write_config(dir, "fc2.json", fc).string(), "--out",
                   (dir / "f2").string()}) == 2);
  }

  TEST_CASE("oracle command writes a fixture") {
    TempDir dir("cli");
    json doc{{"oracle", {{"potential", "quadratic"}, {"a", -8.0}, {"b", 8.0}, {"G", 400}, {"count", 3}}}};
    REQUIRE(genspec({"oracle", "--config", write_config(dir, "o.json", doc).string(), "--out",
                     (dir / "o").string()}) == 0);
    const OracleFixture f = fixture_from_json(read_json(dir / "o/oracle_fixture.json"));
    REQUIRE(f.eigenvalues.size() == 3);
    CHECK(std::abs(f.eigenvalues[1] + 1.0) <= 0.01);
    CHECK(f.refined_eigenvalues.size() == 3);
    CHECK(contains(f.command, "genspec oracle"));
  }

  TEST_CASE("shipped configs parse") {
    for (const auto& entry : std::filesystem::directory_iterator(source_dir() / "configs")) {
      if (entry.path().extension() != ".json" || entry.path().filename() == "schema.json") continue;
      INFO(entry.path().string());
      CHECK_NOTHROW(load_config(entry.path()));
    }
  }

  TEST_CASE("timestamp format") {
    const std::string ts = utc_timestamp();
    CHECK(ts.size() == 20);
    CHECK(ts[4] == '-');
    CHECK(ts[10] == 'T');
    CHECK(ts.back() == 'Z');
  }
}
