#include "larrr/cli.hpp"

#include "larrr/error.hpp"

#include <cmath>
#include <set>

namespace larrr::cli {

namespace {

// Typed access to one JSON object that remembers which keys were read, so
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(key, "is required");
    return j_.at(key);
  }

  Section sub(const std::string& key) { return Section(raw(key), name(key)); }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) fail(key, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "must be finite");
    return x;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : mark(key, fallback); }

  double positive(const std::string& key) {
    const double x = number(key);
    if (!(x > 0.0)) fail(key, "must be > 0");
    return x;
  }
  double positive(const std::string& key, double fallback) { return has(key) ? positive(key) : mark(key, fallback); }

  std::uint64_t integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      fail(key, "must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  std::uint64_t integer(const std::string& key, std::uint64_t fallback) {
    return has(key) ? integer(key) : mark(key, fallback);
  }
  std::size_t count(const std::string& key, std::size_t min) {
    const auto v = integer(key);
    if (v < min) fail(key, "must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
  }
  std::size_t count(const std::string& key, std::size_t min, std::size_t fallback) {
    return has(key) ? count(key, min) : mark(key, fallback);
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return mark(key, fallback);
    const json& v = raw(key);
    if (!v.is_boolean()) fail(key, "must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) fail(key, "must be a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : mark(key, fallback);
  }
  std::string choice(const std::string& key, const std::set<std::string>& options) {
    const std::string v = string(key);
    if (!options.count(v)) fail(key, "has unsupported value '" + v + "'");
    return v;
  }
  std::string choice(const std::string& key, const std::set<std::string>& options,
                     const std::string& fallback) {
    return has(key) ? choice(key, options) : mark(key, fallback);
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) fail(key, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) fail(key, "must contain finite numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  Eigen::VectorXd vector(const std::string& key) {
    const json& v = raw(key);
    if (v.is_number()) return Eigen::VectorXd::Constant(1, number(key));
    const auto xs = numbers(key);
    return Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  }

  /// Square or rectangular matrix given as rows; a bare number is 1x1.
  Eigen::MatrixXd matrix(const std::string& key) {
    const json& v = raw(key);
    if (v.is_number()) return Eigen::MatrixXd::Constant(1, 1, number(key));
    if (!v.is_array() || v.empty()) fail(key, "must be a number or a non-empty array of rows");
    const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
    if (cols == 0) fail(key, "rows must be non-empty arrays");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_array() || v[i].size() != cols) fail(key, "rows must have equal length");
      for (std::size_t c = 0; c < cols; ++c) {
        if (!v[i][c].is_number()) fail(key, "entries must be numbers");
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v[i][c].get<double>();
      }
    }
    if (!m.allFinite()) fail(key, "entries must be finite");
    return m;
  }

  std::vector<std::filesystem::path> paths(const std::string& key, const std::filesystem::path& base) {
    const json& v = raw(key);
    if (!v.is_array()) fail(key, "must be an array of paths");
    std::vector<std::filesystem::path> out;
    for (const auto& e : v) {
      if (!e.is_string()) fail(key, "must contain strings");
      out.push_back(resolve(e.get<std::string>(), base));
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw InputError("config: unknown key '" + name(key) + "'");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw InputError("config: " + name(key) + " " + what);
  }

  std::string name(const std::string& key) const {
    if (key.empty()) return path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  static std::filesystem::path resolve(const std::string& p, const std::filesystem::path& base) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) path = base / path;
    return path.lexically_normal();
  }

 private:
  template <typename T>
  T mark(const std::string& key, T fallback) {
    seen_.insert(key);
    return fallback;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Potential parse_potential(Section& s, const std::string& key) {
  const json& v = s.raw(key);
  if (v.is_string()) {
    const std::string name = v.get<std::string>();
    if (name == "triple_well") return Potential::triple_well();
    if (name == "quadratic") return Potential::quadratic(s.positive("stiffness", 1.0));
    if (name == "free") return Potential::free();
    s.fail(key, "names an unknown potential '" + name + "'");
  }
  Section p = s.sub(key);
  std::vector<GaussianTerm> gaussians;
  if (p.has("gaussians")) {
    const json& g = p.raw("gaussians");
    if (!g.is_array()) p.fail("gaussians", "must be an array");
    for (std::size_t i = 0; i < g.size(); ++i) {
      Section t(g[i], p.name("gaussians[" + std::to_string(i) + "]"));
      GaussianTerm term{t.number("amplitude"), t.number("center"), t.number("rate")};
      if (term.rate < 0.0) t.fail("rate", "must be >= 0");
      t.finish();
      gaussians.push_back(term);
    }
  }
  std::vector<double> poly;
  if (p.has("polynomial")) poly = p.numbers("polynomial");
  Potential out(p.string("name", "custom"), std::move(poly), std::move(gaussians), p.number("scale", 1.0));
  p.finish();
  return out;
}

void parse_sim_common(Section& s, ProcessConfig& pc) {
  pc.step = s.positive("step");
  pc.burn_in = s.integer("burn_in", kDefaultBurnIn);
  pc.n_out = s.count("n_out", 2, 1000);
  pc.out_stride = s.count("out_stride", 1, 1);
  pc.trajectories = s.count("trajectories", 1, 1);
  pc.seed = s.integer("seed", 0);
}

ProcessConfig parse_process(Section s, const std::filesystem::path& base) {
  ProcessConfig pc;
  const std::string type = s.choice("type", {"langevin", "ou", "csv"});
  if (type == "csv") {
    CsvProcess csv{s.paths("paths", base)};
    if (csv.paths.empty()) s.fail("paths", "must name at least one file");
    pc.trajectories = csv.paths.size();
    pc.kind = std::move(csv);
  } else if (type == "langevin") {
    LangevinProcess lp;
    lp.potential = parse_potential(s, "potential");
    lp.friction = s.positive("friction", 1.0);
    lp.kT = s.positive("kT", 1.0);
    parse_sim_common(s, pc);
    if (s.has("initial_state")) pc.initial_state = Eigen::VectorXd::Constant(1, s.number("initial_state"));
    pc.kind = std::move(lp);
  } else {
    OUProcess op;
    op.drift = s.matrix("drift");
    op.diffusion = s.matrix("diffusion");
    if (op.drift.rows() != op.drift.cols()) s.fail("drift", "must be square");
    if (op.diffusion.rows() != op.drift.rows()) s.fail("diffusion", "must have as many rows as drift");
    try {
      require_stable(op.drift);
    } catch (const InputError& e) {
      s.fail("drift", std::string("is invalid: ") + e.what());
    }
    parse_sim_common(s, pc);
    if (s.has("initial_state")) {
      pc.initial_state = s.vector("initial_state");
      if (pc.initial_state->size() != op.drift.rows()) s.fail("initial_state", "has wrong dimension");
    }
    if (s.has("grid")) {
      Section g = s.sub("grid");
      const std::string gt = g.choice("type", {"geometric", "explicit"});
      if (gt == "explicit") {
        op.grid = g.vector("times");
      } else {
        const double first = g.positive("first");
        const double last = g.positive("last");
        const std::size_t points = g.count("points", 3);
        if (!(last > first)) g.fail("last", "must exceed first");
        op.grid.resize(static_cast<Eigen::Index>(points));
        op.grid[0] = 0.0;
        const double ratio = std::pow(last / first, 1.0 / static_cast<double>(points - 2));
        for (std::size_t j = 1; j < points; ++j) {
          op.grid[static_cast<Eigen::Index>(j)] =
              j + 1 == points ? last : first * std::pow(ratio, static_cast<double>(j - 1));
        }
      }
      g.finish();
      if (op.grid.size() < 2) s.fail("grid", "needs at least 2 times");
      for (Eigen::Index j = 1; j < op.grid.size(); ++j) {
        if (!(op.grid[j] > op.grid[j - 1])) s.fail("grid", "times must be strictly increasing");
      }
    }
    pc.kind = std::move(op);
  }
  s.finish();
  return pc;
}

void parse_dictionary(Section d, FeatureConfig& fc) {
  const std::string kind = d.choice("kind", {"monomial", "constant", "rff"});
  if (kind == "monomial") {
    fc.monomial_degree = static_cast<unsigned>(d.count("degree", 0));
  } else if (kind == "constant") {
    fc.monomial_degree = 0u;
  } else {
    fc.rff_count = d.count("count", 1);
    fc.rff_length_scale = d.positive("length_scale");
    fc.rff_seed = d.integer("seed", 0);
  }
  d.finish();
}

FeatureConfig parse_features(Section s) {
  FeatureConfig fc;
  const std::string type = s.choice("type", {"dictionary", "kernel"});
  if (type == "dictionary") {
    fc.mode = FitMode::primal;
    parse_dictionary(s.sub("dictionary"), fc);
  } else {
    fc.mode = FitMode::dual;
    fc.family = s.choice("family", {"gaussian_rbf", "linear_features"});
    if (fc.family == "gaussian_rbf") {
      if (!s.has("length_scale")) {
        s.string("length_scale", "median");
      } else if (s.raw("length_scale").is_string()) {
        if (s.string("length_scale") != "median") s.fail("length_scale", "must be a number or \"median\"");
      } else {
        fc.length_scale = s.positive("length_scale");
      }
    } else {
      parse_dictionary(s.sub("dictionary"), fc);
    }
  }
  s.finish();
  return fc;
}

EstimatorConfig parse_estimator(Section s) {
  EstimatorConfig ec;
  ec.mode = s.choice("mode", {"primal", "dual"}) == "primal" ? FitMode::primal : FitMode::dual;
  ec.transfer_operator =
      s.choice("weights", {"laplace", "transfer_operator"}, "laplace") == "transfer_operator";
  ec.mu = s.positive("mu", 1.0);
  ec.gamma = s.positive("gamma");
  ec.rank = s.count("rank", 1);
  if (s.has("horizon")) ec.horizon = s.count("horizon", 1);
  ec.self_adjoint = s.boolean("self_adjoint", true);
  ec.jitter = s.number("jitter", 0.0);
  if (ec.jitter < 0.0) s.fail("jitter", "must be >= 0");
  ec.subsample = s.count("subsample", 1, 1);
  ec.max_samples = s.count("max_samples", 2, 4000);
  ec.bundle = s.boolean("bundle", false);
  if (ec.bundle && ec.transfer_operator) s.fail("bundle", "is not available with transfer_operator weights");
  s.finish();
  return ec;
}

OracleConfig parse_oracle(Section s) {
  OracleConfig oc;
  oc.potential = parse_potential(s, "potential");
  oc.friction = s.positive("friction", 1.0);
  oc.kT = s.positive("kT", 1.0);
  oc.a = s.number("a", -1.2);
  oc.b = s.number("b", 1.2);
  if (!(oc.b > oc.a)) s.fail("b", "must exceed a");
  oc.grid = static_cast<Eigen::Index>(s.count("G", 50, 2000));
  oc.count = static_cast<Eigen::Index>(s.count("count", 1, 6));
  if (oc.count > oc.grid) s.fail("count", "must not exceed G");
  s.finish();
  return oc;
}

CompareConfig parse_compare(Section s, const std::filesystem::path& base) {
  CompareConfig cc;
  Section r = s.sub("reference");
  const std::string type = r.choice("type", {"fixture", "ou", "values"});
  if (type == "fixture") {
    cc.reference.type = ReferenceSpec::Type::fixture;
    cc.reference.fixture = Section::resolve(r.string("path"), base);
  } else if (type == "ou") {
    cc.reference.type = ReferenceSpec::Type::ou;
    cc.reference.drift = r.matrix("drift");
  } else {
    cc.reference.type = ReferenceSpec::Type::values;
    for (double v : r.numbers("eigenvalues")) cc.reference.values.emplace_back(v, 0.0);
  }
  r.finish();
  if (s.has("models")) cc.models = s.paths("models", base);
  cc.count = s.count("count", 1, 0);
  s.finish();
  return cc;
}

ForecastConfig parse_forecast(Section s, const std::filesystem::path& base) {
  ForecastConfig fc;
  if (s.has("model")) fc.model = Section::resolve(s.string("model"), base);
  fc.x0 = s.vector("x0");
  fc.times = s.numbers("times");
  if (fc.times.empty()) s.fail("times", "must not be empty");
  for (double t : fc.times) {
    if (t < 0.0) s.fail("times", "must be >= 0");
  }
  fc.observable = s.choice("observable", {"coordinate", "half_line", "values"}, "coordinate");
  fc.coordinate = s.count("coordinate", 1, 1);
  fc.threshold = s.number("threshold", 0.0);
  if (fc.observable == "values") {
    fc.values_file = Section::resolve(s.string("values_file"), base);
    fc.column = s.string("column");
  }
  s.finish();
  return fc;
}

}  // namespace

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  Section top(doc, "");
  RunConfig rc;
  if (top.has("description")) top.string("description");
  if (top.has("process")) rc.process = parse_process(top.sub("process"), base_dir);
  if (top.has("features")) rc.features = parse_features(top.sub("features"));
  if (top.has("estimator")) rc.estimator = parse_estimator(top.sub("estimator"));
  if (top.has("oracle")) rc.oracle = parse_oracle(top.sub("oracle"));
  if (top.has("compare")) rc.compare = parse_compare(top.sub("compare"), base_dir);
  if (top.has("forecast")) rc.forecast = parse_forecast(top.sub("forecast"), base_dir);
  if (top.has("output")) {
    Section o = top.sub("output");
    rc.output = Section::resolve(o.string("directory"), base_dir);
    o.finish();
  } else {
    rc.output = Section::resolve("out", base_dir);
  }
  top.finish();
  if (rc.features && rc.estimator && rc.features->mode != rc.estimator->mode) {
    throw InputError("config: features.type does not match estimator.mode (dictionary needs primal, kernel needs dual)");
  }
  return rc;
}

RunConfig load_config(const std::filesystem::path& path) {
  RunConfig rc = parse_config(read_json(path), path.parent_path());
  rc.source = path;
  return rc;
}

}  // namespace larrr::cli
