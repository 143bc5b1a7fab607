#include "larrr/model_io.hpp"

#include "larrr/error.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace larrr {

// ---------------------------------------------------------------- hashing

std::string sha256_hex(const void* data, std::size_t size) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data, size, digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("sha256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  return sha256_hex(bytes.data(), bytes.size());
}

std::string sha256_states(const Eigen::MatrixXd& states) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = states;
  return sha256_hex(rm.data(), static_cast<std::size_t>(rm.size()) * sizeof(double));
}

// ---------------------------------------------------------------- helpers

namespace {

json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double as_number(const json& j) {
  if (j.is_null()) return -std::numeric_limits<double>::infinity();
  return j.get<double>();
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

Eigen::VectorXd json_vec(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = as_number(a[i]);
  return v;
}

// Matrix as an array of rows.
json mat_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

Eigen::MatrixXd json_mat(const json& a, Eigen::Index cols_if_empty = 0) {
  if (a.empty()) return Eigen::MatrixXd(0, cols_if_empty);
  const auto rows = static_cast<Eigen::Index>(a.size());
  const auto cols = static_cast<Eigen::Index>(a[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = a[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != cols) throw InputError("ragged matrix in JSON");
    m.row(i) = json_vec(row).transpose();
  }
  return m;
}

// Complex matrix stored column-wise: one array per eigenfunction.
json cmat_json(const Eigen::MatrixXcd& m) {
  json re = json::array();
  json im = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    re.push_back(vec_json(m.col(c).real()));
    im.push_back(vec_json(m.col(c).imag()));
  }
  return json{{"re", re}, {"im", im}};
}

Eigen::MatrixXcd json_cmat(const json& j) {
  const Eigen::MatrixXd re = json_mat(j.at("re"));
  const Eigen::MatrixXd im = json_mat(j.at("im"));
  if (re.rows() != im.rows() || re.cols() != im.cols()) throw InputError("complex matrix shape mismatch");
  Eigen::MatrixXcd m(re.cols(), re.rows());
  m.real() = re.transpose();
  m.imag() = im.transpose();
  return m;
}

json complex_list(const std::vector<std::complex<double>>& v, bool real_part) {
  json a = json::array();
  for (const auto& z : v) a.push_back(number(real_part ? z.real() : z.imag()));
  return a;
}

}  // namespace

// ---------------------------------------------------------------- weights, features

json to_json(const LaplaceWeights& w) {
  return json{{"mode", to_string(w.mode)},
              {"mu", w.mu},
              {"step", w.step},
              {"nodes", vec_json(w.nodes)},
              {"weights", vec_json(w.weights)}};
}

LaplaceWeights weights_from_json(const json& j) {
  LaplaceWeights w;
  w.mode = weight_mode_from_string(j.at("mode").get<std::string>());
  w.mu = j.at("mu").get<double>();
  w.step = j.at("step").get<double>();
  w.nodes = json_vec(j.at("nodes"));
  w.weights = json_vec(j.at("weights"));
  return w;
}

json to_json(const Dictionary& dict) {
  if (dict.kind() == Dictionary::Kind::rff) {
    return json{{"kind", "rff"},
                {"dimension", dict.dimension()},
                {"length_scale", dict.length_scale()},
                {"seed", dict.seed()},
                {"frequencies", mat_json(dict.frequencies())},
                {"phases", vec_json(dict.phases())}};
  }
  return json{{"kind", "monomial"},
              {"dimension", dict.dimension()},
              {"names", dict.names()},
              {"exponents", dict.exponents()}};
}

Dictionary dictionary_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "rff") {
    return Dictionary::random_fourier(json_mat(j.at("frequencies")), json_vec(j.at("phases")),
                                      j.at("length_scale").get<double>(),
                                      j.at("seed").get<std::uint64_t>());
  }
  if (kind == "monomial") {
    return Dictionary::from_exponents(j.at("dimension").get<std::size_t>(),
                                      j.at("exponents").get<std::vector<std::vector<unsigned>>>());
  }
  throw InputError("unknown dictionary kind '" + kind + "'");
}

json to_json(const KernelSpec& k) {
  json j{{"family", k.family_name()}};
  if (k.family == KernelSpec::Family::gaussian_rbf) {
    j["length_scale"] = k.length_scale;
  } else {
    j["dictionary"] = to_json(*k.dictionary);
  }
  return j;
}

KernelSpec kernel_from_json(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "gaussian_rbf") return KernelSpec::gaussian(j.at("length_scale").get<double>());
  if (family == "linear_features") return KernelSpec::linear(dictionary_from_json(j.at("dictionary")));
  throw InputError("unknown kernel family '" + family + "'");
}

// ---------------------------------------------------------------- model

json to_json(const SpectralModel& m) {
  json config{{"mu", m.config.mu},
              {"gamma", m.config.gamma},
              {"rank", m.config.rank},
              {"self_adjoint", m.config.self_adjoint},
              {"jitter", m.config.jitter},
              {"weights", to_json(m.config.weights)}};
  const auto& d = m.diagnostics;
  json diagnostics{{"covariance_asymmetry", d.covariance_asymmetry},
                   {"cross_asymmetry", d.cross_asymmetry},
                   {"line5_asymmetry", d.line5_asymmetry},
                   {"reduced_asymmetry", d.reduced_asymmetry},
                   {"normalization_residual", d.normalization_residual},
                   {"basis_rank", d.basis_rank},
                   {"biorthogonality", cmat_json(d.biorthogonality)}};
  json provenance = json::object();
  for (const auto& [key, value] : m.provenance) provenance[key] = value;

  json j{{"format", "larrr-spectral-model"},
         {"format_version", 1},
         {"tool_version", kToolVersion},
         {"mode", to_string(m.mode)},
         {"eigenvalues_re", complex_list(m.eigenvalues, true)},
         {"eigenvalues_im", complex_list(m.eigenvalues, false)},
         {"nu_re", complex_list(m.nu, true)},
         {"nu_im", complex_list(m.nu, false)},
         {"singular_values", vec_json(m.singular_values)},
         {"metric_distortions", vec_json(m.metric_distortions)},
         {"config", config},
         {"jitter_used", m.jitter_used},
         {"kernel", m.train_states.size() ? to_json(m.kernel) : json(nullptr)},
         {"data_sha256", m.train_states.size() ? sha256_states(m.train_states) : std::string()},
         {"provenance", provenance},
         {"warnings", m.warnings},
         {"diagnostics", diagnostics},
         {"training_states", mat_json(m.train_states)},
         {"right_coefficients", cmat_json(m.right_coef)},
         {"left_coefficients", cmat_json(m.left_coef)},
         {"pairing", cmat_json(m.pairing)}};
  return j;
}

SpectralModel model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "larrr-spectral-model") {
      throw InputError("not a spectral model document");
    }
    SpectralModel m;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode != "primal" && mode != "dual") throw InputError("unknown model mode '" + mode + "'");
    m.mode = mode == "primal" ? FitMode::primal : FitMode::dual;
    const json& c = j.at("config");
    m.config.mu = c.at("mu").get<double>();
    m.config.gamma = c.at("gamma").get<double>();
    m.config.rank = c.at("rank").get<std::size_t>();
    m.config.self_adjoint = c.at("self_adjoint").get<bool>();
    m.config.jitter = c.at("jitter").get<double>();
    m.config.weights = weights_from_json(c.at("weights"));

    const Eigen::VectorXd lre = json_vec(j.at("eigenvalues_re"));
    const Eigen::VectorXd lim = json_vec(j.at("eigenvalues_im"));
    const Eigen::VectorXd nre = json_vec(j.at("nu_re"));
    const Eigen::VectorXd nim = json_vec(j.at("nu_im"));
    if (lre.size() != lim.size() || nre.size() != lre.size() || nim.size() != lre.size()) {
      throw InputError("eigenvalue arrays have different lengths");
    }
    for (Eigen::Index i = 0; i < lre.size(); ++i) {
      m.eigenvalues.emplace_back(lre[i], std::isinf(lre[i]) ? 0.0 : lim[i]);
      m.nu.emplace_back(nre[i], nim[i]);
    }
    m.singular_values = json_vec(j.at("singular_values"));
    m.metric_distortions = json_vec(j.at("metric_distortions"));
    m.jitter_used = j.at("jitter_used").get<double>();
    for (const auto& [key, value] : j.at("provenance").items()) {
      m.provenance[key] = value.get<std::string>();
    }
    m.warnings = j.at("warnings").get<std::vector<std::string>>();

    const json& d = j.at("diagnostics");
    m.diagnostics.covariance_asymmetry = d.at("covariance_asymmetry").get<double>();
    m.diagnostics.cross_asymmetry = d.at("cross_asymmetry").get<double>();
    m.diagnostics.line5_asymmetry = d.at("line5_asymmetry").get<double>();
    m.diagnostics.reduced_asymmetry = d.at("reduced_asymmetry").get<double>();
    m.diagnostics.normalization_residual = d.at("normalization_residual").get<double>();
    m.diagnostics.basis_rank = d.at("basis_rank").get<Eigen::Index>();
    m.diagnostics.biorthogonality = json_cmat(d.at("biorthogonality"));

    m.right_coef = json_cmat(j.at("right_coefficients"));
    m.left_coef = json_cmat(j.at("left_coefficients"));
    m.pairing = json_cmat(j.at("pairing"));
    if (!j.at("kernel").is_null()) {
      m.kernel = kernel_from_json(j.at("kernel"));
      m.train_states = json_mat(j.at("training_states"));
      const std::string expected = j.at("data_sha256").get<std::string>();
      if (sha256_states(m.train_states) != expected) {
        throw InputError("training states do not match data_sha256");
      }
      m.right_train = m.evaluate_right(m.train_states);
    }
    if (static_cast<std::size_t>(m.right_coef.cols()) != m.rank() ||
        static_cast<std::size_t>(m.pairing.cols()) != m.rank()) {
      throw InputError("coefficient arrays do not match the number of eigenvalues");
    }
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model JSON: ") + e.what());
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_json(const json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

void save_model(const SpectralModel& model, const std::filesystem::path& path,
                const std::string& timestamp) {
  json doc = to_json(model);
  if (!timestamp.empty()) doc["timestamp"] = timestamp;
  write_json(doc, path);
}

SpectralModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(read_json(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- potentials, fixtures

json to_json(const Potential& p) {
  json g = json::array();
  for (const auto& t : p.gaussians()) {
    g.push_back(json{{"amplitude", t.amplitude}, {"center", t.center}, {"rate", t.rate}});
  }
  return json{{"name", p.name()}, {"scale", p.scale()}, {"polynomial", p.polynomial()}, {"gaussians", g}};
}

Potential potential_from_json(const json& j) {
  std::vector<GaussianTerm> g;
  for (const auto& t : j.at("gaussians")) {
    g.push_back({t.at("amplitude").get<double>(), t.at("center").get<double>(), t.at("rate").get<double>()});
  }
  return Potential(j.at("name").get<std::string>(), j.at("polynomial").get<std::vector<double>>(),
                   std::move(g), j.at("scale").get<double>());
}

double OracleFixture::refinement_change() const {
  double worst = 0.0;
  const Eigen::Index k = std::min(eigenvalues.size(), refined_eigenvalues.size());
  for (Eigen::Index i = 0; i < k; ++i) {
    const double ref = refined_eigenvalues[i];
    if (std::abs(ref) < 1e-8) continue;
    worst = std::max(worst, std::abs(eigenvalues[i] - ref) / std::abs(ref));
  }
  return worst;
}

json to_json(const OracleFixture& f) {
  return json{{"format", "larrr-oracle-fixture"},
              {"tool_version", f.tool_version},
              {"command", f.command},
              {"potential", to_json(f.potential)},
              {"friction", f.friction},
              {"kT", f.kT},
              {"grid", {{"a", f.a}, {"b", f.b}, {"G", f.grid}}},
              {"eigenvalues", vec_json(f.eigenvalues)},
              {"refinement", {{"G", 2 * f.grid},
                              {"eigenvalues", vec_json(f.refined_eigenvalues)},
                              {"max_relative_change", f.refinement_change()}}}};
}

OracleFixture fixture_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "larrr-oracle-fixture") {
      throw InputError("not an oracle fixture document");
    }
    OracleFixture f;
    f.tool_version = j.at("tool_version").get<std::string>();
    f.command = j.at("command").get<std::string>();
    f.potential = potential_from_json(j.at("potential"));
    f.friction = j.at("friction").get<double>();
    f.kT = j.at("kT").get<double>();
    f.a = j.at("grid").at("a").get<double>();
    f.b = j.at("grid").at("b").get<double>();
    f.grid = j.at("grid").at("G").get<Eigen::Index>();
    f.eigenvalues = json_vec(j.at("eigenvalues"));
    f.refined_eigenvalues = json_vec(j.at("refinement").at("eigenvalues"));
    return f;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed oracle fixture: ") + e.what());
  }
}

}  // namespace larrr
