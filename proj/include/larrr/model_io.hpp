#pragma once

#include "larrr/estimator.hpp"
#include "larrr/oracle.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace larrr {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "larrr 0.1.0";

/// Lower-case hex SHA-256.
std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_file(const std::filesystem::path& path);
/// Hash of the row-major little-endian bytes of the state matrix.
std::string sha256_states(const Eigen::MatrixXd& states);

json to_json(const LaplaceWeights& w);
LaplaceWeights weights_from_json(const json& j);

json to_json(const Dictionary& dict);
Dictionary dictionary_from_json(const json& j);
json to_json(const KernelSpec& k);
KernelSpec kernel_from_json(const json& j);

/// Full model document. Non-finite eigenvalues are written as null.
json to_json(const SpectralModel& model);
SpectralModel model_from_json(const json& j);

void save_model(const SpectralModel& model, const std::filesystem::path& path,
                const std::string& timestamp = "");
SpectralModel load_model(const std::filesystem::path& path);

json read_json(const std::filesystem::path& path);
/// Pretty-printed with two-space indent and a trailing newline.
void write_json(const json& doc, const std::filesystem::path& path);

json to_json(const Potential& potential);
Potential potential_from_json(const json& j);

/// Ground-truth fixture for a 1D Langevin generator.
struct OracleFixture {
  Potential potential = Potential::free();
  double friction = 1.0;
  double kT = 1.0;
  double a = 0.0;
  double b = 1.0;
  Eigen::Index grid = 0;
  Eigen::VectorXd eigenvalues;
  Eigen::VectorXd refined_eigenvalues;  // at 2 * grid
  std::string command;
  std::string tool_version;

  /// max_i |lambda_i(G) - lambda_i(2G)| / |lambda_i(2G)| over nonzero entries.
  double refinement_change() const;
};

json to_json(const OracleFixture& fixture);
OracleFixture fixture_from_json(const json& j);

}  // namespace larrr
