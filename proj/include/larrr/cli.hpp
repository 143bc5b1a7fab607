#pragma once

#include "larrr/estimator.hpp"
#include "larrr/model_io.hpp"
#include "larrr/simulate.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace larrr::cli {

// ---------------------------------------------------------------- config

struct LangevinProcess {
  Potential potential = Potential::triple_well();
  double friction = 1.0;
  double kT = 1.0;
};

struct OUProcess {
  Eigen::MatrixXd drift;
  Eigen::MatrixXd diffusion;
  /// Observation times for euler_maruyama_on_grid; empty means uniform output.
  Eigen::VectorXd grid;
};

struct CsvProcess {
  std::vector<std::filesystem::path> paths;
};

struct ProcessConfig {
  std::variant<LangevinProcess, OUProcess, CsvProcess> kind;
  double step = 1e-3;
  std::uint64_t burn_in = kDefaultBurnIn;
  std::size_t n_out = 1000;
  std::size_t out_stride = 1;
  std::size_t trajectories = 1;
  std::uint64_t seed = 0;
  std::optional<Eigen::VectorXd> initial_state;

  bool is_csv() const { return std::holds_alternative<CsvProcess>(kind); }
};

struct FeatureConfig {
  FitMode mode = FitMode::dual;
  /// Primal dictionary, or the dictionary behind a linear_features kernel.
  std::optional<Dictionary> dictionary;
  /// RFF requests are resolved once the state dimension is known.
  std::size_t rff_count = 0;
  double rff_length_scale = 0.0;
  std::uint64_t rff_seed = 0;
  /// Monomial request resolved against the state dimension.
  std::optional<unsigned> monomial_degree;
  std::string family = "gaussian_rbf";  // dual mode
  std::optional<double> length_scale;   // empty means median heuristic
};

struct EstimatorConfig {
  FitMode mode = FitMode::dual;
  bool transfer_operator = false;
  double mu = 1.0;
  double gamma = 1e-6;
  std::size_t rank = 1;
  std::optional<std::size_t> horizon;
  bool self_adjoint = true;
  double jitter = 0.0;
  std::size_t subsample = 1;
  std::size_t max_samples = 4000;
  bool bundle = false;
};

struct OracleConfig {
  Potential potential = Potential::triple_well();
  double friction = 1.0;
  double kT = 1.0;
  double a = -1.2;
  double b = 1.2;
  Eigen::Index grid = 2000;
  Eigen::Index count = 6;
};

struct ReferenceSpec {
  enum class Type { fixture, ou, values } type = Type::fixture;
  std::filesystem::path fixture;
  Eigen::MatrixXd drift;
  std::vector<std::complex<double>> values;
};

struct CompareConfig {
  ReferenceSpec reference;
  std::vector<std::filesystem::path> models;
  std::size_t count = 0;  // 0: model rank
};

struct ForecastConfig {
  std::filesystem::path model;
  Eigen::VectorXd x0;
  std::vector<double> times;
  std::string observable = "coordinate";
  std::size_t coordinate = 1;
  double threshold = 0.0;
  std::filesystem::path values_file;
  std::string column;
};

struct RunConfig {
  std::optional<ProcessConfig> process;
  std::optional<FeatureConfig> features;
  std::optional<EstimatorConfig> estimator;
  std::optional<OracleConfig> oracle;
  std::optional<CompareConfig> compare;
  std::optional<ForecastConfig> forecast;
  std::filesystem::path output = "out";
  std::filesystem::path source;  // config file, for messages and relative paths
};

/// Validates the whole document; unknown keys and bad values raise
/// InputError naming the offending key path.
RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

// ---------------------------------------------------------------- pipeline

/// Trajectories i = 0..count-1 with seeds seed + i, optionally in parallel.
std::vector<Trajectory> simulate_trajectories(const ProcessConfig& process, unsigned jobs = 1);
/// Simulated or loaded trajectories for the process section.
std::vector<Trajectory> obtain_trajectories(const ProcessConfig& process, unsigned jobs = 1);

FitConfig make_fit_config(const EstimatorConfig& est, double dt);
SpectralModel fit_trajectory(const Trajectory& traj, const FeatureConfig& features,
                             const EstimatorConfig& est);
SpectralModel fit_bundle(const std::vector<Trajectory>& trajectories, const FeatureConfig& features,
                         const EstimatorConfig& est);

std::string model_label(const SpectralModel& model);

struct ErrorRow {
  std::string model;
  std::string estimator;  // IG or TO
  double dt = 0.0;
  std::size_t index = 0;             // 1-based, trivial eigenvalue included
  std::size_t index_nontrivial = 0;  // 0 for the trivial eigenvalue
  std::complex<double> estimate;
  std::complex<double> reference;
  bool relative = true;
  double error = 0.0;      // signed: Re((est - ref) / ref) or Re(est - ref)
  double abs_error = 0.0;  // |est - ref| / |ref| or |est - ref|
};

struct SummaryRow {
  std::string estimator;
  double dt = 0.0;
  std::size_t index = 0;
  std::size_t index_nontrivial = 0;
  bool relative = true;
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

std::vector<std::complex<double>> reference_values(const ReferenceSpec& ref, std::size_t count);
std::vector<ErrorRow> compare_model(const std::string& name, const SpectralModel& model,
                                    const std::vector<std::complex<double>>& reference,
                                    std::size_t count);
std::vector<SummaryRow> summarize(const std::vector<ErrorRow>& rows);
void write_error_csv(const std::vector<ErrorRow>& rows, const std::filesystem::path& path);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path);

OracleFixture build_fixture(const OracleConfig& cfg, const std::string& command);

/// Observable values on the training states of the model.
Eigen::VectorXd observable_values(const ForecastConfig& cfg, const SpectralModel& model);

// ---------------------------------------------------------------- commands

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;
  std::vector<std::filesystem::path> inputs;
  /// Written into model JSON; empty disables the field.
  std::string timestamp;
};

int cmd_simulate(const CommandOptions& opts, std::ostream& log);
int cmd_fit(const CommandOptions& opts, std::ostream& log);
int cmd_compare(const CommandOptions& opts, std::ostream& log);
int cmd_forecast(const CommandOptions& opts, std::ostream& log);
int cmd_oracle(const CommandOptions& opts, std::ostream& log);

/// Parses argv, dispatches, maps exceptions to exit codes (1 numerical,
/// 2 input/usage).
int run(int argc, char** argv);

std::string utc_timestamp();

}  // namespace larrr::cli
