#include "larrr/cli.hpp"

#include "larrr/error.hpp"
#include "larrr/oracle.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace larrr::cli {

namespace {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
  }
}

std::string indexed(const std::string& stem, std::size_t i, const std::string& ext) {
  std::ostringstream os;
  os << stem << '_' << std::setw(3) << std::setfill('0') << i << ext;
  return os.str();
}

// Runs task(i) for i in [0, count) on up to `jobs` threads; the first
// exception is rethrown after all workers stop.
template <typename Task>
void parallel_for(std::size_t count, unsigned jobs, Task task) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(guard);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

Dictionary resolve_dictionary(const FeatureConfig& fc, std::size_t d) {
  if (fc.monomial_degree) return Dictionary::monomials(d, *fc.monomial_degree);
  if (fc.rff_count > 0) {
    return rff_dictionary(KernelSpec::gaussian(fc.rff_length_scale), fc.rff_count, d, fc.rff_seed);
  }
  throw InputError("config: features.dictionary is missing");
}

KernelSpec resolve_kernel(const FeatureConfig& fc, const Eigen::MatrixXd& states) {
  if (fc.family == "linear_features") {
    return KernelSpec::linear(resolve_dictionary(fc, static_cast<std::size_t>(states.cols())));
  }
  return KernelSpec::gaussian(fc.length_scale ? *fc.length_scale : median_heuristic(states));
}

void add_meta(SpectralModel& model, const Meta& meta, const std::string& prefix) {
  for (const auto& [k, v] : meta) model.provenance[prefix + k] = v;
}

}  // namespace

// ---------------------------------------------------------------- pipeline

std::vector<Trajectory> simulate_trajectories(const ProcessConfig& process, unsigned jobs) {
  if (process.is_csv()) throw InputError("simulate: process.type is csv, nothing to simulate");
  std::vector<std::optional<Trajectory>> slots(process.trajectories);
  parallel_for(process.trajectories, jobs, [&](std::size_t i) {
    const std::uint64_t seed = process.seed + i;
    if (const auto* lp = std::get_if<LangevinProcess>(&process.kind)) {
      LangevinSpec spec(lp->potential, lp->friction, lp->kT, process.step, process.burn_in, seed);
      if (process.initial_state) spec.initial_state = (*process.initial_state)[0];
      slots[i] = euler_maruyama(spec, process.n_out, process.out_stride);
    } else {
      const auto& op = std::get<OUProcess>(process.kind);
      OUSpec spec(op.drift, op.diffusion, process.step, process.burn_in, seed);
      if (process.initial_state) spec.initial_state = *process.initial_state;
      slots[i] = op.grid.size() ? euler_maruyama_on_grid(spec, op.grid)
                                : euler_maruyama(spec, process.n_out, process.out_stride);
    }
  });
  std::vector<Trajectory> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<Trajectory> obtain_trajectories(const ProcessConfig& process, unsigned jobs) {
  if (const auto* csv = std::get_if<CsvProcess>(&process.kind)) {
    std::vector<Trajectory> out;
    for (const auto& p : csv->paths) out.push_back(load_csv(p));
    return out;
  }
  return simulate_trajectories(process, jobs);
}

FitConfig make_fit_config(const EstimatorConfig& est, double dt) {
  FitConfig cfg;
  cfg.mu = est.mu;
  cfg.gamma = est.gamma;
  cfg.rank = est.rank;
  cfg.self_adjoint = est.self_adjoint;
  cfg.jitter = est.jitter;
  if (est.transfer_operator) {
    cfg.weights = transfer_operator_weights(dt);
  } else {
    cfg.weights = trapezoid_weights(est.mu, dt, est.horizon ? *est.horizon : default_horizon(est.mu, dt));
  }
  return cfg;
}

SpectralModel fit_trajectory(const Trajectory& traj, const FeatureConfig& features,
                             const EstimatorConfig& est) {
  if (features.mode != est.mode) throw InputError("features do not match estimator.mode");
  std::size_t stride = est.subsample;
  if (est.mode == FitMode::dual) {
    const std::size_t kept = (traj.size() - 1) / stride + 1;
    if (kept > est.max_samples) stride *= (kept + est.max_samples - 1) / est.max_samples;
  }
  const Trajectory data = stride > 1 ? subsample(traj, stride) : traj;
  const Uniformity u = is_uniform(data);
  if (!u.uniform) {
    throw InputError("trajectory is not uniformly sampled; use estimator.bundle on a shared grid");
  }
  const FitConfig cfg = make_fit_config(est, u.step);
  SpectralModel model = est.mode == FitMode::primal
                            ? fit_primal(resolve_dictionary(features, data.dimension()), data.states(), cfg)
                            : fit_dual(resolve_kernel(features, data.states()), data.states(), cfg);
  add_meta(model, traj.meta(), "trajectory.");
  model.provenance["fit.stride"] = std::to_string(stride);
  model.provenance["fit.samples"] = std::to_string(data.size());
  model.provenance["fit.dt"] = fmt(u.step);
  return model;
}

SpectralModel fit_bundle(const std::vector<Trajectory>& trajectories, const FeatureConfig& features,
                         const EstimatorConfig& est) {
  if (features.mode != est.mode) throw InputError("features do not match estimator.mode");
  if (est.transfer_operator) throw InputError("bundle fits use Laplace weights only");
  const TrajectoryBundle bundle(trajectories);
  const Eigen::VectorXd shifted = bundle.times().array() - bundle.times()[0];
  FitConfig cfg;
  cfg.mu = est.mu;
  cfg.gamma = est.gamma;
  cfg.rank = est.rank;
  cfg.self_adjoint = est.self_adjoint;
  cfg.jitter = est.jitter;
  cfg.weights = nonuniform_weights(est.mu, shifted);
  SpectralModel model =
      est.mode == FitMode::primal
          ? larrr::fit_bundle(bundle, cfg, resolve_dictionary(features, bundle.dimension()))
          : larrr::fit_bundle(bundle, cfg, resolve_kernel(features, bundle.stacked_states()));
  model.provenance["fit.trajectories"] = std::to_string(bundle.count());
  model.provenance["fit.grid_points"] = std::to_string(bundle.grid_size());
  model.provenance["fit.grid_conditioning"] = fmt(grid_conditioning(bundle.times()));
  return model;
}

std::string model_label(const SpectralModel& model) {
  return model.config.weights.mode == WeightMode::transfer_operator ? "TO" : "IG";
}

// ---------------------------------------------------------------- compare

std::vector<std::complex<double>> reference_values(const ReferenceSpec& ref, std::size_t count) {
  std::vector<std::complex<double>> out;
  switch (ref.type) {
    case ReferenceSpec::Type::fixture: {
      const OracleFixture f = fixture_from_json(read_json(ref.fixture));
      for (Eigen::Index i = 0; i < f.eigenvalues.size(); ++i) out.emplace_back(f.eigenvalues[i], 0.0);
      break;
    }
    case ReferenceSpec::Type::ou:
      out = ou_spectrum(ref.drift, count);
      break;
    case ReferenceSpec::Type::values:
      out = ref.values;
      break;
  }
  if (out.size() < count) {
    throw InputError("eigenvalue-count mismatch: reference has " + std::to_string(out.size()) +
                     " eigenvalues, " + std::to_string(count) + " requested");
  }
  out.resize(count);
  return out;
}

std::vector<ErrorRow> compare_model(const std::string& name, const SpectralModel& model,
                                    const std::vector<std::complex<double>>& reference,
                                    std::size_t count) {
  if (count == 0) count = model.rank();
  if (model.rank() < count || reference.size() < count) {
    throw InputError("eigenvalue-count mismatch for model '" + name + "': model has " +
                     std::to_string(model.rank()) + ", reference has " +
                     std::to_string(reference.size()) + ", compared " + std::to_string(count));
  }
  const double dt = model.config.weights.mode == WeightMode::non_uniform ? 0.0 : model.config.weights.step;
  std::vector<ErrorRow> rows;
  std::size_t nontrivial = 0;
  for (std::size_t i = 0; i < count; ++i) {
    ErrorRow row;
    row.model = name;
    row.estimator = model_label(model);
    row.dt = dt;
    row.index = i + 1;
    row.estimate = model.eigenvalues[i];
    row.reference = reference[i];
    row.relative = std::abs(row.reference) > 1e-8;
    row.index_nontrivial = row.relative ? ++nontrivial : 0;
    const std::complex<double> diff = row.estimate - row.reference;
    if (row.relative) {
      row.error = (diff / row.reference).real();
      row.abs_error = std::abs(diff) / std::abs(row.reference);
    } else {
      row.error = diff.real();
      row.abs_error = std::abs(diff);
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<ErrorRow>& rows) {
  std::vector<SummaryRow> out;
  std::vector<std::vector<double>> samples;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const SummaryRow& s) {
      return s.estimator == r.estimator && s.dt == r.dt && s.index == r.index;
    });
    if (it == out.end()) {
      SummaryRow s;
      s.estimator = r.estimator;
      s.dt = r.dt;
      s.index = r.index;
      s.index_nontrivial = r.index_nontrivial;
      s.relative = r.relative;
      out.push_back(s);
      samples.emplace_back();
      it = out.end() - 1;
    }
    samples[static_cast<std::size_t>(it - out.begin())].push_back(r.abs_error);
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto& v = samples[k];
    out[k].count = v.size();
    double sum = 0.0;
    for (double x : v) sum += x;
    out[k].mean = sum / static_cast<double>(v.size());
    out[k].median = quantile(v, 0.5);
    out[k].q25 = quantile(v, 0.25);
    out[k].q75 = quantile(v, 0.75);
    out[k].min = *std::min_element(v.begin(), v.end());
    out[k].max = *std::max_element(v.begin(), v.end());
  }
  return out;
}

void write_error_csv(const std::vector<ErrorRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << "model,estimator,dt,index,index_nontrivial,estimate_re,estimate_im,reference_re,"
         "reference_im,error_kind,error,abs_error\n";
  for (const auto& r : rows) {
    out << r.model << ',' << r.estimator << ',' << fmt(r.dt) << ',' << r.index << ','
        << r.index_nontrivial << ',' << fmt(r.estimate.real()) << ',' << fmt(r.estimate.imag())
        << ',' << fmt(r.reference.real()) << ',' << fmt(r.reference.imag()) << ','
        << (r.relative ? "relative" : "absolute") << ',' << fmt(r.error) << ','
        << fmt(r.abs_error) << '\n';
  }
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << "estimator,dt,index,index_nontrivial,error_kind,count,mean,median,q25,q75,min,max\n";
  for (const auto& s : rows) {
    out << s.estimator << ',' << fmt(s.dt) << ',' << s.index << ',' << s.index_nontrivial << ','
        << (s.relative ? "relative" : "absolute") << ',' << s.count << ',' << fmt(s.mean) << ','
        << fmt(s.median) << ',' << fmt(s.q25) << ',' << fmt(s.q75) << ',' << fmt(s.min) << ','
        << fmt(s.max) << '\n';
  }
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------- oracle, forecast

OracleFixture build_fixture(const OracleConfig& cfg, const std::string& command) {
  OracleFixture f;
  f.potential = cfg.potential;
  f.friction = cfg.friction;
  f.kT = cfg.kT;
  f.a = cfg.a;
  f.b = cfg.b;
  f.grid = cfg.grid;
  f.command = command;
  f.tool_version = kToolVersion;
  f.eigenvalues =
      spectrum(discretize_langevin_1d(cfg.potential, cfg.friction, cfg.kT, cfg.a, cfg.b, cfg.grid),
               cfg.count)
          .eigenvalues;
  f.refined_eigenvalues =
      spectrum(discretize_langevin_1d(cfg.potential, cfg.friction, cfg.kT, cfg.a, cfg.b, 2 * cfg.grid),
               cfg.count)
          .eigenvalues;
  return f;
}

Eigen::VectorXd observable_values(const ForecastConfig& cfg, const SpectralModel& model) {
  const Eigen::MatrixXd& X = model.train_states;
  if (X.size() == 0) throw InputError("forecast: model has no stored training sample");
  if (cfg.observable == "values") {
    std::ifstream in(cfg.values_file);
    if (!in) throw InputError("cannot open observable file '" + cfg.values_file.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw InputError(cfg.values_file.string() + ": empty file");
    std::vector<std::string> header;
    {
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    const auto col = std::find(header.begin(), header.end(), cfg.column);
    if (col == header.end()) {
      throw InputError(cfg.values_file.string() + ": no column '" + cfg.column + "'");
    }
    const auto c = static_cast<std::size_t>(col - header.begin());
    std::vector<double> values;
    std::size_t row = 1;
    while (std::getline(in, line)) {
      ++row;
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      for (std::size_t k = 0; k <= c; ++k) {
        if (!std::getline(ss, cell, ',')) {
          throw InputError(cfg.values_file.string() + " row " + std::to_string(row) + ": missing column");
        }
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw InputError(cfg.values_file.string() + " row " + std::to_string(row) +
                         ": non-numeric cell '" + cell + "'");
      }
      values.push_back(v);
    }
    if (values.size() != static_cast<std::size_t>(X.rows())) {
      throw InputError("observable file has " + std::to_string(values.size()) +
                       " values, model has " + std::to_string(X.rows()) + " training states");
    }
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  }
  if (cfg.coordinate > static_cast<std::size_t>(X.cols())) {
    throw InputError("forecast: coordinate " + std::to_string(cfg.coordinate) + " exceeds dimension");
  }
  const Eigen::VectorXd x = X.col(static_cast<Eigen::Index>(cfg.coordinate - 1));
  if (cfg.observable == "coordinate") return x;
  return (x.array() > cfg.threshold).cast<double>();
}

// ---------------------------------------------------------------- commands

namespace {

std::filesystem::path out_dir(const CommandOptions& opts, const RunConfig& rc) {
  return opts.out ? *opts.out : rc.output;
}

template <typename T>
const T& need(const std::optional<T>& section, const char* name) {
  if (!section) throw InputError(std::string("config: section '") + name + "' is required");
  return *section;
}

void print_model(std::ostream& log, const std::string& name, const SpectralModel& m) {
  log << name << " (" << to_string(m.mode) << ", " << model_label(m) << ")\n";
  log << "  i        lambda_re        lambda_im            sigma              eta\n";
  for (std::size_t i = 0; i < m.rank(); ++i) {
    log << "  " << std::setw(2) << i + 1 << std::setw(17) << std::setprecision(8)
        << m.eigenvalues[i].real() << std::setw(17) << m.eigenvalues[i].imag() << std::setw(17)
        << m.singular_values[static_cast<Eigen::Index>(i)] << std::setw(17)
        << m.metric_distortions[static_cast<Eigen::Index>(i)] << '\n';
  }
  log << "  sigma_" << m.rank() + 1 << " = " << singular_tail(m) << '\n';
  for (const auto& w : m.warnings) log << "  warning: " << w << '\n';
}

}  // namespace

int cmd_simulate(const CommandOptions& opts, std::ostream& log) {
  const RunConfig rc = load_config(opts.config);
  ProcessConfig process = need(rc.process, "process");
  if (opts.seed) process.seed = *opts.seed;
  const auto trajs = simulate_trajectories(process, opts.jobs);
  const auto dir = out_dir(opts, rc);
  ensure_directory(dir);
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto path = dir / indexed("traj", i, ".csv");
    save_csv(trajs[i], path);
    const Uniformity u = is_uniform(trajs[i]);
    log << path.string() << ": n=" << trajs[i].size() << " d=" << trajs[i].dimension()
        << " dt=" << (u.uniform ? fmt(u.step) : std::string("non-uniform"))
        << " burn_in=" << process.burn_in << " seed=" << process.seed + i << '\n';
  }
  return 0;
}

int cmd_fit(const CommandOptions& opts, std::ostream& log) {
  const RunConfig rc = load_config(opts.config);
  const FeatureConfig& features = need(rc.features, "features");
  const EstimatorConfig& est = need(rc.estimator, "estimator");

  std::vector<Trajectory> trajs;
  std::vector<std::string> sources;
  if (!opts.inputs.empty()) {
    for (const auto& p : opts.inputs) {
      trajs.push_back(load_csv(p));
      sources.push_back(p.string());
    }
  } else {
    ProcessConfig process = need(rc.process, "process");
    if (opts.seed) process.seed = *opts.seed;
    trajs = obtain_trajectories(process, opts.jobs);
    if (const auto* csv = std::get_if<CsvProcess>(&process.kind)) {
      for (const auto& p : csv->paths) sources.push_back(p.string());
    }
  }
  const auto dir = out_dir(opts, rc);
  ensure_directory(dir);

  auto stamp = [&](SpectralModel& m, std::size_t i) {
    if (i < sources.size()) {
      m.provenance["source.path"] = sources[i];
      m.provenance["source.sha256"] = sha256_file(sources[i]);
    }
  };

  if (est.bundle) {
    SpectralModel model = fit_bundle(trajs, features, est);
    for (std::size_t i = 0; i < sources.size(); ++i) {
      model.provenance["source." + std::to_string(i) + ".path"] = sources[i];
      model.provenance["source." + std::to_string(i) + ".sha256"] = sha256_file(sources[i]);
    }
    const auto path = dir / "model.json";
    save_model(model, path, opts.timestamp);
    print_model(log, path.string(), model);
    return 0;
  }

  std::vector<std::optional<SpectralModel>> models(trajs.size());
  parallel_for(trajs.size(), opts.jobs, [&](std::size_t i) {
    SpectralModel m = fit_trajectory(trajs[i], features, est);
    stamp(m, i);
    models[i] = std::move(m);
  });
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto path = dir / indexed("model", i, ".json");
    save_model(*models[i], path, opts.timestamp);
    print_model(log, path.string(), *models[i]);
  }
  return 0;
}

int cmd_compare(const CommandOptions& opts, std::ostream& log) {
  const RunConfig rc = load_config(opts.config);
  const CompareConfig& cc = need(rc.compare, "compare");
  const auto paths = opts.inputs.empty() ? cc.models : opts.inputs;
  if (paths.empty()) throw InputError("compare: no model files given");

  std::vector<ErrorRow> rows;
  std::vector<std::complex<double>> reference;
  for (const auto& p : paths) {
    const SpectralModel model = load_model(p);
    const std::size_t count = cc.count ? cc.count : model.rank();
    if (reference.size() < count) reference = reference_values(cc.reference, count);
    const auto r = compare_model(p.stem().string(), model, reference, count);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  const auto summary = summarize(rows);
  const auto dir = out_dir(opts, rc);
  ensure_directory(dir);
  write_error_csv(rows, dir / "errors.csv");
  write_summary_csv(summary, dir / "summary.csv");
  log << "estimator        dt  index  nontrivial  kind       count       median         mean\n";
  for (const auto& s : summary) {
    log << std::setw(9) << s.estimator << std::setw(10) << s.dt << std::setw(7) << s.index
        << std::setw(12) << s.index_nontrivial << "  " << std::setw(9) << std::left
        << (s.relative ? "relative" : "absolute") << std::right << std::setw(7) << s.count
        << std::setw(13) << s.median << std::setw(13) << s.mean << '\n';
  }
  log << "wrote " << (dir / "errors.csv").string() << " and " << (dir / "summary.csv").string() << '\n';
  return 0;
}

int cmd_forecast(const CommandOptions& opts, std::ostream& log) {
  const RunConfig rc = load_config(opts.config);
  const ForecastConfig& fc = need(rc.forecast, "forecast");
  const std::filesystem::path model_path = opts.inputs.empty() ? fc.model : opts.inputs.front();
  if (model_path.empty()) throw InputError("forecast: no model file given");
  const SpectralModel model = load_model(model_path);
  if (fc.x0.size() != model.train_states.cols()) {
    throw InputError("forecast: x0 has dimension " + std::to_string(fc.x0.size()) +
                     ", model expects " + std::to_string(model.train_states.cols()));
  }
  const Eigen::VectorXd h = observable_values(fc, model);
  const auto pred = forecast_series(model, h, fc.x0, fc.times);
  const auto dir = out_dir(opts, rc);
  ensure_directory(dir);
  const auto path = dir / "forecast.csv";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << "t,prediction\n";
  for (std::size_t i = 0; i < pred.size(); ++i) out << fmt(fc.times[i]) << ',' << fmt(pred[i]) << '\n';
  log << "wrote " << path.string() << " (" << pred.size() << " rows)\n";
  return 0;
}

int cmd_oracle(const CommandOptions& opts, std::ostream& log) {
  const RunConfig rc = load_config(opts.config);
  const OracleConfig& oc = need(rc.oracle, "oracle");
  const OracleFixture f = build_fixture(oc, "genspec oracle --config " + opts.config.string());
  const auto dir = out_dir(opts, rc);
  ensure_directory(dir);
  const auto path = dir / "oracle_fixture.json";
  write_json(to_json(f), path);
  log << "grid G=" << f.grid << " on [" << f.a << ", " << f.b << "]\n";
  for (Eigen::Index i = 0; i < f.eigenvalues.size(); ++i) {
    log << "  lambda_" << i + 1 << " = " << std::setprecision(10) << f.eigenvalues[i]
        << "   (G=" << 2 * f.grid << ": " << f.refined_eigenvalues[i] << ")\n";
  }
  log << "max relative change under refinement: " << f.refinement_change() << '\n';
  log << "wrote " << path.string() << '\n';
  return 0;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int run(int argc, char** argv) {
  CLI::App app{"Laplace-transform reduced rank regression for generator spectra", "genspec"};
  app.require_subcommand(1);

  CommandOptions opts;
  std::string seed_text;
  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const CommandOptions&, std::ostream&);
    bool inputs;
  };
  const Entry entries[] = {
      {"simulate", "simulate trajectories to CSV", cmd_simulate, false},
      {"fit", "fit spectral models to trajectories", cmd_fit, true},
      {"compare", "relative-error table of models against a reference spectrum", cmd_compare, true},
      {"forecast", "predict E[h(X_t) | X_0 = x0] from a model", cmd_forecast, true},
      {"oracle", "finite-difference ground-truth spectrum fixture", cmd_oracle, false},
  };
  std::map<CLI::App*, const Entry*> dispatch;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("--config", opts.config, "run configuration (JSON)")->required();
    sub->add_option("--out", opts.out, "output directory (overrides output.directory)");
    sub->add_option("--jobs", opts.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", opts.seed, "base seed (overrides process.seed)");
    if (e.inputs) sub->add_option("inputs", opts.inputs, "input files");
    dispatch[sub] = &e;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  opts.timestamp = utc_timestamp();

  try {
    for (const auto& [sub, entry] : dispatch) {
      if (sub->parsed()) return entry->fn(opts, std::cout);
    }
    return 2;
  } catch (const InputError& e) {
    std::cerr << "genspec: error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "genspec: numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "genspec: error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "genspec: failure: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace larrr::cli
