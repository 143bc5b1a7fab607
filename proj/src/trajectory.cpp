#include "larrr/trajectory.hpp"

#include "larrr/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace larrr {

Trajectory::Trajectory(Eigen::MatrixXd states, Eigen::VectorXd times, Meta meta)
    : states_(std::move(states)), times_(std::move(times)), meta_(std::move(meta)) {
  if (states_.rows() != times_.size()) {
    throw InputError("trajectory: " + std::to_string(states_.rows()) + " state rows but " +
                     std::to_string(times_.size()) + " times");
  }
  if (states_.rows() < 2) throw InputError("trajectory: need at least 2 samples");
  if (states_.cols() < 1) throw InputError("trajectory: state dimension must be >= 1");
  if (!states_.allFinite()) throw InputError("trajectory: non-finite state value");
  if (!times_.allFinite()) throw InputError("trajectory: non-finite time value");
  for (Eigen::Index i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) {
      throw InputError("trajectory: times not strictly increasing at sample " + std::to_string(i));
    }
  }
}

TrajectoryBundle::TrajectoryBundle(std::vector<Trajectory> trajectories)
    : trajectories_(std::move(trajectories)) {
  if (trajectories_.empty()) throw InputError("bundle: no trajectories");
  const auto& ref = trajectories_.front();
  for (std::size_t k = 1; k < trajectories_.size(); ++k) {
    const auto& t = trajectories_[k];
    if (t.dimension() != ref.dimension()) {
      throw InputError("bundle: trajectory " + std::to_string(k) + " has dimension " +
                       std::to_string(t.dimension()) + ", expected " +
                       std::to_string(ref.dimension()));
    }
    if (t.size() != ref.size() ||
        !std::equal(t.times().begin(), t.times().end(), ref.times().begin())) {
      throw InputError("bundle: trajectory " + std::to_string(k) + " has a different time grid");
    }
  }
}

Eigen::MatrixXd TrajectoryBundle::stacked_states() const {
  const auto n = static_cast<Eigen::Index>(count());
  const auto g = static_cast<Eigen::Index>(grid_size());
  Eigen::MatrixXd out(n * g, static_cast<Eigen::Index>(dimension()));
  for (Eigen::Index j = 0; j < g; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      out.row(j * n + i) = trajectories_[static_cast<std::size_t>(i)].states().row(j);
    }
  }
  return out;
}

Uniformity is_uniform(const Trajectory& traj, double rel_tol) {
  const auto& t = traj.times();
  const Eigen::Index gaps = t.size() - 1;
  const Eigen::VectorXd d = t.tail(gaps) - t.head(gaps);
  const double lo = d.minCoeff();
  const double hi = d.maxCoeff();
  if (hi / lo - 1.0 <= rel_tol) return {true, (t[gaps] - t[0]) / static_cast<double>(gaps)};
  return {false, 0.0};
}

Trajectory subsample(const Trajectory& traj, std::size_t stride) {
  if (stride == 0) throw InputError("subsample: stride must be >= 1");
  if (stride >= traj.size()) throw InputError("subsample: empty result (stride >= n)");
  const auto kept = static_cast<Eigen::Index>((traj.size() - 1) / stride + 1);
  const auto s = static_cast<Eigen::Index>(stride);
  Eigen::MatrixXd states(kept, traj.states().cols());
  Eigen::VectorXd times(kept);
  for (Eigen::Index i = 0; i < kept; ++i) {
    states.row(i) = traj.states().row(i * s);
    times[i] = traj.times()[i * s];
  }
  Meta meta = traj.meta();
  meta["subsample_stride"] = std::to_string(stride);
  return Trajectory(std::move(states), std::move(times), std::move(meta));
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_cell(std::string_view cell, const std::string& where) {
  cell = trim(cell);
  double value = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw InputError(where + ": non-numeric cell '" + std::string(cell) + "'");
  }
  return value;
}

}  // namespace

Trajectory load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trajectory file '" + path.string() + "'");
  const std::string file = path.string();

  std::string line;
  if (!std::getline(in, line)) throw InputError(file + ": missing header (empty file)");
  const auto header = split_commas(trim(line));
  if (header.size() < 2 || trim(header[0]) != "t") {
    throw InputError(file + ": missing header 't,x1,...,xd' on row 1");
  }
  for (std::size_t k = 1; k < header.size(); ++k) {
    if (trim(header[k]) != "x" + std::to_string(k)) {
      throw InputError(file + ": header column " + std::to_string(k + 1) + " must be 'x" +
                       std::to_string(k) + "'");
    }
  }
  const auto d = header.size() - 1;

  std::vector<double> times;
  std::vector<double> values;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::string where = file + " row " + std::to_string(row);
    const auto cells = split_commas(line);
    if (cells.size() != d + 1) {
      throw InputError(where + ": expected " + std::to_string(d + 1) + " columns, found " +
                       std::to_string(cells.size()));
    }
    const double t = parse_cell(cells[0], where);
    if (!times.empty() && !(t > times.back())) {
      throw InputError(where + ": time " + std::string(trim(cells[0])) + " is not increasing");
    }
    times.push_back(t);
    for (std::size_t k = 1; k <= d; ++k) values.push_back(parse_cell(cells[k], where));
  }
  if (times.size() < 2) throw InputError(file + ": need at least 2 samples");

  const auto n = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd states =
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          values.data(), n, static_cast<Eigen::Index>(d));
  Eigen::VectorXd tv = Eigen::Map<Eigen::VectorXd>(times.data(), n);
  return Trajectory(std::move(states), std::move(tv), {{"source", file}});
}

void save_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write trajectory file '" + path.string() + "'");
  out << 't';
  for (std::size_t k = 1; k <= traj.dimension(); ++k) out << ",x" << k;
  out << '\n';
  char buf[32];
  auto put = [&](double v) {
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    out.write(buf, res.ptr - buf);
  };
  for (Eigen::Index i = 0; i < traj.states().rows(); ++i) {
    put(traj.times()[i]);
    for (Eigen::Index k = 0; k < traj.states().cols(); ++k) {
      out << ',';
      put(traj.states()(i, k));
    }
    out << '\n';
  }
  if (!out) throw InputError("failed writing trajectory file '" + path.string() + "'");
}

}  // namespace larrr
