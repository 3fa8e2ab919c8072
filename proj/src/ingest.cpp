#include "kuq/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

namespace kuq {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) {
    ++begin;
  }
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) {
    --end;
  }
  return s.substr(begin, end - begin);
}

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return s;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

double parse_cell(const std::string& raw, std::size_t file_row,
                  std::size_t file_col) {
  const std::string cell = trim(raw);
  const auto position = " (row " + std::to_string(file_row) + ", column " +
                        std::to_string(file_col) + ")";
  if (cell.empty()) {
    throw ParseError("load_csv: empty cell" + position);
  }
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw ParseError("load_csv: cannot parse '" + cell + "' as a number" +
                     position);
  }
  return value;
}

// Near-zero variance detection shared by the characterization routes. The
// threshold scales with the column magnitude so that residuals that are
// pure floating-point noise (an exactly fitted trend, a constant channel)
// classify as degenerate.
bool is_degenerate_variance(double variance, double column_scale) {
  const double tol = 1e-12 * std::max(1.0, column_scale);
  return !(variance > tol * tol);
}

Vector column_variances_about(const Matrix& block, const Matrix& center,
                              std::int64_t dof) {
  Vector out(block.cols());
  for (Eigen::Index j = 0; j < block.cols(); ++j) {
    out(j) = (block.col(j) - center.col(j)).squaredNorm() /
             static_cast<double>(dof);
  }
  return out;
}

}  // namespace

std::string to_string(NoiseProvenance provenance) {
  switch (provenance) {
    case NoiseProvenance::SteadyWindow:
      return "steady-window";
    case NoiseProvenance::PolynomialDetrend:
      return "polynomial-detrend";
    case NoiseProvenance::Manufacturer:
      return "manufacturer";
  }
  throw InvalidParameter("to_string: unknown noise provenance");
}

NoiseProvenance noise_provenance_from_string(const std::string& name) {
  if (name == "steady-window") return NoiseProvenance::SteadyWindow;
  if (name == "polynomial-detrend") return NoiseProvenance::PolynomialDetrend;
  if (name == "manufacturer") return NoiseProvenance::Manufacturer;
  throw ParseError("unknown noise provenance '" + name + "'");
}

TimeSeries make_time_series(double sample_period,
                            std::vector<std::string> state_names, Matrix data) {
  if (!(sample_period > 0.0)) {
    throw InvalidParameter("time series: sample period must be positive, got " +
                           std::to_string(sample_period));
  }
  if (data.cols() < 1) {
    throw ShapeError("time series: need at least one state column");
  }
  if (data.rows() < 2) {
    throw InsufficientData("time series: need at least 2 samples, got " +
                           std::to_string(data.rows()));
  }
  if (static_cast<Eigen::Index>(state_names.size()) != data.cols()) {
    throw ShapeError("time series: " + std::to_string(state_names.size()) +
                     " state names for " + std::to_string(data.cols()) +
                     " columns");
  }
  if (!data.allFinite()) {
    throw InvalidMatrix("time series: data has non-finite entries");
  }
  return TimeSeries{sample_period, std::move(state_names), std::move(data)};
}

TimeSeries load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("load_csv: cannot open '" + path.string() + "'");
  }

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    lines.push_back(line);
  }
  while (!lines.empty() && trim(lines.back()).empty()) {
    lines.pop_back();
  }
  if (lines.empty()) {
    throw ParseError("load_csv: '" + path.string() + "' is empty");
  }

  const std::vector<std::string> header = split_fields(lines[0]);
  if (header.empty()) {
    throw ParseError("load_csv: missing header row");
  }

  bool has_time = false;
  if (schema.time_column.has_value()) {
    has_time = *schema.time_column;
    if (has_time && header.empty()) {
      throw ParseError("load_csv: time column requested but header is empty");
    }
  } else {
    has_time = to_lower(trim(header[0])) == "time";
  }

  std::vector<std::string> names;
  for (std::size_t c = has_time ? 1 : 0; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    if (name.empty()) {
      throw ParseError("load_csv: empty header cell (row 1, column " +
                       std::to_string(c + 1) + ")");
    }
    names.push_back(name);
  }
  if (names.empty()) {
    throw ParseError("load_csv: no state columns in header");
  }

  const std::size_t n_rows = lines.size() - 1;
  const std::size_t n_cols = header.size();
  Matrix data(static_cast<Eigen::Index>(n_rows),
              static_cast<Eigen::Index>(names.size()));
  std::vector<double> times;
  times.reserve(has_time ? n_rows : 0);

  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t file_row = r + 2;  // 1-based, header is row 1
    const std::vector<std::string> fields = split_fields(lines[r + 1]);
    if (fields.size() != n_cols) {
      throw ShapeError("load_csv: row " + std::to_string(file_row) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(n_cols));
    }
    std::size_t c = 0;
    if (has_time) {
      times.push_back(parse_cell(fields[0], file_row, 1));
      c = 1;
    }
    for (; c < n_cols; ++c) {
      data(static_cast<Eigen::Index>(r),
           static_cast<Eigen::Index>(c - (has_time ? 1 : 0))) =
          parse_cell(fields[c], file_row, c + 1);
    }
  }

  double sample_period = schema.default_sample_period;
  if (has_time) {
    if (times.size() < 2) {
      throw InsufficientData("load_csv: need at least 2 samples, got " +
                             std::to_string(times.size()));
    }
    sample_period = times[1] - times[0];
    if (!(sample_period > 0.0)) {
      throw ParseError("load_csv: time column is not strictly increasing");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
      const double step = times[i] - times[i - 1];
      if (std::abs(step - sample_period) > 1e-6 * sample_period) {
        throw ParseError("load_csv: non-uniform sampling at row " +
                         std::to_string(i + 2));
      }
    }
  }

  return make_time_series(sample_period, std::move(names), std::move(data));
}

void write_csv(const TimeSeries& series, const std::filesystem::path& path,
               bool with_time) {
  for (const std::string& name : series.state_names) {
    if (name.find(',') != std::string::npos ||
        name.find('\n') != std::string::npos) {
      throw InvalidParameter("write_csv: state name '" + name +
                             "' contains a delimiter");
    }
  }

  std::ofstream out(path);
  if (!out) {
    throw IoError("write_csv: cannot open '" + path.string() +
                  "' for writing");
  }

  if (with_time) {
    out << "time";
    for (const std::string& name : series.state_names) {
      out << ',' << name;
    }
  } else {
    for (std::size_t j = 0; j < series.state_names.size(); ++j) {
      if (j > 0) out << ',';
      out << series.state_names[j];
    }
  }
  out << '\n';

  char buf[40];
  for (Eigen::Index i = 0; i < series.data.rows(); ++i) {
    bool first = true;
    if (with_time) {
      std::snprintf(buf, sizeof(buf), "%.17g",
                    static_cast<double>(i) * series.sample_period);
      out << buf;
      first = false;
    }
    for (Eigen::Index j = 0; j < series.data.cols(); ++j) {
      if (!first) out << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", series.data(i, j));
      out << buf;
      first = false;
    }
    out << '\n';
  }

  if (!out) {
    throw IoError("write_csv: write to '" + path.string() + "' failed");
  }
}

SnapshotPair build_snapshots(const TimeSeries& series) {
  const Eigen::Index t = series.data.rows();
  if (t < 2) {
    throw InsufficientData("build_snapshots: need at least 2 samples, got " +
                           std::to_string(t));
  }
  SnapshotPair pair;
  pair.x_obs = series.data.topRows(t - 1);
  pair.y_obs = series.data.bottomRows(t - 1);
  return pair;
}

NoiseModel variance_steady_window(const TimeSeries& series, double t_start,
                                  double t_end) {
  const double dt = series.sample_period;
  // Row i sits at time i * dt; pick the rows inside [t_start, t_end] with a
  // small tolerance so window edges that coincide with sample times are kept.
  const double lo = std::ceil(t_start / dt - 1e-9);
  const double hi = std::floor(t_end / dt + 1e-9);
  const Eigen::Index i_lo = static_cast<Eigen::Index>(std::max(lo, 0.0));
  const Eigen::Index i_hi = static_cast<Eigen::Index>(
      std::min(hi, static_cast<double>(series.data.rows() - 1)));

  if (t_end < t_start || i_hi < i_lo || i_hi - i_lo + 1 < 2) {
    throw EmptyWindow("variance_steady_window: window [" +
                      std::to_string(t_start) + ", " + std::to_string(t_end) +
                      "] selects fewer than 2 samples");
  }

  const Eigen::Index count = i_hi - i_lo + 1;
  const Matrix block = series.data.middleRows(i_lo, count);
  const Matrix mean_rows =
      block.colwise().mean().replicate(count, 1);
  const Vector variances = column_variances_about(block, mean_rows, count - 1);

  NoiseModel model;
  model.provenance = NoiseProvenance::SteadyWindow;
  model.variances.resize(variances.size());
  for (Eigen::Index j = 0; j < variances.size(); ++j) {
    const double scale = block.col(j).cwiseAbs().maxCoeff();
    if (is_degenerate_variance(variances(j), scale)) {
      throw DegenerateVariance(
          "variance_steady_window: state '" + series.state_names[j] +
          "' has (near) zero variance in the window");
    }
    model.variances[static_cast<std::size_t>(j)] = variances(j);
  }
  return model;
}

NoiseModel variance_detrend_poly(const TimeSeries& series,
                                 std::int64_t degree) {
  if (degree < 0) {
    throw InvalidParameter("variance_detrend_poly: degree must be >= 0, got " +
                           std::to_string(degree));
  }
  const Eigen::Index t = series.data.rows();
  if (t < degree + 2) {
    throw InsufficientData("variance_detrend_poly: need at least " +
                           std::to_string(degree + 2) + " samples, got " +
                           std::to_string(t));
  }

  // Vandermonde basis in normalized time tau in [-1, 1], which keeps the
  // fit well conditioned up to the degrees used here.
  Matrix vander(t, degree + 1);
  for (Eigen::Index i = 0; i < t; ++i) {
    const double tau = 2.0 * static_cast<double>(i) / (t - 1) - 1.0;
    double power = 1.0;
    for (Eigen::Index k = 0; k <= degree; ++k) {
      vander(i, k) = power;
      power *= tau;
    }
  }

  const Eigen::HouseholderQR<Matrix> qr(vander);
  const Matrix coeffs = qr.solve(series.data);
  const Matrix fitted = vander * coeffs;
  const Vector variances =
      column_variances_about(series.data, fitted, t - 1);

  NoiseModel model;
  model.provenance = NoiseProvenance::PolynomialDetrend;
  model.variances.resize(variances.size());
  for (Eigen::Index j = 0; j < variances.size(); ++j) {
    const double scale = series.data.col(j).cwiseAbs().maxCoeff();
    if (is_degenerate_variance(variances(j), scale)) {
      throw DegenerateVariance(
          "variance_detrend_poly: state '" + series.state_names[j] +
          "' is fitted exactly by the trend, residual variance is degenerate");
    }
    model.variances[static_cast<std::size_t>(j)] = variances(j);
  }
  return model;
}

NoiseModel variance_manufacturer(const std::vector<double>& variances) {
  if (variances.empty()) {
    throw InvalidParameter("variance_manufacturer: variance list is empty");
  }
  for (std::size_t j = 0; j < variances.size(); ++j) {
    if (!(variances[j] > 0.0)) {
      throw InvalidParameter("variance_manufacturer: variance for state " +
                             std::to_string(j) + " must be positive, got " +
                             std::to_string(variances[j]));
    }
  }
  NoiseModel model;
  model.provenance = NoiseProvenance::Manufacturer;
  model.variances = variances;
  return model;
}

}  // namespace kuq
