#include "kuq/serialize.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>

namespace kuq {

namespace {

const Json& require(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ParseError(std::string("json: missing key '") + key + "'");
  }
  return *it;
}

template <typename T>
T require_as(const Json& j, const char* key) {
  try {
    return require(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("json: key '") + key + "': " + e.what());
  }
}

void append_csv_value(std::string& line, double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  line += buf;
}

}  // namespace

std::vector<double> matrix_row_major(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      data.push_back(m(i, j));
    }
  }
  return data;
}

Matrix matrix_from_row_major(std::int64_t rows, std::int64_t cols,
                             const std::vector<double>& data) {
  if (rows < 0 || cols < 0 ||
      static_cast<std::int64_t>(data.size()) != rows * cols) {
    throw ShapeError("matrix_from_row_major: " + std::to_string(data.size()) +
                     " entries for a " + std::to_string(rows) + "x" +
                     std::to_string(cols) + " matrix");
  }
  Matrix m(rows, cols);
  std::size_t idx = 0;
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::int64_t j = 0; j < cols; ++j) {
      m(i, j) = data[idx++];
    }
  }
  return m;
}

Json matrix_to_json(const Matrix& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = matrix_row_major(m);
  return j;
}

Matrix matrix_from_json(const Json& j) {
  return matrix_from_row_major(require_as<std::int64_t>(j, "rows"),
                               require_as<std::int64_t>(j, "cols"),
                               require_as<std::vector<double>>(j, "data"));
}

Json to_json(const NoiseModel& model) {
  Json j;
  j["variances"] = model.variances;
  j["provenance"] = to_string(model.provenance);
  return j;
}

NoiseModel noise_model_from_json(const Json& j) {
  NoiseModel model;
  model.variances = require_as<std::vector<double>>(j, "variances");
  model.provenance =
      noise_provenance_from_string(require_as<std::string>(j, "provenance"));
  return model;
}

Json to_json(const KoopmanEstimate& estimate) {
  Json j;
  j["method"] = to_string(estimate.method);
  j["p"] = estimate.feature_dim;
  j["m"] = estimate.sample_count;
  j["k"] = matrix_row_major(estimate.k_obs);
  return j;
}

KoopmanEstimate koopman_estimate_from_json(const Json& j) {
  KoopmanEstimate estimate;
  estimate.method =
      estimation_method_from_string(require_as<std::string>(j, "method"));
  estimate.feature_dim = require_as<std::int64_t>(j, "p");
  estimate.sample_count = require_as<std::int64_t>(j, "m");
  estimate.k_obs =
      matrix_from_row_major(estimate.feature_dim, estimate.feature_dim,
                            require_as<std::vector<double>>(j, "k"));
  return estimate;
}

Json to_json(const VarianceMatrix& vm) {
  Json j;
  j["mean"] = matrix_row_major(vm.mean);
  j["s"] = matrix_row_major(vm.s);
  j["m"] = vm.m;
  j["p"] = vm.p;
  j["provenance"] = to_string(vm.provenance);
  return j;
}

VarianceMatrix variance_matrix_from_json(const Json& j) {
  VarianceMatrix vm;
  vm.m = require_as<std::int64_t>(j, "m");
  vm.p = require_as<std::int64_t>(j, "p");
  vm.mean = matrix_from_row_major(vm.p, vm.p,
                                  require_as<std::vector<double>>(j, "mean"));
  vm.s = matrix_from_row_major(vm.p, vm.p,
                               require_as<std::vector<double>>(j, "s"));
  vm.provenance =
      noise_provenance_from_string(require_as<std::string>(j, "provenance"));
  return vm;
}

Json to_json(const MPParams& params) {
  Json j;
  j["ratio"] = params.ratio();
  j["sigma2"] = params.sigma2();
  j["lower_edge"] = params.lower_edge();
  j["upper_edge"] = params.upper_edge();
  return j;
}

Json to_json(const SpectralUQ& uq) {
  Json j;
  j["mp"] = to_json(uq.mp);
  j["moments"] = uq.moments;
  j["haar_dim"] = uq.haar_dim;
  return j;
}

Json to_json(const ComparisonReport& report) {
  Json j;
  j["m"] = report.m;
  j["p"] = report.p;
  j["replicates"] = report.replicates;
  j["ratio"] = matrix_to_json(report.ratio);
  j["median_ratio"] = report.median_ratio;
  j["ks"] = matrix_to_json(report.ks);
  j["analytic_moments"] = report.analytic_moments;
  j["mc_moments"] = report.mc_moments;
  j["moment_deltas"] = report.moment_deltas;
  return j;
}

void write_json_file(const Json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("write_json_file: cannot open '" + path.string() +
                  "' for writing");
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw IoError("write_json_file: write to '" + path.string() + "' failed");
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("read_json_file: cannot open '" + path.string() + "'");
  }
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("read_json_file: '" + path.string() + "': " + e.what());
  }
}

void write_density_csv(const MPParams& params, std::size_t points,
                       const std::filesystem::path& path) {
  if (points < 2) {
    throw InvalidParameter("write_density_csv: need at least 2 points");
  }
  std::ofstream out(path);
  if (!out) {
    throw IoError("write_density_csv: cannot open '" + path.string() +
                  "' for writing");
  }
  out << "x,density\n";
  const double lo = params.lower_edge();
  const double hi = params.upper_edge();
  for (std::size_t i = 0; i < points; ++i) {
    const double x =
        lo + (hi - lo) * static_cast<double>(i) /
                 static_cast<double>(points - 1);
    std::string line;
    append_csv_value(line, x);
    line += ',';
    append_csv_value(line, mp_density(x, params));
    out << line << '\n';
  }
  if (!out) {
    throw IoError("write_density_csv: write to '" + path.string() +
                  "' failed");
  }
}

Histogram make_histogram(const std::vector<double>& values,
                         std::size_t bins) {
  if (values.empty()) {
    throw InvalidParameter("make_histogram: empty value pool");
  }
  if (bins < 1) {
    throw InvalidParameter("make_histogram: need at least 1 bin");
  }
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);

  Histogram hist;
  hist.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) {
    hist.edges[b] = lo + width * static_cast<double>(b);
  }
  hist.edges.back() = hi;
  hist.counts.assign(bins, 0);
  for (double v : values) {
    auto b = static_cast<std::int64_t>((v - lo) / width);
    b = std::clamp<std::int64_t>(b, 0, static_cast<std::int64_t>(bins) - 1);
    ++hist.counts[static_cast<std::size_t>(b)];
  }
  return hist;
}

void write_element_histograms_csv(const MCResult& mc, std::size_t bins,
                                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("write_element_histograms_csv: cannot open '" +
                  path.string() + "' for writing");
  }
  out << "row,col,bin_left,bin_right,count\n";
  for (Eigen::Index i = 0; i < mc.p; ++i) {
    for (Eigen::Index j = 0; j < mc.p; ++j) {
      const Eigen::Index idx = i * mc.p + j;
      const std::vector<double> values(
          mc.ensemble.col(idx).data(),
          mc.ensemble.col(idx).data() + mc.ensemble.rows());
      const Histogram hist = make_histogram(values, bins);
      for (std::size_t b = 0; b < hist.counts.size(); ++b) {
        std::string line = std::to_string(i) + ',' + std::to_string(j) + ',';
        append_csv_value(line, hist.edges[b]);
        line += ',';
        append_csv_value(line, hist.edges[b + 1]);
        line += ',';
        line += std::to_string(hist.counts[b]);
        out << line << '\n';
      }
    }
  }
  if (!out) {
    throw IoError("write_element_histograms_csv: write to '" + path.string() +
                  "' failed");
  }
}

void write_values_histogram_csv(const std::vector<double>& values,
                                std::size_t bins,
                                const std::filesystem::path& path) {
  const Histogram hist = make_histogram(values, bins);
  std::ofstream out(path);
  if (!out) {
    throw IoError("write_values_histogram_csv: cannot open '" +
                  path.string() + "' for writing");
  }
  out << "bin_left,bin_right,count,density\n";
  const double total = static_cast<double>(values.size());
  for (std::size_t b = 0; b < hist.counts.size(); ++b) {
    const double width = hist.edges[b + 1] - hist.edges[b];
    std::string line;
    append_csv_value(line, hist.edges[b]);
    line += ',';
    append_csv_value(line, hist.edges[b + 1]);
    line += ',';
    line += std::to_string(hist.counts[b]);
    line += ',';
    append_csv_value(line, width > 0.0
                               ? static_cast<double>(hist.counts[b]) /
                                     (total * width)
                               : 0.0);
    out << line << '\n';
  }
  if (!out) {
    throw IoError("write_values_histogram_csv: write to '" + path.string() +
                  "' failed");
  }
}

}  // namespace kuq
