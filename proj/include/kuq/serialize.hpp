#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "kuq/estimators.hpp"
#include "kuq/ingest.hpp"
#include "kuq/montecarlo.hpp"
#include "kuq/muq.hpp"
#include "kuq/spectral.hpp"

namespace kuq {

// Insertion-ordered JSON keeps key order fixed, so serialized artifacts are
// byte-stable across runs.
using Json = nlohmann::ordered_json;

Json matrix_to_json(const Matrix& m);  // {"rows", "cols", "data" row-major}
Matrix matrix_from_json(const Json& j);

std::vector<double> matrix_row_major(const Matrix& m);
Matrix matrix_from_row_major(std::int64_t rows, std::int64_t cols,
                             const std::vector<double>& data);

Json to_json(const NoiseModel& model);
NoiseModel noise_model_from_json(const Json& j);

Json to_json(const KoopmanEstimate& estimate);
KoopmanEstimate koopman_estimate_from_json(const Json& j);

Json to_json(const VarianceMatrix& vm);
VarianceMatrix variance_matrix_from_json(const Json& j);

Json to_json(const MPParams& params);
Json to_json(const SpectralUQ& uq);
Json to_json(const ComparisonReport& report);

void write_json_file(const Json& j, const std::filesystem::path& path);
Json read_json_file(const std::filesystem::path& path);

// ----- CSV exports for plotting -----

// Bulk density curve sampled on `points` evenly spaced abscissas across the
// support. Columns: x, density.
void write_density_csv(const MPParams& params, std::size_t points,
                       const std::filesystem::path& path);

struct Histogram {
  std::vector<double> edges;        // bins + 1 ascending edges
  std::vector<std::int64_t> counts; // one per bin
};

Histogram make_histogram(const std::vector<double>& values, std::size_t bins);

// One histogram per matrix entry over the replicate ensemble.
// Columns: row, col, bin_left, bin_right, count.
void write_element_histograms_csv(const MCResult& mc, std::size_t bins,
                                  const std::filesystem::path& path);

// Flat histogram of a value pool with per-bin empirical density.
// Columns: bin_left, bin_right, count, density.
void write_values_histogram_csv(const std::vector<double>& values,
                                std::size_t bins,
                                const std::filesystem::path& path);

}  // namespace kuq
