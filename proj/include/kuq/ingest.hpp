#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kuq/numkernel.hpp"

namespace kuq {

enum class NoiseProvenance {
  SteadyWindow,
  PolynomialDetrend,
  Manufacturer,
};

std::string to_string(NoiseProvenance provenance);
NoiseProvenance noise_provenance_from_string(const std::string& name);

// Per-state measurement-noise variances (the diagonal of the noise
// covariance) plus a record of how they were obtained. The three
// characterization routes below only ever produce strictly positive
// variances; zero entries can still appear in hand-built models used by
// generators and the Monte Carlo sampler.
struct NoiseModel {
  std::vector<double> variances;
  NoiseProvenance provenance = NoiseProvenance::Manufacturer;
};

// Uniformly sampled multivariate time series. Row i holds the state at
// time i * sample_period.
struct TimeSeries {
  double sample_period = 1.0;  // seconds
  std::vector<std::string> state_names;
  Matrix data;  // T x n

  std::int64_t samples() const { return data.rows(); }
  std::int64_t states() const { return data.cols(); }
};

// Validating constructor: requires at least 2 rows, one name per column,
// finite entries, and a positive sample period.
TimeSeries make_time_series(double sample_period,
                            std::vector<std::string> state_names, Matrix data);

// Aligned snapshot matrices: row t of x_obs is the state at step t, row t
// of y_obs the state one step later. Both are m x n with m = T - 1.
struct SnapshotPair {
  Matrix x_obs;
  Matrix y_obs;

  std::int64_t samples() const { return x_obs.rows(); }
  std::int64_t states() const { return x_obs.cols(); }
};

struct CsvSchema {
  // When unset, a leading column named "time" (case-insensitive) is
  // detected from the header and used to infer the sample period.
  std::optional<bool> time_column;
  // Sample period assumed when the file has no time column.
  double default_sample_period = 1.0;
};

// CSV layout: UTF-8, comma separated, exactly one header row, one row per
// sample, optional leading time column in seconds.
TimeSeries load_csv(const std::filesystem::path& path,
                    const CsvSchema& schema = {});
void write_csv(const TimeSeries& series, const std::filesystem::path& path,
               bool with_time = true);

SnapshotPair build_snapshots(const TimeSeries& series);

// Noise characterization from a steady-state window [t_start, t_end]
// (inclusive, in seconds): per-state unbiased sample variance over the
// rows inside the window.
NoiseModel variance_steady_window(const TimeSeries& series, double t_start,
                                  double t_end);

// Noise characterization by polynomial detrending: fit a degree-d
// polynomial in time to each state and take the residual variance.
NoiseModel variance_detrend_poly(const TimeSeries& series,
                                 std::int64_t degree = 9);

// Noise characterization from externally supplied (datasheet) variances.
NoiseModel variance_manufacturer(const std::vector<double>& variances);

}  // namespace kuq
