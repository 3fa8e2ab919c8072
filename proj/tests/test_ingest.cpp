#include "kuq/ingest.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "kuq/errors.hpp"
#include "kuq/rng.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;
using kuq::Matrix;

class CsvFile : public ::testing::Test {
 protected:
  fs::path write_file(const std::string& name, const std::string& body) {
    const fs::path path = fs::path(::testing::TempDir()) / name;
    std::ofstream out(path);
    out << body;
    return path;
  }
};

TEST(MakeTimeSeries, RejectsInvalidInput) {
  const Matrix ok = Matrix::Zero(3, 2);
  EXPECT_THROW(kuq::make_time_series(0.0, {"a", "b"}, ok),
               kuq::InvalidParameter);
  EXPECT_THROW(kuq::make_time_series(-0.1, {"a", "b"}, ok),
               kuq::InvalidParameter);
  EXPECT_THROW(kuq::make_time_series(0.1, {"a", "b"}, Matrix::Zero(3, 0)),
               kuq::ShapeError);
  EXPECT_THROW(kuq::make_time_series(0.1, {"a", "b"}, Matrix::Zero(1, 2)),
               kuq::InsufficientData);
  EXPECT_THROW(kuq::make_time_series(0.1, {"a"}, ok), kuq::ShapeError);
  Matrix bad = ok;
  bad(2, 1) = std::nan("");
  EXPECT_THROW(kuq::make_time_series(0.1, {"a", "b"}, bad), kuq::InvalidMatrix);
}

TEST_F(CsvFile, LoadsTimeColumnAndInfersSamplePeriod) {
  const fs::path path = write_file(
      "basic.csv", "time,delta,domega\n0,1.5,-2\n0.25,2.5,0\n0.5,3.5,2\n");
  const kuq::TimeSeries series = kuq::load_csv(path);
  EXPECT_DOUBLE_EQ(series.sample_period, 0.25);
  ASSERT_EQ(series.state_names.size(), 2u);
  EXPECT_EQ(series.state_names[0], "delta");
  EXPECT_EQ(series.state_names[1], "domega");
  ASSERT_EQ(series.samples(), 3);
  ASSERT_EQ(series.states(), 2);
  EXPECT_DOUBLE_EQ(series.data(0, 0), 1.5);
  EXPECT_DOUBLE_EQ(series.data(1, 1), 0.0);
  EXPECT_DOUBLE_EQ(series.data(2, 1), 2.0);
}

TEST_F(CsvFile, TimeHeaderDetectionIsCaseInsensitive) {
  const fs::path path =
      write_file("upper.csv", "Time,a\n0,1\n1,2\n2,3\n");
  const kuq::TimeSeries series = kuq::load_csv(path);
  EXPECT_DOUBLE_EQ(series.sample_period, 1.0);
  EXPECT_EQ(series.states(), 1);
}

TEST_F(CsvFile, NoTimeColumnUsesSchemaSamplePeriod) {
  const fs::path path = write_file("plain.csv", "a,b\n1,2\n3,4\n");
  kuq::CsvSchema schema;
  schema.default_sample_period = 0.02;
  const kuq::TimeSeries series = kuq::load_csv(path, schema);
  EXPECT_DOUBLE_EQ(series.sample_period, 0.02);
  EXPECT_EQ(series.states(), 2);
  EXPECT_EQ(series.samples(), 2);
}

TEST_F(CsvFile, ExplicitSchemaOverridesHeaderDetection) {
  // A column literally named "time" is kept as data when the schema says
  // there is no time column.
  const fs::path path = write_file("asdata.csv", "time,a\n0,1\n1,2\n");
  kuq::CsvSchema schema;
  schema.time_column = false;
  schema.default_sample_period = 0.5;
  const kuq::TimeSeries series = kuq::load_csv(path, schema);
  EXPECT_EQ(series.states(), 2);
  EXPECT_EQ(series.state_names[0], "time");
  EXPECT_DOUBLE_EQ(series.sample_period, 0.5);
}

TEST_F(CsvFile, BadTokenReportsRowAndColumn) {
  const fs::path path =
      write_file("bad.csv", "time,a\n0,1\n1,oops\n2,3\n");
  try {
    kuq::load_csv(path);
    FAIL() << "expected a parse failure";
  } catch (const kuq::ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column 2"), std::string::npos) << msg;
  }
}

TEST_F(CsvFile, RaggedRowIsAShapeError) {
  const fs::path path = write_file("ragged.csv", "a,b\n1,2\n3\n");
  EXPECT_THROW(kuq::load_csv(path), kuq::ShapeError);
}

TEST_F(CsvFile, NonUniformTimeStepsAreRejected) {
  const fs::path path =
      write_file("jitter.csv", "time,a\n0,1\n0.1,2\n0.35,3\n");
  EXPECT_THROW(kuq::load_csv(path), kuq::ParseError);
  const fs::path reversed =
      write_file("reversed.csv", "time,a\n0.2,1\n0.1,2\n0,3\n");
  EXPECT_THROW(kuq::load_csv(reversed), kuq::ParseError);
}

TEST_F(CsvFile, MissingFileIsAnIoError) {
  EXPECT_THROW(kuq::load_csv(fs::path(::testing::TempDir()) / "nope.csv"),
               kuq::IoError);
}

TEST_F(CsvFile, WriteThenLoadRoundTripsBitwise) {
  Matrix data(3, 2);
  data << 0.1, -2.7182818284590452, 1e-17, 3.0000000000000004, -0.0, 12345.678;
  const kuq::TimeSeries original =
      kuq::make_time_series(0.01, {"a", "b"}, data);
  const fs::path path = fs::path(::testing::TempDir()) / "round.csv";
  kuq::write_csv(original, path);
  const kuq::TimeSeries loaded = kuq::load_csv(path);
  EXPECT_DOUBLE_EQ(loaded.sample_period, 0.01);
  ASSERT_EQ(loaded.samples(), original.samples());
  ASSERT_EQ(loaded.states(), original.states());
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      EXPECT_EQ(loaded.data(i, j), original.data(i, j))
          << "entry (" << i << ", " << j << ")";
    }
  }
}

TEST_F(CsvFile, StateNamesWithDelimitersAreRejected) {
  const kuq::TimeSeries series =
      kuq::make_time_series(1.0, {"a,b"}, Matrix::Zero(2, 1));
  EXPECT_THROW(
      kuq::write_csv(series, fs::path(::testing::TempDir()) / "x.csv"),
      kuq::InvalidParameter);
}

TEST(BuildSnapshots, AlignsConsecutiveRows) {
  Matrix data(4, 2);
  data << 0, 10, 1, 11, 2, 12, 3, 13;
  const kuq::TimeSeries series = kuq::make_time_series(1.0, {"a", "b"}, data);
  const kuq::SnapshotPair pair = kuq::build_snapshots(series);
  ASSERT_EQ(pair.samples(), 3);
  ASSERT_EQ(pair.states(), 2);
  for (Eigen::Index t = 0; t < 3; ++t) {
    EXPECT_DOUBLE_EQ(pair.x_obs(t, 0), data(t, 0));
    EXPECT_DOUBLE_EQ(pair.y_obs(t, 0), data(t + 1, 0));
    EXPECT_DOUBLE_EQ(pair.x_obs(t, 1), data(t, 1));
    EXPECT_DOUBLE_EQ(pair.y_obs(t, 1), data(t + 1, 1));
  }
}

TEST(SteadyWindow, TwoSampleWindowHasTextbookVariance) {
  Matrix data(4, 1);
  data << 5.0, 0.0, 2.0, 5.0;
  const kuq::TimeSeries series = kuq::make_time_series(1.0, {"a"}, data);
  // Rows 1 and 2 (times 1 s and 2 s) hold values 0 and 2; the unbiased
  // variance of {0, 2} is exactly 2.
  const kuq::NoiseModel model = kuq::variance_steady_window(series, 1.0, 2.0);
  ASSERT_EQ(model.variances.size(), 1u);
  EXPECT_DOUBLE_EQ(model.variances[0], 2.0);
  EXPECT_EQ(model.provenance, kuq::NoiseProvenance::SteadyWindow);
}

TEST(SteadyWindow, WindowEdgesOnSampleTimesAreInclusive) {
  Matrix data(5, 1);
  data << 100.0, 1.0, 3.0, 5.0, 100.0;
  const kuq::TimeSeries series = kuq::make_time_series(0.5, {"a"}, data);
  // [0.5 s, 1.5 s] covers rows 1..3 inclusive; variance of {1, 3, 5} is 4.
  const kuq::NoiseModel model = kuq::variance_steady_window(series, 0.5, 1.5);
  EXPECT_DOUBLE_EQ(model.variances[0], 4.0);
}

TEST(SteadyWindow, AgreesWithNaiveTwoPassOracle) {
  const std::vector<double> noise =
      kuq::gauss_sample({31, 0}, 0.3, 1.7, 3 * 200);
  Matrix data(200, 3);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) data(i, j) = noise[k++];
  }
  const kuq::TimeSeries series =
      kuq::make_time_series(0.1, {"a", "b", "c"}, data);
  const kuq::NoiseModel model = kuq::variance_steady_window(series, 2.0, 15.0);
  for (Eigen::Index j = 0; j < 3; ++j) {
    std::vector<double> window;
    for (Eigen::Index i = 20; i <= 150; ++i) window.push_back(data(i, j));
    EXPECT_NEAR(model.variances[static_cast<std::size_t>(j)],
                oracle::naive_variance(window), 1e-12)
        << "state " << j;
  }
}

TEST(SteadyWindow, TooNarrowWindowIsEmpty) {
  Matrix data(10, 1);
  for (Eigen::Index i = 0; i < 10; ++i) data(i, 0) = static_cast<double>(i);
  const kuq::TimeSeries series = kuq::make_time_series(1.0, {"a"}, data);
  EXPECT_THROW(kuq::variance_steady_window(series, 3.2, 3.8), kuq::EmptyWindow);
  EXPECT_THROW(kuq::variance_steady_window(series, 5.0, 4.0), kuq::EmptyWindow);
  EXPECT_THROW(kuq::variance_steady_window(series, 20.0, 30.0),
               kuq::EmptyWindow);
}

TEST(SteadyWindow, ConstantChannelIsDegenerate) {
  Matrix data = Matrix::Ones(50, 2);
  const std::vector<double> jitter = kuq::gauss_sample({32, 0}, 0.0, 1.0, 50);
  for (Eigen::Index i = 0; i < 50; ++i) data(i, 1) = jitter[i];
  const kuq::TimeSeries series = kuq::make_time_series(1.0, {"flat", "ok"},
                                                       data);
  EXPECT_THROW(kuq::variance_steady_window(series, 0.0, 49.0),
               kuq::DegenerateVariance);
}

TEST(DetrendPoly, RecoversNoiseVarianceUnderCubicTrend) {
  const Eigen::Index t = 10000;
  const std::vector<double> noise =
      kuq::gauss_sample({33, 0}, 0.0, 0.5, static_cast<std::size_t>(t));
  Matrix data(t, 1);
  for (Eigen::Index i = 0; i < t; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(t - 1);
    const double trend = 2.0 - 3.0 * x + 0.5 * x * x + 4.0 * x * x * x;
    data(i, 0) = trend + noise[static_cast<std::size_t>(i)];
  }
  const kuq::TimeSeries series = kuq::make_time_series(0.01, {"a"}, data);
  const kuq::NoiseModel model = kuq::variance_detrend_poly(series, 3);
  EXPECT_GE(model.variances[0], 0.23);
  EXPECT_LE(model.variances[0], 0.27);
  EXPECT_EQ(model.provenance, kuq::NoiseProvenance::PolynomialDetrend);
}

TEST(DetrendPoly, HigherDegreeStillIsolatesTheNoise) {
  const Eigen::Index t = 5000;
  const std::vector<double> noise =
      kuq::gauss_sample({34, 0}, 0.0, 1.0, static_cast<std::size_t>(t));
  Matrix data(t, 1);
  for (Eigen::Index i = 0; i < t; ++i) {
    const double x = 2.0 * static_cast<double>(i) / (t - 1) - 1.0;
    data(i, 0) = std::pow(x, 5) - x + noise[static_cast<std::size_t>(i)];
  }
  const kuq::TimeSeries series = kuq::make_time_series(0.01, {"a"}, data);
  const kuq::NoiseModel model = kuq::variance_detrend_poly(series, 9);
  EXPECT_NEAR(model.variances[0], 1.0, 0.08);
}

TEST(DetrendPoly, ExactPolynomialIsDegenerate) {
  Matrix data(50, 1);
  for (Eigen::Index i = 0; i < 50; ++i) {
    const double x = static_cast<double>(i);
    data(i, 0) = 1.0 + 0.25 * x + 0.01 * x * x;
  }
  const kuq::TimeSeries series = kuq::make_time_series(1.0, {"a"}, data);
  EXPECT_THROW(kuq::variance_detrend_poly(series, 3), kuq::DegenerateVariance);
}

TEST(DetrendPoly, NeedsMoreSamplesThanCoefficients) {
  const kuq::TimeSeries series =
      kuq::make_time_series(1.0, {"a"}, Matrix::Zero(4, 1));
  EXPECT_THROW(kuq::variance_detrend_poly(series, 3), kuq::InsufficientData);
  EXPECT_THROW(kuq::variance_detrend_poly(series, -1), kuq::InvalidParameter);
}

TEST(Manufacturer, PassesValuesThroughAndValidates) {
  const kuq::NoiseModel model = kuq::variance_manufacturer({0.01, 4.0});
  ASSERT_EQ(model.variances.size(), 2u);
  EXPECT_DOUBLE_EQ(model.variances[0], 0.01);
  EXPECT_DOUBLE_EQ(model.variances[1], 4.0);
  EXPECT_EQ(model.provenance, kuq::NoiseProvenance::Manufacturer);
  EXPECT_THROW(kuq::variance_manufacturer({}), kuq::InvalidParameter);
  EXPECT_THROW(kuq::variance_manufacturer({1.0, 0.0}), kuq::InvalidParameter);
  EXPECT_THROW(kuq::variance_manufacturer({-0.5}), kuq::InvalidParameter);
}

TEST(Provenance, StringConversionRoundTrips) {
  for (const auto p :
       {kuq::NoiseProvenance::SteadyWindow, kuq::NoiseProvenance::PolynomialDetrend,
        kuq::NoiseProvenance::Manufacturer}) {
    EXPECT_EQ(kuq::noise_provenance_from_string(kuq::to_string(p)), p);
  }
  EXPECT_THROW(kuq::noise_provenance_from_string("guesswork"), kuq::ParseError);
}

}  // namespace
