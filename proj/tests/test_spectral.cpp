#include "kuq/spectral.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "kuq/errors.hpp"
#include "kuq/montecarlo.hpp"
#include "kuq/rng.hpp"
#include "oracles.hpp"

namespace {

using kuq::Matrix;
using kuq::Vector;

TEST(BulkLaw, ParameterValidationAndEdges) {
  EXPECT_THROW(kuq::MPParams(0.0, 1.0), kuq::InvalidParameter);
  EXPECT_THROW(kuq::MPParams(1.2, 1.0), kuq::InvalidParameter);
  EXPECT_THROW(kuq::MPParams(-0.5, 1.0), kuq::InvalidParameter);
  EXPECT_THROW(kuq::MPParams(0.5, 0.0), kuq::InvalidParameter);
  EXPECT_THROW(kuq::MPParams(0.5, -1.0), kuq::InvalidParameter);

  const kuq::MPParams params(0.25, 2.0);
  EXPECT_DOUBLE_EQ(params.lower_edge(), 2.0 * 0.25);
  EXPECT_DOUBLE_EQ(params.upper_edge(), 2.0 * 2.25);
}

TEST(BulkLaw, DensityHandValueAtSquareAspect) {
  // ratio 1, variance 1: f(1) = sqrt((4 - 1) * 1) / (2 pi) = sqrt(3) / (2 pi).
  const kuq::MPParams params(1.0, 1.0);
  EXPECT_NEAR(kuq::mp_density(1.0, params),
              std::sqrt(3.0) / (2.0 * std::numbers::pi), 1e-15);
}

TEST(BulkLaw, DensityVanishesOutsideAndAtTheEdges) {
  const kuq::MPParams params(0.5, 1.0);
  EXPECT_EQ(kuq::mp_density(params.lower_edge(), params), 0.0);
  EXPECT_EQ(kuq::mp_density(params.upper_edge(), params), 0.0);
  EXPECT_EQ(kuq::mp_density(params.lower_edge() - 0.1, params), 0.0);
  EXPECT_EQ(kuq::mp_density(params.upper_edge() + 0.1, params), 0.0);
  EXPECT_EQ(kuq::mp_density(-1.0, params), 0.0);
  const double mid = 0.5 * (params.lower_edge() + params.upper_edge());
  EXPECT_GT(kuq::mp_density(mid, params), 0.0);
}

TEST(BulkLaw, DensityMatchesReferenceFormulaOnAGrid) {
  for (double ratio : {0.25, 0.5, 1.0}) {
    for (double sigma2 : {0.5, 1.0, 2.0}) {
      const kuq::MPParams params(ratio, sigma2);
      for (int k = 1; k < 40; ++k) {
        const double x = params.lower_edge() +
                         (params.upper_edge() - params.lower_edge()) * k / 40.0;
        EXPECT_NEAR(kuq::mp_density(x, params),
                    oracle::mp_density_ref(x, ratio, sigma2), 1e-13)
            << "ratio " << ratio << " sigma2 " << sigma2 << " x " << x;
      }
    }
  }
}

TEST(BulkLaw, CdfMatchesReferenceQuadrature) {
  for (double ratio : {0.25, 1.0}) {
    for (double sigma2 : {0.5, 2.0}) {
      const kuq::MPParams params(ratio, sigma2);
      EXPECT_EQ(kuq::mp_cdf(params.lower_edge(), params), 0.0);
      EXPECT_NEAR(kuq::mp_cdf(params.upper_edge(), params), 1.0, 1e-9);
      double prev = 0.0;
      for (int k = 1; k <= 20; ++k) {
        const double x = params.lower_edge() +
                         (params.upper_edge() - params.lower_edge()) * k / 21.0;
        const double cdf = kuq::mp_cdf(x, params);
        EXPECT_NEAR(cdf, oracle::mp_cdf_ref(x, ratio, sigma2), 1e-8)
            << "ratio " << ratio << " sigma2 " << sigma2 << " x " << x;
        EXPECT_GE(cdf, prev);
        prev = cdf;
      }
    }
  }
}

TEST(BulkLaw, MomentsMatchClosedForms) {
  // Raw moments of the bulk law have closed forms in the aspect ratio:
  // m1 = s, m2 = s^2 (1 + r), m3 = s^3 (1 + 3r + r^2),
  // m4 = s^4 (1 + 6r + 6r^2 + r^3) with s the variance and r the ratio.
  for (double ratio : {0.25, 0.5, 1.0}) {
    for (double sigma2 : {0.5, 1.0, 2.0}) {
      const kuq::MPParams params(ratio, sigma2);
      const std::vector<double> m = kuq::eigenvalue_moments(params, 4);
      ASSERT_EQ(m.size(), 4u);
      const double s = sigma2;
      const double r = ratio;
      EXPECT_NEAR(m[0], s, 1e-6 * s);
      EXPECT_NEAR(m[1], s * s * (1.0 + r), 1e-6 * m[1]);
      EXPECT_NEAR(m[2], s * s * s * (1.0 + 3.0 * r + r * r), 1e-8 * m[2]);
      EXPECT_NEAR(m[3],
                  s * s * s * s * (1.0 + 6.0 * r + 6.0 * r * r + r * r * r),
                  1e-8 * m[3]);
      // Cross-check against the fixed-grid oracle as well.
      for (int order = 1; order <= 4; ++order) {
        EXPECT_NEAR(m[static_cast<std::size_t>(order - 1)],
                    oracle::mp_moment_ref(order, ratio, sigma2),
                    1e-8 * m[static_cast<std::size_t>(order - 1)]);
      }
    }
  }
  EXPECT_THROW(kuq::eigenvalue_moments(kuq::MPParams(0.5, 1.0), 0),
               kuq::InvalidParameter);
  EXPECT_THROW(kuq::eigenvalue_moments(kuq::MPParams(0.5, 1.0), 5),
               kuq::InvalidParameter);
}

TEST(BulkLaw, SamplerTracksTheAnalyticDistribution) {
  const double ratio = 0.5;
  const double sigma2 = 1.5;
  const kuq::MPParams params(ratio, sigma2);
  const std::vector<double> draws = kuq::mp_sample({71, 0}, params, 1000000);
  for (double x : draws) {
    ASSERT_GE(x, params.lower_edge());
    ASSERT_LE(x, params.upper_edge());
  }
  const oracle::MpCdfTable cdf(ratio, sigma2);
  const double ks = oracle::ks_one_sample_ref(draws, cdf);
  EXPECT_LE(ks, 0.005);
  const std::vector<double> again = kuq::mp_sample({71, 0}, params, 100);
  const std::vector<double> first = kuq::mp_sample({71, 0}, params, 100);
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_EQ(again[i], first[i]);
  }
}

TEST(SymSpectrum, HandComputedDiagonalCase) {
  Matrix k = Matrix::Zero(2, 2);
  k(0, 0) = 2.0;
  k(1, 1) = -3.0;
  // K K^T / p = diag(2, 4.5); magnitudes sorted descending.
  const Vector spectrum = kuq::koopman_sym_spectrum(k);
  ASSERT_EQ(spectrum.size(), 2);
  EXPECT_NEAR(spectrum(0), std::sqrt(4.5), 1e-14);
  EXPECT_NEAR(spectrum(1), std::sqrt(2.0), 1e-14);
  EXPECT_THROW(kuq::koopman_sym_spectrum(Matrix::Zero(2, 3)),
               kuq::ShapeError);
}

TEST(SymSpectrum, MatchesDirectEigenDecomposition) {
  const std::vector<double> vals = kuq::gauss_sample({72, 0}, 0.0, 1.0, 25);
  Matrix k(5, 5);
  std::size_t idx = 0;
  for (Eigen::Index i = 0; i < 5; ++i) {
    for (Eigen::Index j = 0; j < 5; ++j) k(i, j) = vals[idx++];
  }
  const Vector spectrum = kuq::koopman_sym_spectrum(k);
  const Matrix sym = (k * k.transpose()) / 5.0;
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  for (Eigen::Index i = 0; i < 5; ++i) {
    const double expected =
        std::sqrt(std::max(solver.eigenvalues()(4 - i), 0.0));
    EXPECT_NEAR(spectrum(i), expected, 1e-12);
    if (i > 0) EXPECT_GE(spectrum(i - 1), spectrum(i));
  }
}

TEST(Haar, SamplesAreOrthonormalAndReproducible) {
  const std::vector<Matrix> qs = kuq::haar_sample({73, 0}, 8, 20);
  ASSERT_EQ(qs.size(), 20u);
  const Matrix eye = Matrix::Identity(8, 8);
  for (const Matrix& q : qs) {
    EXPECT_LE((q.transpose() * q - eye).cwiseAbs().maxCoeff(), 1e-10);
  }
  const std::vector<Matrix> again = kuq::haar_sample({73, 0}, 8, 20);
  for (std::size_t k = 0; k < qs.size(); ++k) {
    EXPECT_EQ((qs[k] - again[k]).cwiseAbs().maxCoeff(), 0.0);
  }
  EXPECT_THROW(kuq::haar_sample({73, 0}, 0, 5), kuq::InvalidParameter);
}

TEST(Haar, DimensionOneIsAFairSign) {
  const std::vector<Matrix> qs = kuq::haar_sample({74, 0}, 1, 10000);
  int plus = 0;
  for (const Matrix& q : qs) {
    ASSERT_TRUE(q(0, 0) == 1.0 || q(0, 0) == -1.0);
    if (q(0, 0) == 1.0) ++plus;
  }
  const double freq = plus / 10000.0;
  EXPECT_GE(freq, 0.48);
  EXPECT_LE(freq, 0.52);
}

TEST(Haar, LeftRotationLeavesEntryDistributionUnchanged) {
  // Invariance under left multiplication by a fixed orthogonal matrix is
  // what distinguishes the Haar measure from generic random orthogonal
  // ensembles; an unnormalized QR fails this badly.
  const std::int64_t dim = 8;
  const std::size_t n = 10000;
  const std::vector<Matrix> qs = kuq::haar_sample({62, 0}, dim, n);
  const Matrix o = kuq::haar_sample({62, 1}, dim, 1)[0];
  std::vector<double> plain;
  std::vector<double> rotated;
  plain.reserve(n);
  rotated.reserve(n);
  for (const Matrix& q : qs) {
    plain.push_back(q(0, 0));
    rotated.push_back((o * q)(0, 0));
  }
  EXPECT_LE(oracle::ks_two_sample_ref(plain, rotated), 0.03);
}

TEST(Decorrelation, SyntheticHaarEnsembleShowsNoCoupling) {
  const std::int64_t p = 3;
  const std::size_t n = 10000;
  const std::vector<Matrix> vs = kuq::haar_sample({75, 0}, p, n);
  kuq::Rng rng(kuq::RngHandle{75, 1});
  std::vector<kuq::KoopmanSample> ensemble;
  ensemble.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vector lambda(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      const double g = rng.next_gauss();
      lambda(i) = 1.0 + g * g;
    }
    std::sort(lambda.data(), lambda.data() + p, std::greater<double>());
    kuq::KoopmanSample sample;
    sample.eigvecs = vs[k];
    sample.eigvals = lambda;
    sample.k = vs[k] * lambda.asDiagonal() * vs[k].transpose();
    ensemble.push_back(std::move(sample));
  }
  const kuq::DecorrelationStat stat = kuq::tuple_decorrelation_check(ensemble);
  EXPECT_FALSE(stat.degenerate);
  EXPECT_LE(stat.max_abs_correlation, 0.05);
}

TEST(Decorrelation, ConstantEnsembleIsDegenerate) {
  kuq::KoopmanSample sample;
  sample.k = Matrix::Identity(2, 2);
  sample.eigvecs = Matrix::Identity(2, 2);
  sample.eigvals = Vector::Ones(2);
  const std::vector<kuq::KoopmanSample> ensemble(200, sample);
  const kuq::DecorrelationStat stat = kuq::tuple_decorrelation_check(ensemble);
  EXPECT_TRUE(stat.degenerate);
  EXPECT_EQ(stat.max_abs_correlation, 0.0);
}

TEST(Decorrelation, RejectsTinyEnsembles) {
  kuq::KoopmanSample sample;
  sample.k = Matrix::Identity(2, 2);
  sample.eigvecs = Matrix::Identity(2, 2);
  sample.eigvals = Vector::Ones(2);
  const std::vector<kuq::KoopmanSample> ensemble(99, sample);
  EXPECT_THROW(kuq::tuple_decorrelation_check(ensemble), kuq::InvalidParameter);
}

TEST(SpectralSummary, DerivesLawFromVarianceMatrix) {
  kuq::VarianceMatrix vm;
  vm.m = 100;
  vm.p = 4;
  vm.mean = Matrix::Zero(4, 4);
  vm.s = Matrix::Constant(4, 4, 0.02);
  const kuq::SpectralUQ uq = kuq::make_spectral_uq(vm);
  EXPECT_DOUBLE_EQ(uq.mp.ratio(), 0.04);
  EXPECT_DOUBLE_EQ(uq.mp.sigma2(), 0.02);
  EXPECT_EQ(uq.haar_dim, 4);
  ASSERT_EQ(uq.moments.size(), 4u);
  EXPECT_NEAR(uq.moments[0], 0.02, 1e-8);
  EXPECT_NEAR(uq.moments[1], 0.02 * 0.02 * 1.04, 1e-9);
}

}  // namespace
