#pragma once

#include <cstdint>
#include <vector>

#include "kuq/muq.hpp"
#include "kuq/numkernel.hpp"
#include "kuq/rng.hpp"

namespace kuq {

// Parameters of the limiting bulk eigenvalue law for the symmetrized
// noise operator: aspect ratio lambda = p / m in (0, 1] and per-entry
// variance sigma2. The support is [lower_edge, upper_edge] with
// edges sigma2 (1 -+ sqrt(lambda))^2.
class MPParams {
 public:
  MPParams(double ratio, double sigma2);

  double ratio() const noexcept { return ratio_; }
  double sigma2() const noexcept { return sigma2_; }
  double lower_edge() const noexcept { return lower_; }
  double upper_edge() const noexcept { return upper_; }

 private:
  double ratio_;
  double sigma2_;
  double lower_;
  double upper_;
};

// Bulk density. Zero outside the open support interval, including at the
// edges themselves; integrates to one.
double mp_density(double x, const MPParams& params);

// Distribution function of the bulk law, by adaptive quadrature.
double mp_cdf(double x, const MPParams& params);

// iid draws from the bulk law by inverse transform over a tabulated CDF.
// The trigonometric substitution x = lower cos^2(t) + upper sin^2(t) keeps
// the tabulated integrand smooth across the square-root edges.
std::vector<double> mp_sample(RngHandle handle, const MPParams& params,
                              std::size_t count);

// Raw moments 1..order of the bulk law, order in [1, 4], each integrated
// to absolute accuracy well below 1e-8.
std::vector<double> eigenvalue_moments(const MPParams& params, int order);

// Magnitude spectrum of an operator K: square roots of the eigenvalues of
// the symmetrization K K^T / p, sorted descending.
Vector koopman_sym_spectrum(const Matrix& k);

// Haar-distributed orthogonal matrices, one per child stream of the
// handle, via sign-normalized QR of iid Gaussian matrices.
std::vector<Matrix> haar_sample(RngHandle handle, std::int64_t dim,
                                std::size_t count);

// One ensemble member for the eigenvalue/eigenvector decorrelation check.
struct KoopmanSample {
  Matrix k;        // p x p estimate
  Matrix eigvecs;  // p x p, columns aligned with eigvals
  Vector eigvals;  // length p
};

struct DecorrelationStat {
  // max over entries (i,j) and components l of |corr(K_ij, V_lj)|.
  double max_abs_correlation = 0.0;
  // set when some series is constant across the ensemble, in which case
  // those pairs are skipped (correlation undefined).
  bool degenerate = false;
};

DecorrelationStat tuple_decorrelation_check(
    const std::vector<KoopmanSample>& ensemble);

// Spectral summary induced by an elementwise variance matrix: the matched
// bulk law plus its first four moments and the rotation-ensemble dimension.
struct SpectralUQ {
  MPParams mp;
  std::vector<double> moments;  // raw moments 1..4
  std::int64_t haar_dim = 0;
};

SpectralUQ make_spectral_uq(const VarianceMatrix& vm);

}  // namespace kuq
