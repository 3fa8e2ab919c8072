#pragma once

#include <cstdint>

#include "kuq/estimators.hpp"
#include "kuq/ingest.hpp"
#include "kuq/numkernel.hpp"

namespace kuq {

// Second moment of one entry in the pseudo-inverse of an m x p matrix whose
// rows are iid Gaussian with per-column variances; entry (i, j) of the
// pseudo-inverse has mean zero and second moment 1 / (sigma_i^2 m (m-p-1)),
// where sigma_i^2 is the variance of feature column i. Defined for m > p+3.
double pinv_second_moment(double sigma2_i, std::int64_t m, std::int64_t p);

// Entry moments of the noise pseudo-inverse for a full feature set.
struct PinvMoments {
  double first = 0.0;         // identically zero by symmetry
  Vector second_by_feature;   // length p, indexed by pseudo-inverse row
  std::int64_t m = 0;
  std::int64_t p = 0;

  double second(std::int64_t i, std::int64_t j) const;
};

PinvMoments pinv_moments(const NoiseModel& lifted_noise, std::int64_t m);

// Elementwise mean and variance of the estimated push-forward matrix under
// measurement noise. mean is the observed estimate itself; s holds the
// per-entry variances.
struct VarianceMatrix {
  Matrix mean;  // p x p
  Matrix s;     // p x p, strictly positive entries
  std::int64_t m = 0;
  std::int64_t p = 0;
  NoiseProvenance provenance = NoiseProvenance::Manufacturer;
};

// Analytic per-entry variance of the estimate: off-diagonal entries get
// sigma_j^2 / (sigma_i^2 (m - p - 1)), diagonal entries 1 / (m - p - 1).
// The noise model must already live in feature space (see lift_noise).
VarianceMatrix analytic_variance(const KoopmanEstimate& estimate,
                                 const NoiseModel& lifted_noise);

struct NormalParams {
  double mean = 0.0;
  double variance = 0.0;
};

// Marginal distribution of one matrix entry, asymptotically Gaussian.
NormalParams element_distribution(const VarianceMatrix& vm, std::int64_t i,
                                  std::int64_t j);

}  // namespace kuq
