#pragma once

#include <cstdint>
#include <vector>

#include "kuq/estimators.hpp"
#include "kuq/ingest.hpp"
#include "kuq/muq.hpp"
#include "kuq/rng.hpp"
#include "kuq/spectral.hpp"

namespace kuq {

struct MCConfig {
  std::int64_t replicates = 1000;
  RngHandle rng;
  EstimationMethod method = EstimationMethod::Dmd;
  // Consulted only for EDMD; DMD always runs with the identity dictionary.
  Dictionary dictionary;
  bool parallel = true;
  double tol = kDefaultPinvTol;
};

struct MCResult {
  Matrix k_obs;  // estimate from the unperturbed data
  // Per-entry sample variance of the replicate estimates about k_obs,
  // denominator N - 1.
  Matrix r_hat;
  // Same but centered at the ensemble mean; never exceeds r_hat beyond
  // rounding, recorded as a diagnostic.
  Matrix r_hat_mean_centered;
  // Replicate estimates, one row per replicate, entries row-major.
  Matrix ensemble;
  std::vector<Vector> spectra;           // magnitude spectrum per replicate
  std::vector<Vector> centered_spectra;  // spectrum of (K_k - k_obs)
  std::int64_t m = 0;
  std::int64_t p = 0;
  std::int64_t replicates = 0;
};

// Per-entry sample variance of an N x (p*q) ensemble about a fixed p x q
// center, denominator N - 1.
Matrix variance_about(const Matrix& ensemble, const Matrix& center);

// One noise replicate: adds independent N(0, sigma_j^2) draws to every
// entry of column j of both snapshot matrices (x first, then y, row-major
// draw order). Zero variances are allowed and leave columns untouched.
SnapshotPair sample_dataset(RngHandle handle, const SnapshotPair& snapshots,
                            const NoiseModel& noise);

// Monte Carlo reference for the analytic variances. EDMD replicates
// perturb the lifted snapshot matrices directly with the lifted noise
// model. Replicate k always consumes child stream k of config.rng, so
// parallel and serial runs produce bit-identical results.
MCResult mc_variance(const SnapshotPair& snapshots, const NoiseModel& noise,
                     const MCConfig& config);

// Two-sample Kolmogorov-Smirnov distance (sup of ECDF difference).
double ks_distance(std::vector<double> a, std::vector<double> b);

struct ComparisonReport {
  Matrix ratio;  // r_hat ./ analytic s, per entry
  // Per-entry KS distance between the replicate ensemble and matched
  // normal draws from the analytic element distribution.
  Matrix ks;
  double median_ratio = 0.0;
  std::vector<double> analytic_moments;  // bulk-law raw moments 1..4
  std::vector<double> mc_moments;        // centered-spectrum raw moments 1..4
  std::vector<double> moment_deltas;     // analytic - mc
  std::int64_t m = 0;
  std::int64_t p = 0;
  std::int64_t replicates = 0;
};

// Head-to-head comparison of the Monte Carlo reference against the
// analytic law. The handle feeds the matched normal draws for the KS
// column; child stream (i*p + j) serves entry (i, j).
ComparisonReport compare_report(const MCResult& mc,
                                const VarianceMatrix& analytic,
                                const SpectralUQ& spectral, RngHandle handle);

}  // namespace kuq
