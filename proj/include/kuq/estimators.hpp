#pragma once

#include <cstdint>

#include "kuq/ingest.hpp"
#include "kuq/numkernel.hpp"

namespace kuq {

enum class DictionaryKind {
  Identity,
  Quadratic,
};

enum class EstimationMethod {
  Dmd,
  Edmd,
};

std::string to_string(DictionaryKind kind);
std::string to_string(EstimationMethod method);
DictionaryKind dictionary_kind_from_string(const std::string& name);
EstimationMethod estimation_method_from_string(const std::string& name);

// Observable dictionary. Identity keeps the n raw states; quadratic appends
// the elementwise squares, ordered (x_1..x_n, x_1^2..x_n^2).
struct Dictionary {
  DictionaryKind kind = DictionaryKind::Identity;
  std::int64_t input_dim = 0;

  static Dictionary identity(std::int64_t n);
  static Dictionary quadratic(std::int64_t n);

  std::int64_t feature_dim() const;
};

// Least-squares push-forward estimate in feature space. The operator acts
// on row vectors: lift(X) * k_obs approximates lift(Y).
struct KoopmanEstimate {
  Matrix k_obs;  // p x p
  EstimationMethod method = EstimationMethod::Dmd;
  std::int64_t feature_dim = 0;   // p
  std::int64_t sample_count = 0;  // m
};

// Applies the dictionary to every row of an m x n state matrix, giving
// m x p features.
Matrix lift(const Dictionary& dict, const Matrix& states);

// Pushes per-state noise variances through the dictionary. For Gaussian
// noise on a quadratic observable the lifted variance is 3 sigma^4, the
// fourth central moment of N(0, sigma^2).
NoiseModel lift_noise(const Dictionary& dict, const NoiseModel& noise);

KoopmanEstimate dmd_estimate(const SnapshotPair& snapshots,
                             double tol = kDefaultPinvTol);
KoopmanEstimate edmd_estimate(const SnapshotPair& snapshots,
                              const Dictionary& dict,
                              double tol = kDefaultPinvTol);

}  // namespace kuq
