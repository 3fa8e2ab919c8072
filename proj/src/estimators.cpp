#include "kuq/estimators.hpp"

#include <string>
#include <utility>

namespace kuq {

std::string to_string(DictionaryKind kind) {
  switch (kind) {
    case DictionaryKind::Identity:
      return "identity";
    case DictionaryKind::Quadratic:
      return "quadratic";
  }
  throw InvalidParameter("to_string: unknown dictionary kind");
}

std::string to_string(EstimationMethod method) {
  switch (method) {
    case EstimationMethod::Dmd:
      return "dmd";
    case EstimationMethod::Edmd:
      return "edmd";
  }
  throw InvalidParameter("to_string: unknown estimation method");
}

DictionaryKind dictionary_kind_from_string(const std::string& name) {
  if (name == "identity") return DictionaryKind::Identity;
  if (name == "quadratic") return DictionaryKind::Quadratic;
  throw ParseError("unknown dictionary kind '" + name + "'");
}

EstimationMethod estimation_method_from_string(const std::string& name) {
  if (name == "dmd") return EstimationMethod::Dmd;
  if (name == "edmd") return EstimationMethod::Edmd;
  throw ParseError("unknown estimation method '" + name + "'");
}

Dictionary Dictionary::identity(std::int64_t n) {
  if (n < 1) {
    throw InvalidParameter("Dictionary: input dimension must be >= 1, got " +
                           std::to_string(n));
  }
  return Dictionary{DictionaryKind::Identity, n};
}

Dictionary Dictionary::quadratic(std::int64_t n) {
  if (n < 1) {
    throw InvalidParameter("Dictionary: input dimension must be >= 1, got " +
                           std::to_string(n));
  }
  return Dictionary{DictionaryKind::Quadratic, n};
}

std::int64_t Dictionary::feature_dim() const {
  return kind == DictionaryKind::Quadratic ? 2 * input_dim : input_dim;
}

Matrix lift(const Dictionary& dict, const Matrix& states) {
  if (states.cols() != dict.input_dim) {
    throw ShapeError("lift: dictionary expects " +
                     std::to_string(dict.input_dim) + " states, got " +
                     std::to_string(states.cols()));
  }
  if (dict.kind == DictionaryKind::Identity) {
    return states;
  }
  Matrix lifted(states.rows(), 2 * states.cols());
  lifted.leftCols(states.cols()) = states;
  lifted.rightCols(states.cols()) = states.array().square();
  return lifted;
}

NoiseModel lift_noise(const Dictionary& dict, const NoiseModel& noise) {
  if (static_cast<std::int64_t>(noise.variances.size()) != dict.input_dim) {
    throw ShapeError("lift_noise: dictionary expects " +
                     std::to_string(dict.input_dim) + " variances, got " +
                     std::to_string(noise.variances.size()));
  }
  if (dict.kind == DictionaryKind::Identity) {
    return noise;
  }
  NoiseModel lifted;
  lifted.provenance = noise.provenance;
  lifted.variances.reserve(2 * noise.variances.size());
  lifted.variances = noise.variances;
  for (double v : noise.variances) {
    lifted.variances.push_back(3.0 * v * v);
  }
  return lifted;
}

KoopmanEstimate dmd_estimate(const SnapshotPair& snapshots, double tol) {
  KoopmanEstimate est =
      edmd_estimate(snapshots, Dictionary::identity(snapshots.states()), tol);
  est.method = EstimationMethod::Dmd;
  return est;
}

KoopmanEstimate edmd_estimate(const SnapshotPair& snapshots,
                              const Dictionary& dict, double tol) {
  if (snapshots.x_obs.rows() != snapshots.y_obs.rows() ||
      snapshots.x_obs.cols() != snapshots.y_obs.cols()) {
    throw ShapeError("edmd_estimate: snapshot matrices disagree in shape");
  }
  if (snapshots.samples() < 1) {
    throw InsufficientData("edmd_estimate: no snapshot pairs");
  }
  const Matrix g = lift(dict, snapshots.x_obs);
  const Matrix a = lift(dict, snapshots.y_obs);

  KoopmanEstimate est;
  est.k_obs = pinv(g, tol) * a;
  est.method = EstimationMethod::Edmd;
  est.feature_dim = g.cols();
  est.sample_count = g.rows();
  return est;
}

}  // namespace kuq
