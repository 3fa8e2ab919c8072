#include "kuq/muq.hpp"

#include <string>

namespace kuq {

namespace {

void check_dof(std::int64_t m, std::int64_t p, const char* where) {
  if (p < 1) {
    throw InvalidParameter(std::string(where) +
                           ": feature dimension must be >= 1, got " +
                           std::to_string(p));
  }
  if (m <= p + 3) {
    throw DegreesOfFreedomError(std::string(where) + ": need m > p + 3, got m=" +
                                std::to_string(m) + ", p=" + std::to_string(p));
  }
}

}  // namespace

double pinv_second_moment(double sigma2_i, std::int64_t m, std::int64_t p) {
  check_dof(m, p, "pinv_second_moment");
  if (!(sigma2_i > 0.0)) {
    throw DegenerateVariance(
        "pinv_second_moment: feature variance must be positive, got " +
        std::to_string(sigma2_i));
  }
  return 1.0 / (sigma2_i * static_cast<double>(m) *
                static_cast<double>(m - p - 1));
}

double PinvMoments::second(std::int64_t i, std::int64_t j) const {
  if (i < 0 || i >= p) {
    throw IndexError("PinvMoments::second: row " + std::to_string(i) +
                     " out of range [0, " + std::to_string(p) + ")");
  }
  if (j < 0 || j >= m) {
    throw IndexError("PinvMoments::second: column " + std::to_string(j) +
                     " out of range [0, " + std::to_string(m) + ")");
  }
  return second_by_feature(i);
}

PinvMoments pinv_moments(const NoiseModel& lifted_noise, std::int64_t m) {
  const std::int64_t p =
      static_cast<std::int64_t>(lifted_noise.variances.size());
  check_dof(m, p, "pinv_moments");

  PinvMoments moments;
  moments.first = 0.0;
  moments.m = m;
  moments.p = p;
  moments.second_by_feature.resize(p);
  for (std::int64_t i = 0; i < p; ++i) {
    moments.second_by_feature(i) =
        pinv_second_moment(lifted_noise.variances[static_cast<std::size_t>(i)],
                           m, p);
  }
  return moments;
}

VarianceMatrix analytic_variance(const KoopmanEstimate& estimate,
                                 const NoiseModel& lifted_noise) {
  const std::int64_t p = estimate.feature_dim;
  const std::int64_t m = estimate.sample_count;
  check_dof(m, p, "analytic_variance");
  if (estimate.k_obs.rows() != p || estimate.k_obs.cols() != p) {
    throw ShapeError("analytic_variance: estimate matrix is " +
                     std::to_string(estimate.k_obs.rows()) + "x" +
                     std::to_string(estimate.k_obs.cols()) + ", expected " +
                     std::to_string(p) + "x" + std::to_string(p));
  }
  if (static_cast<std::int64_t>(lifted_noise.variances.size()) != p) {
    throw ShapeError("analytic_variance: noise model has " +
                     std::to_string(lifted_noise.variances.size()) +
                     " variances for feature dimension " + std::to_string(p));
  }
  for (std::size_t i = 0; i < lifted_noise.variances.size(); ++i) {
    if (!(lifted_noise.variances[i] > 0.0)) {
      throw DegenerateVariance(
          "analytic_variance: feature variance " + std::to_string(i) +
          " must be positive, got " + std::to_string(lifted_noise.variances[i]));
    }
  }

  const double dof = static_cast<double>(m - p - 1);
  VarianceMatrix vm;
  vm.mean = estimate.k_obs;
  vm.m = m;
  vm.p = p;
  vm.provenance = lifted_noise.provenance;
  vm.s.resize(p, p);
  for (std::int64_t i = 0; i < p; ++i) {
    const double sigma2_i = lifted_noise.variances[static_cast<std::size_t>(i)];
    for (std::int64_t j = 0; j < p; ++j) {
      if (i == j) {
        // Written as the literal ratio so all diagonal entries are
        // bit-identical.
        vm.s(i, j) = 1.0 / dof;
      } else {
        const double sigma2_j =
            lifted_noise.variances[static_cast<std::size_t>(j)];
        vm.s(i, j) = sigma2_j / (sigma2_i * dof);
      }
    }
  }
  return vm;
}

NormalParams element_distribution(const VarianceMatrix& vm, std::int64_t i,
                                  std::int64_t j) {
  if (i < 0 || i >= vm.p || j < 0 || j >= vm.p) {
    throw IndexError("element_distribution: index (" + std::to_string(i) +
                     ", " + std::to_string(j) + ") out of range for p=" +
                     std::to_string(vm.p));
  }
  return NormalParams{vm.mean(i, j), vm.s(i, j)};
}

}  // namespace kuq
