#include "kuq/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace kuq {

Matrix variance_about(const Matrix& ensemble, const Matrix& center) {
  if (ensemble.rows() < 2) {
    throw InvalidParameter("variance_about: need at least 2 replicates, got " +
                           std::to_string(ensemble.rows()));
  }
  if (ensemble.cols() != center.size()) {
    throw ShapeError("variance_about: ensemble has " +
                     std::to_string(ensemble.cols()) +
                     " columns, center has " + std::to_string(center.size()) +
                     " entries");
  }
  const Eigen::Index rows = center.rows();
  const Eigen::Index cols = center.cols();
  const double dof = static_cast<double>(ensemble.rows() - 1);

  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const Eigen::Index idx = i * cols + j;
      out(i, j) =
          (ensemble.col(idx).array() - center(i, j)).square().sum() / dof;
    }
  }
  return out;
}

SnapshotPair sample_dataset(RngHandle handle, const SnapshotPair& snapshots,
                            const NoiseModel& noise) {
  const Eigen::Index n = snapshots.states();
  if (static_cast<Eigen::Index>(noise.variances.size()) != n) {
    throw ShapeError("sample_dataset: noise model has " +
                     std::to_string(noise.variances.size()) +
                     " variances for " + std::to_string(n) + " states");
  }
  std::vector<double> sds(noise.variances.size());
  for (std::size_t j = 0; j < noise.variances.size(); ++j) {
    if (noise.variances[j] < 0.0) {
      throw InvalidParameter("sample_dataset: negative variance for state " +
                             std::to_string(j));
    }
    sds[j] = std::sqrt(noise.variances[j]);
  }

  Rng rng(handle);
  SnapshotPair out = snapshots;
  for (Matrix* mat : {&out.x_obs, &out.y_obs}) {
    for (Eigen::Index r = 0; r < mat->rows(); ++r) {
      for (Eigen::Index c = 0; c < n; ++c) {
        (*mat)(r, c) += sds[static_cast<std::size_t>(c)] * rng.next_gauss();
      }
    }
  }
  return out;
}

MCResult mc_variance(const SnapshotPair& snapshots, const NoiseModel& noise,
                     const MCConfig& config) {
  if (config.replicates < 2) {
    throw InvalidParameter("mc_variance: need at least 2 replicates, got " +
                           std::to_string(config.replicates));
  }
  if (snapshots.x_obs.rows() != snapshots.y_obs.rows() ||
      snapshots.x_obs.cols() != snapshots.y_obs.cols()) {
    throw ShapeError("mc_variance: snapshot matrices disagree in shape");
  }
  const std::int64_t n = snapshots.states();

  Dictionary dict = Dictionary::identity(n);
  if (config.method == EstimationMethod::Edmd) {
    if (config.dictionary.input_dim != n) {
      throw ShapeError("mc_variance: dictionary expects " +
                       std::to_string(config.dictionary.input_dim) +
                       " states, data has " + std::to_string(n));
    }
    dict = config.dictionary;
  }

  // Replicates perturb the lifted matrices with the lifted noise model, so
  // the feature-space noise assumption matches the analytic law.
  SnapshotPair base;
  base.x_obs = lift(dict, snapshots.x_obs);
  base.y_obs = lift(dict, snapshots.y_obs);
  const NoiseModel lifted = lift_noise(dict, noise);

  const std::int64_t p = base.x_obs.cols();
  const std::int64_t m = base.samples();
  if (m <= p + 3) {
    throw DegreesOfFreedomError("mc_variance: need m > p + 3, got m=" +
                                std::to_string(m) + ", p=" +
                                std::to_string(p));
  }

  const Matrix k_obs = pinv(base.x_obs, config.tol) * base.y_obs;
  const std::int64_t count = config.replicates;

  Matrix ensemble(count, p * p);
  std::vector<Vector> spectra(static_cast<std::size_t>(count));
  std::vector<Vector> centered(static_cast<std::size_t>(count));

  auto run_slot = [&](std::int64_t k) {
    const SnapshotPair replicate =
        sample_dataset(config.rng.child(static_cast<std::uint64_t>(k)), base,
                       lifted);
    const Matrix est = pinv(replicate.x_obs, config.tol) * replicate.y_obs;
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        ensemble(k, i * p + j) = est(i, j);
      }
    }
    spectra[static_cast<std::size_t>(k)] = koopman_sym_spectrum(est);
    centered[static_cast<std::size_t>(k)] =
        koopman_sym_spectrum(est - k_obs);
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::int64_t workers =
      config.parallel ? std::min<std::int64_t>(count, std::max(hw, 2u)) : 1;

  if (workers > 1) {
    // Each replicate writes only its own slot; the reduction below runs
    // serially in index order, so thread scheduling cannot affect results.
    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (std::int64_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::int64_t k = next.fetch_add(1);
          if (k >= count) return;
          try {
            run_slot(k);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            return;
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  } else {
    for (std::int64_t k = 0; k < count; ++k) run_slot(k);
  }

  MCResult result;
  result.k_obs = k_obs;
  result.r_hat = variance_about(ensemble, k_obs);

  Matrix mean(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      mean(i, j) = ensemble.col(i * p + j).mean();
    }
  }
  result.r_hat_mean_centered = variance_about(ensemble, mean);

  // Centering at k_obs can only add mass; a violation beyond rounding
  // means the accumulation is broken.
  const double slack =
      1e-12 * std::max(1.0, result.r_hat.cwiseAbs().maxCoeff());
  if (((result.r_hat_mean_centered - result.r_hat).array() > slack).any()) {
    throw NumericalFailure(
        "mc_variance: variance about the fixed center fell below the "
        "mean-centered variance");
  }

  result.ensemble = std::move(ensemble);
  result.spectra = std::move(spectra);
  result.centered_spectra = std::move(centered);
  result.m = m;
  result.p = p;
  result.replicates = count;
  return result;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) {
    throw InvalidParameter("ks_distance: empty sample");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());

  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

ComparisonReport compare_report(const MCResult& mc,
                                const VarianceMatrix& analytic,
                                const SpectralUQ& spectral, RngHandle handle) {
  if (mc.p != analytic.p || mc.m != analytic.m) {
    throw ShapeError("compare_report: Monte Carlo ran with m=" +
                     std::to_string(mc.m) + ", p=" + std::to_string(mc.p) +
                     " but the analytic law has m=" +
                     std::to_string(analytic.m) + ", p=" +
                     std::to_string(analytic.p));
  }
  const Eigen::Index p = mc.p;

  ComparisonReport report;
  report.ratio = mc.r_hat.cwiseQuotient(analytic.s);
  report.ks.resize(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const Eigen::Index idx = i * p + j;
      std::vector<double> observed(
          mc.ensemble.col(idx).data(),
          mc.ensemble.col(idx).data() + mc.ensemble.rows());
      const std::vector<double> reference = gauss_sample(
          handle.child(static_cast<std::uint64_t>(idx)), analytic.mean(i, j),
          std::sqrt(analytic.s(i, j)),
          static_cast<std::size_t>(mc.replicates));
      report.ks(i, j) = ks_distance(std::move(observed), reference);
    }
  }

  std::vector<double> ratios(report.ratio.data(),
                             report.ratio.data() + report.ratio.size());
  const std::size_t mid = ratios.size() / 2;
  std::nth_element(ratios.begin(), ratios.begin() + mid, ratios.end());
  double median = ratios[mid];
  if (ratios.size() % 2 == 0) {
    const double below =
        *std::max_element(ratios.begin(), ratios.begin() + mid);
    median = 0.5 * (median + below);
  }
  report.median_ratio = median;

  report.analytic_moments = spectral.moments;
  // Pool the centered replicate spectra on the squared-magnitude scale,
  // which is where the bulk law lives.
  double count = 0.0;
  std::vector<double> sums(4, 0.0);
  for (const Vector& mags : mc.centered_spectra) {
    for (Eigen::Index i = 0; i < mags.size(); ++i) {
      const double value = mags(i) * mags(i);
      double power = 1.0;
      for (std::size_t k = 0; k < sums.size(); ++k) {
        power *= value;
        sums[k] += power;
      }
      count += 1.0;
    }
  }
  report.mc_moments.resize(sums.size());
  for (std::size_t k = 0; k < sums.size(); ++k) {
    report.mc_moments[k] = count > 0.0 ? sums[k] / count : 0.0;
  }
  const std::size_t orders =
      std::min(report.analytic_moments.size(), report.mc_moments.size());
  report.moment_deltas.resize(orders);
  for (std::size_t k = 0; k < orders; ++k) {
    report.moment_deltas[k] =
        report.analytic_moments[k] - report.mc_moments[k];
  }

  report.m = mc.m;
  report.p = mc.p;
  report.replicates = mc.replicates;
  return report;
}

}  // namespace kuq
