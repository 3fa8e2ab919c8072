#include "kuq/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace kuq {

namespace {

// After substituting x = lower cos^2(t) + upper sin^2(t), the bulk density
// times dx/dt becomes span * cos^2(t) * (span sin^2(t) / x(t)) / (pi s2 r),
// a bounded smooth function on [0, pi/2] even when the lower edge is zero.
struct ThetaLaw {
  double lower;
  double upper;
  double span;
  double norm;  // 1 / (pi sigma2 ratio)

  explicit ThetaLaw(const MPParams& p)
      : lower(p.lower_edge()),
        upper(p.upper_edge()),
        span(p.upper_edge() - p.lower_edge()),
        norm(1.0 / (std::numbers::pi * p.sigma2() * p.ratio())) {}

  double x(double theta) const {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    return lower * c * c + upper * s * s;
  }

  double mass(double theta) const {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double xx = lower * c * c + upper * s * s;
    // At ratio 1 the support touches zero and span sin^2 / x tends to 1.
    const double factor = xx > 0.0 ? span * s * s / xx : 1.0;
    return span * c * c * factor * norm;
  }
};

double simpson_slice(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a,
                     double b, double fa, double fm, double fb, double whole,
                     double tol, int depth, int force) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_slice(a, fa, m, fm, flm);
  const double right = simpson_slice(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  // The Richardson test alone is unsafe here: trigonometric integrands can
  // satisfy the two-panel identity exactly at symmetric split points (for
  // x^3 times the bulk mass the first split has delta = 0 to rounding
  // while the single-panel value is off by several percent). A forced
  // minimum subdivision breaks those coincidences before the test may
  // terminate the recursion.
  if (force <= 0 && (depth <= 0 || std::abs(delta) <= 15.0 * tol)) {
    return left + right + delta / 15.0;
  }
  return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1,
                       force - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1,
                       force - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = simpson_slice(a, fa, b, fb, fm);
  return adaptive_step(f, a, b, fa, fm, fb, whole, tol, 48, 6);
}

}  // namespace

MPParams::MPParams(double ratio, double sigma2)
    : ratio_(ratio), sigma2_(sigma2) {
  if (!(ratio > 0.0) || !(ratio <= 1.0)) {
    throw InvalidParameter("MPParams: aspect ratio must lie in (0, 1], got " +
                           std::to_string(ratio));
  }
  if (!(sigma2 > 0.0)) {
    throw InvalidParameter("MPParams: variance must be positive, got " +
                           std::to_string(sigma2));
  }
  const double root = std::sqrt(ratio);
  lower_ = sigma2 * (1.0 - root) * (1.0 - root);
  upper_ = sigma2 * (1.0 + root) * (1.0 + root);
}

double mp_density(double x, const MPParams& params) {
  if (!(x > params.lower_edge()) || !(x < params.upper_edge())) {
    return 0.0;
  }
  const double num =
      std::sqrt((params.upper_edge() - x) * (x - params.lower_edge()));
  return num / (2.0 * std::numbers::pi * params.sigma2() * params.ratio() * x);
}

double mp_cdf(double x, const MPParams& params) {
  if (x <= params.lower_edge()) return 0.0;
  if (x >= params.upper_edge()) return 1.0;
  const ThetaLaw law(params);
  const double frac = (x - params.lower_edge()) / law.span;
  const double theta = std::asin(std::sqrt(std::clamp(frac, 0.0, 1.0)));
  const double cdf = adaptive_simpson(
      [&law](double t) { return law.mass(t); }, 0.0, theta, 1e-11);
  return std::clamp(cdf, 0.0, 1.0);
}

std::vector<double> mp_sample(RngHandle handle, const MPParams& params,
                              std::size_t count) {
  const ThetaLaw law(params);
  constexpr std::size_t kCells = 4096;
  const double h = (std::numbers::pi / 2.0) / kCells;

  // Cumulative mass over a uniform grid in the substituted variable; each
  // cell integrated with one Simpson slice, accurate far beyond what the
  // inverse-transform interpolation needs.
  std::vector<double> cum(kCells + 1, 0.0);
  double f_left = law.mass(0.0);
  for (std::size_t c = 0; c < kCells; ++c) {
    const double a = static_cast<double>(c) * h;
    const double b = a + h;
    const double f_mid = law.mass(a + 0.5 * h);
    const double f_right = law.mass(b);
    cum[c + 1] = cum[c] + h / 6.0 * (f_left + 4.0 * f_mid + f_right);
    f_left = f_right;
  }
  const double total = cum[kCells];

  Rng rng(handle);
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double target = rng.next_uniform() * total;
    const auto it = std::upper_bound(cum.begin(), cum.end(), target);
    std::size_t cell =
        it == cum.begin()
            ? 0
            : static_cast<std::size_t>(std::distance(cum.begin(), it)) - 1;
    cell = std::min(cell, kCells - 1);
    const double cell_mass = cum[cell + 1] - cum[cell];
    const double frac =
        cell_mass > 0.0 ? (target - cum[cell]) / cell_mass : 0.5;
    const double theta = (static_cast<double>(cell) + frac) * h;
    out[k] = std::clamp(law.x(theta), params.lower_edge(), params.upper_edge());
  }
  return out;
}

std::vector<double> eigenvalue_moments(const MPParams& params, int order) {
  if (order < 1 || order > 4) {
    throw InvalidParameter("eigenvalue_moments: order must lie in [1, 4], got " +
                           std::to_string(order));
  }
  const ThetaLaw law(params);
  std::vector<double> moments(static_cast<std::size_t>(order));
  for (int k = 1; k <= order; ++k) {
    moments[static_cast<std::size_t>(k - 1)] = adaptive_simpson(
        [&law, k](double t) {
          return std::pow(law.x(t), k) * law.mass(t);
        },
        0.0, std::numbers::pi / 2.0, 1e-11);
  }
  return moments;
}

Vector koopman_sym_spectrum(const Matrix& k) {
  if (k.rows() != k.cols()) {
    throw ShapeError("koopman_sym_spectrum: matrix is not square (" +
                     std::to_string(k.rows()) + "x" + std::to_string(k.cols()) +
                     ")");
  }
  if (k.rows() == 0) {
    throw InvalidMatrix("koopman_sym_spectrum: matrix is empty");
  }
  if (!k.allFinite()) {
    throw InvalidMatrix("koopman_sym_spectrum: matrix has non-finite entries");
  }
  const double p = static_cast<double>(k.rows());
  Matrix sym = (k * k.transpose()) / p;
  // Symmetrize explicitly to wash out the last-bit asymmetry of the product.
  sym = 0.5 * (sym + sym.transpose());
  const SymEig eig = eig_sym(sym);

  Vector magnitudes(eig.eigenvalues.size());
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
    magnitudes(i) = std::sqrt(std::max(eig.eigenvalues(i), 0.0));
  }
  return magnitudes;
}

std::vector<Matrix> haar_sample(RngHandle handle, std::int64_t dim,
                                std::size_t count) {
  if (dim < 1) {
    throw InvalidParameter("haar_sample: dimension must be >= 1, got " +
                           std::to_string(dim));
  }
  std::vector<Matrix> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng(handle.child(k));
    Matrix g(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
      for (Eigen::Index c = 0; c < dim; ++c) {
        g(r, c) = rng.next_gauss();
      }
    }
    out.push_back(qr_sign_normalized(g).q);
  }
  return out;
}

DecorrelationStat tuple_decorrelation_check(
    const std::vector<KoopmanSample>& ensemble) {
  if (ensemble.size() < 100) {
    throw InvalidParameter(
        "tuple_decorrelation_check: need at least 100 ensemble members, got " +
        std::to_string(ensemble.size()));
  }
  const Eigen::Index p = ensemble.front().k.rows();
  for (const KoopmanSample& s : ensemble) {
    if (s.k.rows() != p || s.k.cols() != p || s.eigvecs.rows() != p ||
        s.eigvecs.cols() != p || s.eigvals.size() != p) {
      throw ShapeError(
          "tuple_decorrelation_check: inconsistent member shapes");
    }
  }

  const double n = static_cast<double>(ensemble.size());
  Matrix k_mean = Matrix::Zero(p, p);
  Matrix v_mean = Matrix::Zero(p, p);
  for (const KoopmanSample& s : ensemble) {
    k_mean += s.k;
    v_mean += s.eigvecs;
  }
  k_mean /= n;
  v_mean /= n;

  Matrix k_var = Matrix::Zero(p, p);
  Matrix v_var = Matrix::Zero(p, p);
  for (const KoopmanSample& s : ensemble) {
    k_var += (s.k - k_mean).cwiseAbs2();
    v_var += (s.eigvecs - v_mean).cwiseAbs2();
  }
  k_var /= n;
  v_var /= n;

  DecorrelationStat stat;
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index l = 0; l < p; ++l) {
        if (k_var(i, j) <= 0.0 || v_var(l, j) <= 0.0) {
          stat.degenerate = true;
          continue;
        }
        double cov = 0.0;
        for (const KoopmanSample& s : ensemble) {
          cov += (s.k(i, j) - k_mean(i, j)) * (s.eigvecs(l, j) - v_mean(l, j));
        }
        cov /= n;
        const double corr = cov / std::sqrt(k_var(i, j) * v_var(l, j));
        stat.max_abs_correlation =
            std::max(stat.max_abs_correlation, std::abs(corr));
      }
    }
  }
  return stat;
}

SpectralUQ make_spectral_uq(const VarianceMatrix& vm) {
  if (vm.p < 1 || vm.m < 1) {
    throw InvalidParameter("make_spectral_uq: variance matrix lacks m and p");
  }
  const double ratio =
      std::min(1.0, static_cast<double>(vm.p) / static_cast<double>(vm.m));
  const double sigma2 = vm.s.mean();
  const MPParams mp(ratio, sigma2);
  return SpectralUQ{mp, eigenvalue_moments(mp, 4), vm.p};
}

}  // namespace kuq
