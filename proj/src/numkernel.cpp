#include "kuq/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace kuq {

bool is_finite(const Matrix& m) noexcept { return m.allFinite(); }

Matrix pinv(const Matrix& m, double tol) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw InvalidMatrix("pinv: matrix is empty");
  }
  if (!m.allFinite()) {
    throw InvalidMatrix("pinv: matrix has non-finite entries");
  }
  if (!(tol > 0.0) || !(tol < 1.0)) {
    throw InvalidParameter("pinv: tol must lie in (0, 1), got " +
                           std::to_string(tol));
  }

  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = tol * (sv.size() > 0 ? sv(0) : 0.0);

  Vector inv_sv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) {
      inv_sv(i) = 1.0 / sv(i);
    }
  }
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

QrFactors qr_sign_normalized(const Matrix& g) {
  if (g.rows() == 0 || g.cols() == 0) {
    throw InvalidMatrix("qr_sign_normalized: matrix is empty");
  }
  if (g.rows() < g.cols()) {
    throw ShapeError("qr_sign_normalized: need rows >= cols, got " +
                     std::to_string(g.rows()) + "x" + std::to_string(g.cols()));
  }
  if (!g.allFinite()) {
    throw InvalidMatrix("qr_sign_normalized: matrix has non-finite entries");
  }

  const Eigen::Index n = g.cols();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(g.rows(), n);
  Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();

  const double diag_max = r.diagonal().cwiseAbs().maxCoeff();
  const double gate = static_cast<double>(std::max(g.rows(), g.cols())) *
                      std::numeric_limits<double>::epsilon() * diag_max;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(r(i, i)) <= gate) {
      throw RankDeficient("qr_sign_normalized: column " + std::to_string(i) +
                          " is linearly dependent on earlier columns");
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    if (r(i, i) < 0.0) {
      r.row(i) = -r.row(i);
      q.col(i) = -q.col(i);
    }
  }
  return QrFactors{std::move(q), std::move(r)};
}

SymEig eig_sym(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw NotSymmetric("eig_sym: matrix is not square (" +
                       std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + ")");
  }
  if (m.rows() == 0) {
    throw InvalidMatrix("eig_sym: matrix is empty");
  }
  if (!m.allFinite()) {
    throw InvalidMatrix("eig_sym: matrix has non-finite entries");
  }

  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale) {
    throw NotSymmetric("eig_sym: asymmetry " + std::to_string(asym) +
                       " exceeds tolerance");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("eig_sym: eigendecomposition did not converge");
  }

  // Eigen sorts ascending; flip to descending.
  SymEig out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

}  // namespace kuq
