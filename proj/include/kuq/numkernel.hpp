#pragma once

#include <Eigen/Dense>

#include "kuq/errors.hpp"

namespace kuq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Relative singular-value cutoff used by pinv when none is given.
inline constexpr double kDefaultPinvTol = 1e-12;

bool is_finite(const Matrix& m) noexcept;

// Moore-Penrose pseudo-inverse via SVD. Singular values at or below
// tol * sigma_max are treated as exact zeros, so rank-deficient input is
// handled without blowup. tol must lie in (0, 1).
Matrix pinv(const Matrix& m, double tol = kDefaultPinvTol);

struct QrFactors {
  Matrix q;  // rows(g) x cols(g), orthonormal columns
  Matrix r;  // cols(g) x cols(g), upper triangular, positive diagonal
};

// Thin QR factorization with the diagonal of R forced positive. The sign
// normalization makes the factorization unique, which in turn makes the Q
// of an iid Gaussian matrix exactly Haar-distributed. Requires
// rows >= cols and full column rank.
QrFactors qr_sign_normalized(const Matrix& g);

struct SymEig {
  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // column i pairs with eigenvalues(i)
};

// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
// Rejects matrices that are asymmetric beyond a small tolerance.
SymEig eig_sym(const Matrix& m);

}  // namespace kuq
