#pragma once

#include "bdbc/types.hpp"

#include <span>

namespace bdbc {

/// Cholesky factor of a symmetric matrix, with the diagonal ridge that was
/// needed to make it succeed.
///
/// Factorization is first attempted on the matrix as given. On failure a
/// ridge eps * (trace / n) * I is added, with eps escalating through
/// 1e-10, 1e-8 and 1e-6. A matrix that still fails raises NumericalError.
class RidgeCholesky {
public:
  explicit RidgeCholesky(const Matrix& a);

  double log_det() const { return log_det_; }
  double ridge() const { return ridge_; }
  Index size() const { return llt_.rows(); }

  /// Solves (A + ridge I) x = b.
  Matrix solve(const Matrix& b) const { return llt_.solve(b); }
  Vector solve(const Vector& b) const { return llt_.solve(b); }
  /// (A + ridge I)^-1
  Matrix inverse() const;
  /// Squared Mahalanobis norm v' (A + ridge I)^-1 v.
  double quad_form(const Vector& v) const;
  const Eigen::LLT<Matrix>& llt() const { return llt_; }

private:
  Eigen::LLT<Matrix> llt_;
  double ridge_ = 0.0;
  double log_det_ = 0.0;
};

/// Rows and columns `idx` of a square matrix.
Matrix principal_submatrix(const Matrix& a, std::span<const int> idx);

/// Symmetric part (A + A') / 2.
Matrix symmetrize(const Matrix& a);

} // namespace bdbc
