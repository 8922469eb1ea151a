#include "bdbc/linalg.hpp"

#include "bdbc/error.hpp"

#include <array>
#include <cmath>
#include <string>

namespace bdbc {

namespace {

bool factor_ok(const Eigen::LLT<Matrix>& llt) {
  if (llt.info() != Eigen::Success) {
    return false;
  }
  const auto diag = llt.matrixLLT().diagonal();
  for (Index i = 0; i < diag.size(); ++i) {
    if (!(diag[i] > 0.0) || !std::isfinite(diag[i])) {
      return false;
    }
  }
  return true;
}

} // namespace

RidgeCholesky::RidgeCholesky(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw InputError("cholesky: matrix is not square");
  }
  const Index n = a.rows();
  if (n == 0) {
    return;
  }
  if (!a.allFinite()) {
    throw NumericalError("cholesky: matrix has non-finite entries");
  }

  llt_.compute(a);
  if (!factor_ok(llt_)) {
    const double scale = a.trace() / static_cast<double>(n);
    constexpr std::array<double, 3> kEps{1e-10, 1e-8, 1e-6};
    bool ok = false;
    if (scale > 0.0) {
      for (double eps : kEps) {
        ridge_ = eps * scale;
        Matrix shifted = a;
        shifted.diagonal().array() += ridge_;
        llt_.compute(shifted);
        if (factor_ok(llt_)) {
          ok = true;
          break;
        }
      }
    }
    if (!ok) {
      throw NumericalError("cholesky: matrix of size " + std::to_string(n) +
                           " is not positive definite after ridge 1e-6 * trace/n");
    }
  }
  log_det_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Matrix RidgeCholesky::inverse() const {
  return llt_.solve(Matrix::Identity(size(), size()));
}

double RidgeCholesky::quad_form(const Vector& v) const {
  const Vector w = llt_.matrixL().solve(v);
  return w.squaredNorm();
}

Matrix principal_submatrix(const Matrix& a, std::span<const int> idx) {
  const auto m = static_cast<Index>(idx.size());
  Matrix out(m, m);
  for (Index c = 0; c < m; ++c) {
    for (Index r = 0; r < m; ++r) {
      out(r, c) = a(idx[r], idx[c]);
    }
  }
  return out;
}

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

} // namespace bdbc
