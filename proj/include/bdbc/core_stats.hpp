#pragma once

#include "bdbc/types.hpp"

#include <string>
#include <vector>

namespace bdbc {

/// N x p observations with optional row labels and column names.
struct DataMatrix {
  Matrix values;
  std::vector<std::string> row_labels; // empty, or one per row
  std::vector<std::string> col_names;  // empty, or one per column

  DataMatrix() = default;
  explicit DataMatrix(Matrix v) : values(std::move(v)) {}

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }

  /// Throws InputError unless N >= 1, p >= 1, every entry is finite and the
  /// label vectors (when present) have matching lengths.
  void validate() const;
};

/// Weighted MLE summary of a (sub)sample.
struct SampleStats {
  Vector mean;
  Matrix cov;  // divisor = total weight, not N - 1
  Matrix corr; // zero-variance variables: unit diagonal, zero off-diagonal
  double n = 0.0;
};

SampleStats compute_stats(const Matrix& x);
SampleStats compute_stats(const Matrix& x, const Vector& weights);
SampleStats compute_stats(const DataMatrix& data);
SampleStats compute_stats(const DataMatrix& data, const Vector& weights);

/// diag(cov)^-1/2 cov diag(cov)^-1/2 with the zero-variance convention.
Matrix correlation_from_cov(const Matrix& cov);

/// log N_p(x; mean, cov) through a (ridged) Cholesky factor.
double gaussian_logpdf(const Vector& x, const Vector& mean, const Matrix& cov);

/// Column-wise centering and scaling to unit population variance. Constant
/// columns are centered only.
DataMatrix standardize(const DataMatrix& data);

} // namespace bdbc
