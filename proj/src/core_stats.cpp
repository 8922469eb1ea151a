#include "bdbc/core_stats.hpp"

#include "bdbc/error.hpp"
#include "bdbc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bdbc {

void DataMatrix::validate() const {
  if (values.rows() < 1 || values.cols() < 1) {
    throw InputError("data matrix is empty");
  }
  if (!values.allFinite()) {
    throw InputError("data matrix contains non-finite values");
  }
  if (!row_labels.empty() && static_cast<Index>(row_labels.size()) != values.rows()) {
    throw InputError("row label count does not match row count");
  }
  if (!col_names.empty() && static_cast<Index>(col_names.size()) != values.cols()) {
    throw InputError("column name count does not match column count");
  }
}

Matrix correlation_from_cov(const Matrix& cov) {
  const Index p = cov.rows();
  Vector inv_sd(p);
  for (Index j = 0; j < p; ++j) {
    const double v = cov(j, j);
    inv_sd[j] = v > 0.0 ? 1.0 / std::sqrt(v) : 0.0;
  }
  Matrix corr = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
  corr.diagonal().setOnes();
  return corr;
}

SampleStats compute_stats(const Matrix& x, const Vector& weights) {
  if (x.rows() < 1 || x.cols() < 1) {
    throw InputError("compute_stats: empty data");
  }
  if (weights.size() != x.rows()) {
    throw InputError("compute_stats: weight vector length does not match row count");
  }
  if (!x.allFinite() || !weights.allFinite()) {
    throw InputError("compute_stats: non-finite input");
  }
  if ((weights.array() < 0.0).any()) {
    throw InputError("compute_stats: negative weight");
  }
  const double total = weights.sum();
  if (!(total > 0.0)) {
    throw InputError("compute_stats: weights sum to zero");
  }

  SampleStats st;
  st.n = total;
  st.mean = (x.transpose() * weights) / total;
  const Matrix centered = x.rowwise() - st.mean.transpose();
  st.cov = symmetrize(centered.transpose() * weights.asDiagonal() * centered / total);
  st.corr = correlation_from_cov(st.cov);
  return st;
}

SampleStats compute_stats(const Matrix& x) {
  return compute_stats(x, Vector::Ones(x.rows()));
}

SampleStats compute_stats(const DataMatrix& data) { return compute_stats(data.values); }

SampleStats compute_stats(const DataMatrix& data, const Vector& weights) {
  return compute_stats(data.values, weights);
}

double gaussian_logpdf(const Vector& x, const Vector& mean, const Matrix& cov) {
  const Index p = x.size();
  if (mean.size() != p || cov.rows() != p || cov.cols() != p) {
    throw InputError("gaussian_logpdf: dimension mismatch");
  }
  const RidgeCholesky chol(cov);
  const double maha = chol.quad_form(x - mean);
  return -0.5 * static_cast<double>(p) * std::log(2.0 * std::numbers::pi) -
         0.5 * chol.log_det() - 0.5 * maha;
}

DataMatrix standardize(const DataMatrix& data) {
  DataMatrix out = data;
  const Index n = data.rows();
  if (n == 0) {
    return out;
  }
  for (Index j = 0; j < data.cols(); ++j) {
    auto col = out.values.col(j);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n));
    // rounding residue of a constant column is not variance
    if (sd > 1e-13 * std::max(1.0, std::abs(mean))) {
      col /= sd;
    }
  }
  return out;
}

} // namespace bdbc
