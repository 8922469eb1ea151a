#pragma once

#include "bdbc/linalg.hpp"
#include "bdbc/types.hpp"

#include <span>
#include <vector>

namespace bdbc {

/// Partition of p variables into K groups, stored as a group id per variable.
///
/// Equivalent to the binary p x K indicator D whose k-th column marks the
/// members of group k. Empty groups are allowed; `has_empty_group()` flags
/// them.
class ColumnGrouping {
public:
  ColumnGrouping() = default;
  /// Throws InputError if k < 1 or any id lies outside [0, k).
  ColumnGrouping(std::vector<int> assignment, int k);

  /// All p variables in group 0.
  static ColumnGrouping single(int p);
  /// Every variable in its own group (K = p).
  static ColumnGrouping finest(int p);
  /// Group ids relabelled in order of first appearance, K = number of
  /// non-empty groups.
  static ColumnGrouping canonical(std::span<const int> labels);

  int k() const { return k_; }
  int p() const { return static_cast<int>(assignment_.size()); }
  const std::vector<int>& assignment() const { return assignment_; }
  int operator[](int j) const { return assignment_[static_cast<std::size_t>(j)]; }

  /// Moves variable j to `group`.
  void assign(int j, int group);

  /// Member variable indices of each group, ascending.
  std::vector<std::vector<int>> members() const;
  std::vector<int> sizes() const;
  bool has_empty_group() const;

  /// The p x K binary indicator matrix D.
  Matrix indicator() const;

  friend bool operator==(const ColumnGrouping&, const ColumnGrouping&) = default;

private:
  std::vector<int> assignment_;
  int k_ = 0;
};

/// Block-diagonal covariance: one dense block per group of `grouping`.
struct BlockCovariance {
  ColumnGrouping grouping;
  std::vector<Matrix> blocks; // blocks[k] is |group k| x |group k|

  int p() const { return grouping.p(); }
  /// The p x p matrix sum_k D_k Sigma D_k.
  Matrix expanded() const;
  /// Sum of block log-determinants (ridged where needed).
  double log_det() const;
};

/// Zeroes every cross-group entry of `cov`.
BlockCovariance project_block_diagonal(const Matrix& cov, const ColumnGrouping& grouping);

/// Contribution of one group to block_loglik:
/// -1/2 log|S_gg| - 1/2 tr(S_gg^-1 S_gg), evaluated on the ridged factor.
double block_term(const Matrix& sample_cov, std::span<const int> members);

/// -1/2 log|B| - 1/2 tr(B^-1 S) with B = sum_k D_k S D_k.
double block_loglik(const Matrix& sample_cov, const ColumnGrouping& grouping);

/// Gaussian density with a block-diagonal covariance, factorized once.
class BlockGaussian {
public:
  BlockGaussian(Vector mean, const BlockCovariance& cov);

  double logpdf(const Vector& x) const;
  double log_det() const { return log_det_; }

private:
  Vector mean_;
  std::vector<std::vector<int>> members_;
  std::vector<RidgeCholesky> factors_;
  double log_det_ = 0.0;
};

} // namespace bdbc
