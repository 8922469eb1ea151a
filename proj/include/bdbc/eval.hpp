#pragma once

#include "bdbc/blockstruct.hpp"
#include "bdbc/types.hpp"

#include <span>
#include <vector>

namespace bdbc {

/// Cross-tabulation of two labelings. Labels of each side are mapped to
/// 0..R-1 / 0..C-1 in order of first appearance.
struct ContingencyTable {
  Eigen::MatrixXi counts;
  std::vector<long> row_sums;
  std::vector<long> col_sums;
  long n = 0;

  ContingencyTable(std::span<const int> a, std::span<const int> b);
};

/// Hubert-Arabie adjusted Rand index. Defined as 1 when the index is 0/0,
/// which only happens for identical trivial partitions.
double ari(std::span<const int> labels_a, std::span<const int> labels_b);

/// Largest fraction of rows on which `predicted` agrees with `truth` under an
/// injective relabelling of predicted labels.
double matched_accuracy(std::span<const int> truth, std::span<const int> predicted);

/// 100 * sum|t - e| / sum t, with the signed denominator.
double mape(const Matrix& truth, const Matrix& estimate);

/// True iff both groupings induce the same set partition.
bool partition_match(const ColumnGrouping& a, const ColumnGrouping& b);
bool partition_match(std::span<const int> a, std::span<const int> b);

/// Mean silhouette coefficient of `labels` under the distance matrix `dist`.
/// Singletons score 0, as do points with a = b = 0.
double silhouette_mean(const Matrix& dist, std::span<const int> labels);

/// Maximum-weight assignment on a non-negative score matrix (rows -> columns,
/// injective). Returns, for each row, the matched column or -1.
std::vector<int> max_weight_assignment(const Matrix& score);

} // namespace bdbc
