#pragma once

#include "bdbc/blockstruct.hpp"
#include "bdbc/types.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bdbc {

enum class Method { greedy, convex, hierarchical };

std::string_view method_name(Method m);
/// Accepts greedy, convex, hier and hierarchical.
Method parse_method(std::string_view name);

/// Result of one column-grouping estimate. `objective` is
/// block_loglik(S, grouping).
struct EstimatorReport {
  ColumnGrouping grouping;
  double objective = 0.0;
  int iterations = 0;
  double wall_time = 0.0; // seconds
  Method method = Method::hierarchical;
  bool converged = true;
  bool empty_groups = false;
  std::vector<double> trace; // objective after each update (greedy) or cycle (convex)
};

enum class PcaLoading { magnitude, signed_value };

/// Assigns variable j to the leading principal component of `corr` on which
/// its loading is largest. Ties go to the lower component index.
ColumnGrouping pca_init(const Matrix& corr, int k, PcaLoading loading = PcaLoading::magnitude);

/// Coordinate-wise maximization of block_loglik: each sweep moves every
/// variable to the group that maximizes the objective given the others.
EstimatorReport greedy_estimate(const Matrix& S, int k, int max_sweeps = 100);

struct ConvexOptions {
  double gamma = 1.0;  // binarization reward
  double lambda = 1.0; // log|D'D| barrier
  double omega = 0.1;  // step size
  int max_iter = 1000; // full column cycles
  double tol = 1e-6;   // on |change of objective| per cycle
};

/// Soft grouping matrix of the relaxed problem and its optimization history.
struct RelaxedGrouping {
  Matrix d; // p x K, rows on the simplex, entries >= kFloor
  double gamma = 0.0;
  double lambda = 0.0;
  double omega = 0.0;
  std::vector<double> objective_trace;
  bool converged = false;

  static constexpr double kFloor = 1e-6;
};

/// Penalized precision-form objective of the relaxed problem
///
///   F(D) = 1/2 log|Theta| - 1/2 sum_k d_k'(P o S) d_k
///          + gamma (sum_k d_k'd_k - p) + lambda log|D'D|
///
/// with P = S^-1 and Theta = sum_k D_k P D_k = P o (D D').
class RelaxedObjective {
public:
  RelaxedObjective(const Matrix& S, double gamma, double lambda);

  double value(const Matrix& d) const;
  /// dF/dd_k = (T o P) d_k - (P o S) d_k + 2 gamma d_k + 2 lambda [D (D'D)^-1]_k,
  /// T = Theta^-1.
  Vector gradient(const Matrix& d, int k) const;
  Matrix gradient(const Matrix& d) const;

  const Matrix& precision() const { return precision_; }

private:
  Matrix precision_;
  Matrix hadamard_; // P o S
  double gamma_;
  double lambda_;
};

/// Cyclic column-wise gradient ascent on RelaxedObjective. After each column
/// step, rows of D are clamped to [kFloor, inf) and renormalized.
RelaxedGrouping convex_relax_fit(const Matrix& S, int k, const ConvexOptions& opts = {});
EstimatorReport convex_relax_estimate(const Matrix& S, int k, const ConvexOptions& opts = {});

/// Euclidean distances between rows of |corr(S)|.
Matrix correlation_feature_distances(const Matrix& S);

/// Average-linkage (UPGMA) agglomeration of p items.
class Dendrogram {
public:
  struct Merge {
    int a; // surviving cluster id (the smaller)
    int b;
    double height;
  };

  /// Ties on the minimum distance go to the lexicographically smallest pair.
  explicit Dendrogram(const Matrix& dist);

  int size() const { return n_; }
  const std::vector<Merge>& merges() const { return merges_; }
  /// Partition into k clusters, groups numbered by their smallest member.
  ColumnGrouping cut(int k) const;

private:
  int n_ = 0;
  std::vector<Merge> merges_;
};

EstimatorReport hierarchical_estimate(const Matrix& S, int k);

struct SilhouetteSelection {
  int k = 0;
  std::vector<std::pair<int, double>> scores;
};

/// Mean silhouette of the dendrogram cut for each k in [k_min, k_max]; the
/// maximum wins, ties to the smaller k.
SilhouetteSelection select_k_silhouette(const Matrix& S, int k_min, int k_max);

/// [2, min(p - 1, ceil(2 sqrt p) + 2)]
std::pair<int, int> default_k_range(int p);

struct EstimatorOptions {
  int greedy_sweeps = 100;
  ConvexOptions convex;
};

EstimatorReport estimate_grouping(Method method, const Matrix& S, int k,
                                  const EstimatorOptions& opts = {});

} // namespace bdbc
