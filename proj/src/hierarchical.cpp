#include "bdbc/core_stats.hpp"
#include "bdbc/error.hpp"
#include "bdbc/estimators.hpp"
#include "bdbc/eval.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace bdbc {

Matrix correlation_feature_distances(const Matrix& S) {
  if (S.rows() != S.cols()) {
    throw InputError("correlation_feature_distances: matrix is not square");
  }
  // |corr| is symmetric, so column i is the feature vector of variable i
  const Matrix r = correlation_from_cov(S).cwiseAbs();
  const Index p = r.rows();
  Matrix dist = Matrix::Zero(p, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = j + 1; i < p; ++i) {
      const double d = (r.col(i) - r.col(j)).norm();
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }
  return dist;
}

Dendrogram::Dendrogram(const Matrix& dist) : n_(static_cast<int>(dist.rows())) {
  if (dist.rows() != dist.cols()) {
    throw InputError("dendrogram: distance matrix is not square");
  }
  Matrix d = dist;
  std::vector<int> size(static_cast<std::size_t>(n_), 1);
  std::vector<char> active(static_cast<std::size_t>(n_), 1);
  merges_.reserve(static_cast<std::size_t>(std::max(n_ - 1, 0)));

  for (int step = 0; step + 1 < n_; ++step) {
    double best = std::numeric_limits<double>::infinity();
    int bi = -1;
    int bj = -1;
    for (int i = 0; i < n_; ++i) {
      if (!active[static_cast<std::size_t>(i)]) {
        continue;
      }
      for (int j = i + 1; j < n_; ++j) {
        if (active[static_cast<std::size_t>(j)] && d(i, j) < best) {
          best = d(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    if (bi < 0) {
      throw NumericalError("dendrogram: distance matrix has non-finite entries");
    }
    // average linkage: size-weighted mean of the two parents' distances
    const double ni = size[static_cast<std::size_t>(bi)];
    const double nj = size[static_cast<std::size_t>(bj)];
    for (int m = 0; m < n_; ++m) {
      if (m == bi || m == bj || !active[static_cast<std::size_t>(m)]) {
        continue;
      }
      const double v = (ni * d(bi, m) + nj * d(bj, m)) / (ni + nj);
      d(bi, m) = v;
      d(m, bi) = v;
    }
    size[static_cast<std::size_t>(bi)] += size[static_cast<std::size_t>(bj)];
    active[static_cast<std::size_t>(bj)] = 0;
    merges_.push_back({bi, bj, best});
  }
}

ColumnGrouping Dendrogram::cut(int k) const {
  if (k < 1 || k > n_) {
    throw InputError("dendrogram cut: k = " + std::to_string(k) + " outside [1, " +
                     std::to_string(n_) + "]");
  }
  std::vector<int> parent(static_cast<std::size_t>(n_));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (int m = 0; m < n_ - k; ++m) {
    const auto& mg = merges_[static_cast<std::size_t>(m)];
    parent[static_cast<std::size_t>(find(mg.b))] = find(mg.a);
  }
  std::vector<int> roots(static_cast<std::size_t>(n_));
  for (int j = 0; j < n_; ++j) {
    roots[static_cast<std::size_t>(j)] = find(j);
  }
  ColumnGrouping g = ColumnGrouping::canonical(roots);
  return ColumnGrouping(g.assignment(), k);
}

EstimatorReport hierarchical_estimate(const Matrix& S, int k) {
  const auto t0 = std::chrono::steady_clock::now();
  if (S.rows() != S.cols() || S.rows() < 1 || !S.allFinite()) {
    throw InputError("hierarchical_estimate: covariance must be a finite square matrix");
  }
  const auto p = static_cast<int>(S.rows());
  if (k < 1 || k > p) {
    throw InputError("hierarchical_estimate: k = " + std::to_string(k) + " outside [1, " +
                     std::to_string(p) + "]");
  }
  const Dendrogram tree(correlation_feature_distances(S));
  EstimatorReport rep;
  rep.method = Method::hierarchical;
  rep.grouping = tree.cut(k);
  rep.objective = block_loglik(S, rep.grouping);
  rep.iterations = p - k;
  rep.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

SilhouetteSelection select_k_silhouette(const Matrix& S, int k_min, int k_max) {
  const auto p = static_cast<int>(S.rows());
  if (S.rows() != S.cols() || k_min < 2 || k_min > k_max || k_max > p - 1) {
    throw InputError("select_k_silhouette: need 2 <= k_min <= k_max <= p - 1, got [" +
                     std::to_string(k_min) + ", " + std::to_string(k_max) +
                     "] with p = " + std::to_string(p));
  }
  const Matrix dist = correlation_feature_distances(S);
  const Dendrogram tree(dist);
  SilhouetteSelection out;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = k_min; k <= k_max; ++k) {
    const double score = silhouette_mean(dist, tree.cut(k).assignment());
    out.scores.emplace_back(k, score);
    if (score > best) {
      best = score;
      out.k = k;
    }
  }
  return out;
}

std::pair<int, int> default_k_range(int p) {
  const int hi = std::min(p - 1, static_cast<int>(std::ceil(2.0 * std::sqrt(p))) + 2);
  return {2, hi};
}

} // namespace bdbc
