#include "bdbc/eval.hpp"

#include "bdbc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace bdbc {

namespace {

std::vector<int> dense_ids(std::span<const int> labels, int& count) {
  std::unordered_map<int, int> remap;
  std::vector<int> ids;
  ids.reserve(labels.size());
  for (int l : labels) {
    ids.push_back(remap.try_emplace(l, static_cast<int>(remap.size())).first->second);
  }
  count = static_cast<int>(remap.size());
  return ids;
}

void require_same_length(std::span<const int> a, std::span<const int> b, const char* what) {
  if (a.size() != b.size()) {
    throw InputError(std::string(what) + ": label vectors have different lengths (" +
                     std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

double choose2(double x) { return 0.5 * x * (x - 1.0); }

} // namespace

ContingencyTable::ContingencyTable(std::span<const int> a, std::span<const int> b) {
  require_same_length(a, b, "contingency table");
  int r = 0;
  int c = 0;
  const auto ia = dense_ids(a, r);
  const auto ib = dense_ids(b, c);
  counts = Eigen::MatrixXi::Zero(r, c);
  for (std::size_t i = 0; i < ia.size(); ++i) {
    ++counts(ia[i], ib[i]);
  }
  row_sums.assign(static_cast<std::size_t>(r), 0);
  col_sums.assign(static_cast<std::size_t>(c), 0);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) {
      row_sums[static_cast<std::size_t>(i)] += counts(i, j);
      col_sums[static_cast<std::size_t>(j)] += counts(i, j);
    }
  }
  n = static_cast<long>(a.size());
}

double ari(std::span<const int> labels_a, std::span<const int> labels_b) {
  const ContingencyTable t(labels_a, labels_b);
  double index = 0.0;
  for (Index i = 0; i < t.counts.rows(); ++i) {
    for (Index j = 0; j < t.counts.cols(); ++j) {
      index += choose2(t.counts(i, j));
    }
  }
  double sum_a = 0.0;
  for (long s : t.row_sums) {
    sum_a += choose2(static_cast<double>(s));
  }
  double sum_b = 0.0;
  for (long s : t.col_sums) {
    sum_b += choose2(static_cast<double>(s));
  }
  const double total = choose2(static_cast<double>(t.n));
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) {
    return 1.0;
  }
  return (index - expected) / denom;
}

std::vector<int> max_weight_assignment(const Matrix& score) {
  // Hungarian algorithm (shortest augmenting paths) on a square cost matrix
  // padded with zero-score dummies; cost = max - score.
  const Index rows = score.rows();
  const Index cols = score.cols();
  const Index n = std::max(rows, cols);
  std::vector<int> result(static_cast<std::size_t>(rows), -1);
  if (n == 0) {
    return result;
  }
  const double top = score.size() > 0 ? score.maxCoeff() : 0.0;
  auto cost = [&](Index i, Index j) {
    const double s = (i < rows && j < cols) ? score(i, j) : 0.0;
    return top - s;
  };
  const double inf = std::numeric_limits<double>::infinity();
  const auto un = static_cast<std::size_t>(n);
  std::vector<double> u(un + 1, 0.0);
  std::vector<double> v(un + 1, 0.0);
  std::vector<std::size_t> match(un + 1, 0); // column -> row (1-based)
  std::vector<std::size_t> way(un + 1, 0);
  for (std::size_t i = 1; i <= un; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(un + 1, inf);
    std::vector<char> used(un + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= un; ++j) {
        if (used[j]) {
          continue;
        }
        const double cur = cost(static_cast<Index>(i0 - 1), static_cast<Index>(j - 1)) -
                           u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= un; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= un; ++j) {
    const auto i = static_cast<Index>(match[j] - 1);
    const auto c = static_cast<Index>(j - 1);
    if (i < rows && c < cols) {
      result[static_cast<std::size_t>(i)] = static_cast<int>(c);
    }
  }
  return result;
}

double matched_accuracy(std::span<const int> truth, std::span<const int> predicted) {
  require_same_length(truth, predicted, "matched_accuracy");
  if (truth.empty()) {
    return 1.0;
  }
  // rows: predicted labels, columns: truth labels
  const ContingencyTable t(predicted, truth);
  const auto r = static_cast<int>(t.counts.rows());
  const auto c = static_cast<int>(t.counts.cols());
  long best = 0;
  if (std::max(r, c) <= 8) {
    // enumerate injective maps predicted -> truth as permutations of the
    // padded column set; padded slots mean "unmatched"
    const int n = std::max(r, c);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      long agree = 0;
      for (int i = 0; i < r; ++i) {
        const int j = perm[static_cast<std::size_t>(i)];
        if (j < c) {
          agree += t.counts(i, j);
        }
      }
      best = std::max(best, agree);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    const auto match = max_weight_assignment(t.counts.cast<double>());
    for (int i = 0; i < r; ++i) {
      const int j = match[static_cast<std::size_t>(i)];
      if (j >= 0) {
        best += t.counts(i, j);
      }
    }
  }
  return static_cast<double>(best) / static_cast<double>(t.n);
}

double mape(const Matrix& truth, const Matrix& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    throw InputError("mape: matrices have different shapes");
  }
  const double denom = truth.sum();
  if (denom == 0.0) {
    throw InputError("mape: entries of the true matrix sum to zero");
  }
  return 100.0 * (truth - estimate).cwiseAbs().sum() / denom;
}

bool partition_match(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    return false;
  }
  // identical partitions <=> a bijection exists between the label sets
  std::unordered_map<int, int> ab;
  std::unordered_map<int, int> ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto x = ab.try_emplace(a[i], b[i]).first;
    const auto y = ba.try_emplace(b[i], a[i]).first;
    if (x->second != b[i] || y->second != a[i]) {
      return false;
    }
  }
  return true;
}

bool partition_match(const ColumnGrouping& a, const ColumnGrouping& b) {
  return partition_match(a.assignment(), b.assignment());
}

double silhouette_mean(const Matrix& dist, std::span<const int> labels) {
  const auto n = static_cast<Index>(labels.size());
  if (dist.rows() != n || dist.cols() != n) {
    throw InputError("silhouette_mean: distance matrix does not match label count");
  }
  int k = 0;
  const auto ids = dense_ids(labels, k);
  if (k < 2) {
    throw InputError("silhouette_mean: need at least two clusters");
  }
  std::vector<int> size(static_cast<std::size_t>(k), 0);
  for (int id : ids) {
    ++size[static_cast<std::size_t>(id)];
  }
  double total = 0.0;
  std::vector<double> sums(static_cast<std::size_t>(k));
  for (Index i = 0; i < n; ++i) {
    const int own = ids[static_cast<std::size_t>(i)];
    if (size[static_cast<std::size_t>(own)] <= 1) {
      continue;
    }
    std::fill(sums.begin(), sums.end(), 0.0);
    for (Index j = 0; j < n; ++j) {
      if (j != i) {
        sums[static_cast<std::size_t>(ids[static_cast<std::size_t>(j)])] += dist(i, j);
      }
    }
    const double a = sums[static_cast<std::size_t>(own)] /
                     static_cast<double>(size[static_cast<std::size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c != own) {
        b = std::min(b, sums[static_cast<std::size_t>(c)] /
                            static_cast<double>(size[static_cast<std::size_t>(c)]));
      }
    }
    const double m = std::max(a, b);
    if (m > 0.0) {
      total += (b - a) / m;
    }
  }
  return total / static_cast<double>(n);
}

} // namespace bdbc
