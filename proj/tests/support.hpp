#pragma once

#include "bdbc/blockstruct.hpp"
#include "bdbc/rng.hpp"
#include "bdbc/types.hpp"

#include <algorithm>
#include <vector>

namespace bdbc::test {

inline Matrix normal_matrix(Rng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      m(i, j) = rng.normal();
    }
  }
  return m;
}

inline Matrix random_symmetric(Rng& rng, Index p) {
  const Matrix a = normal_matrix(rng, p, p);
  return 0.5 * (a + a.transpose());
}

/// Wishart-like draw, well conditioned.
inline Matrix random_spd(Rng& rng, Index p) {
  const Matrix a = normal_matrix(rng, p, p + 3);
  return a * a.transpose() / static_cast<double>(p + 3) + 0.1 * Matrix::Identity(p, p);
}

/// Uniform random assignment with every one of the k groups non-empty.
inline ColumnGrouping random_grouping(Rng& rng, int p, int k) {
  std::vector<int> a(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    a[static_cast<std::size_t>(j)] = j < k ? j : static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  }
  for (int j = p - 1; j > 0; --j) {
    std::swap(a[static_cast<std::size_t>(j)],
              a[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(j + 1)))]);
  }
  return ColumnGrouping(a, k);
}

inline std::vector<int> random_permutation(Rng& rng, int n) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    perm[static_cast<std::size_t>(i)] = i;
  }
  for (int i = n - 1; i > 0; --i) {
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i + 1)))]);
  }
  return perm;
}

/// out(i, j) = m(perm[i], perm[j]).
inline Matrix permute_sym(const Matrix& m, const std::vector<int>& perm) {
  const auto p = static_cast<Index>(perm.size());
  Matrix out(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      out(i, j) = m(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

} // namespace bdbc::test
