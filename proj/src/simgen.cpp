#include "bdbc/simgen.hpp"

#include "bdbc/error.hpp"
#include "bdbc/linalg.hpp"
#include "bdbc/rng.hpp"

#include <initializer_list>
#include <string>

namespace bdbc {

namespace {

using Rows = std::initializer_list<std::initializer_list<double>>;

Matrix from_rows(Rows rows) {
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index r = 0;
  for (const auto& row : rows) {
    Index c = 0;
    for (double v : row) {
      m(r, c++) = v;
    }
    ++r;
  }
  return m;
}

Matrix block_diag(std::initializer_list<Matrix> blocks) {
  Index p = 0;
  for (const auto& b : blocks) {
    p += b.rows();
  }
  Matrix out = Matrix::Zero(p, p);
  Index at = 0;
  for (const auto& b : blocks) {
    out.block(at, at, b.rows(), b.cols()) = b;
    at += b.rows();
  }
  return out;
}

ColumnGrouping contiguous(std::initializer_list<int> sizes) {
  std::vector<int> a;
  int g = 0;
  for (int s : sizes) {
    a.insert(a.end(), static_cast<std::size_t>(s), g++);
  }
  return ColumnGrouping(std::move(a), g);
}

Vector arange(int from, int count) {
  Vector v(count);
  for (int i = 0; i < count; ++i) {
    v[i] = from + i;
  }
  return v;
}

void require_spd(const Matrix& m, const char* what) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw NumericalError(std::string(what) + " is not positive definite");
  }
}

Matrix uniform_matrix(Rng& rng, Index rows, Index cols, double lo, double hi) {
  Matrix m(rows, cols);
  // row-major fill so the stream layout does not depend on storage order
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      m(r, c) = rng.uniform(lo, hi);
    }
  }
  return m;
}

} // namespace

DataMatrix sample_mvn(const Vector& mean, const Matrix& cov, int n, std::uint64_t seed) {
  if (n < 0) {
    throw InputError("sample_mvn: negative sample size");
  }
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw InputError("sample_mvn: mean and covariance dimensions differ");
  }
  const RidgeCholesky chol(cov);
  const Matrix l = chol.llt().matrixL();
  Rng rng(seed);
  const Index p = mean.size();
  Matrix x(n, p);
  Vector z(p);
  for (int i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) {
      z[j] = rng.normal();
    }
    x.row(i) = (mean + l * z).transpose();
  }
  return DataMatrix(std::move(x));
}

BlockDesign make_sigma_A() {
  const Matrix a3 = from_rows({{4.5, 2, 2}, {2, 4.5, 2}, {2, 2, 4.5}});
  const Matrix a2 = from_rows({{4.5, 2}, {2, 4.5}});
  BlockDesign d{arange(0, 8), block_diag({a3, a3, a2}), contiguous({3, 3, 2})};
  require_spd(d.cov, "Sigma_A");
  return d;
}

BlockDesign make_sigma_B() {
  const Matrix b1 = from_rows({{4.5, -2, 1}, {-2, 4.5, 2}, {1, 2, 4.5}});
  const Matrix b2 = from_rows({{4.5, -2, 2}, {-2, 4.5, 2}, {2, 2, 4.5}});
  const Matrix b3 = from_rows({{3, 2}, {2, 4.5}});
  BlockDesign d{arange(0, 8), block_diag({b1, b2, b3}), contiguous({3, 3, 2})};
  require_spd(d.cov, "Sigma_B");
  return d;
}

BlockDesign make_mape_design(bool positive) {
  const double off = positive ? 2.0 : -1.0;
  Matrix block = Matrix::Constant(4, 4, off);
  block.diagonal().setConstant(4.5);
  BlockDesign d{arange(1, 12), block_diag({block, block, block}), contiguous({4, 4, 4})};
  require_spd(d.cov, "MAPE design covariance");
  return d;
}

BlockDesign make_random_block_cov(int p, int k, std::uint64_t seed, double noise_weight) {
  if (p < 1 || k < 1 || p % k != 0) {
    throw InputError("make_random_block_cov: k = " + std::to_string(k) +
                     " must divide p = " + std::to_string(p));
  }
  Rng rng(seed);
  const int m = p / k;
  Matrix cov = Matrix::Zero(p, p);
  std::vector<int> a(static_cast<std::size_t>(p));
  for (int b = 0; b < k; ++b) {
    const Matrix A = uniform_matrix(rng, m, m, 1.0, 2.0);
    cov.block(b * m, b * m, m, m) = A.transpose() * A;
    for (int j = 0; j < m; ++j) {
      a[static_cast<std::size_t>(b * m + j)] = b;
    }
  }
  const Matrix E = uniform_matrix(rng, p, p, 0.0, 1.0);
  if (noise_weight != 0.0) {
    cov += noise_weight * (E.transpose() * E);
  }
  Vector mean(p);
  for (int j = 0; j < p; ++j) {
    mean[j] = rng.uniform();
  }
  return BlockDesign{std::move(mean), symmetrize(cov), ColumnGrouping(std::move(a), k)};
}

std::vector<MixtureComponentSpec> make_scenario1() {
  const Matrix s11 = from_rows({{2.5, 0.5, 0.5}, {0.5, 3.5, 0.5}, {0.5, 0.5, 4.5}});
  const Matrix s12 = from_rows({{2, 1, 1}, {1, 2, 1}, {1, 1, 2}});
  const Matrix s13 = from_rows({{3.5, 3.0}, {3.0, 3.9}});
  const Matrix s21 = from_rows({{4.5, -2, 1}, {-2, 4.5, 2}, {1, 2, 4.5}});
  const Matrix s22 = from_rows({{4, 3, 3}, {3, 3.5, 3}, {3, 3, 4}});
  const Matrix s23 = from_rows({{4, 2}, {2, 4}});
  const Matrix s31 = from_rows({{2.1, 2, 2, 2, 2},
                                {2, 2.5, 2, 2, 2},
                                {2, 2, 3, 2, 2},
                                {2, 2, 2, 5, 2},
                                {2, 2, 2, 2, 4}});
  const Matrix s32 = from_rows({{2, 1, 1}, {1, 3.5, 1}, {1, 1, 2.5}});

  std::vector<MixtureComponentSpec> comps{
      {1.0 / 3.0, arange(-5, 8), block_diag({s11, s12, s13}), contiguous({3, 3, 2})},
      {1.0 / 3.0, arange(0, 8), block_diag({s21, s22, s23}), contiguous({3, 3, 2})},
      {1.0 / 3.0, arange(5, 8), block_diag({s31, s32}), contiguous({5, 3})},
  };
  for (const auto& c : comps) {
    require_spd(c.cov, "scenario-1 covariance");
  }
  return comps;
}

std::vector<MixtureComponentSpec> make_scenario2(std::uint64_t seed) {
  auto comps = make_scenario1();
  Rng rng(seed);
  for (auto& c : comps) {
    const Matrix A = uniform_matrix(rng, 8, 8, 0.0, 1.0);
    c.cov = symmetrize(A.transpose() * A);
    c.grouping = ColumnGrouping::single(8);
  }
  return comps;
}

MixtureSample sample_mixture(const std::vector<MixtureComponentSpec>& components,
                             int n_per_component, std::uint64_t seed) {
  if (components.empty() || n_per_component < 0) {
    throw InputError("sample_mixture: need at least one component and n >= 0");
  }
  const Index p = components.front().mean.size();
  const auto g = static_cast<int>(components.size());
  MixtureSample out;
  out.data.values.resize(static_cast<Index>(g) * n_per_component, p);
  out.labels.reserve(static_cast<std::size_t>(g * n_per_component));
  for (int c = 0; c < g; ++c) {
    const auto& comp = components[static_cast<std::size_t>(c)];
    const DataMatrix part = sample_mvn(comp.mean, comp.cov, n_per_component,
                                       derive_seed(seed, {static_cast<std::uint64_t>(c)}));
    out.data.values.middleRows(static_cast<Index>(c) * n_per_component, n_per_component) =
        part.values;
    out.labels.insert(out.labels.end(), static_cast<std::size_t>(n_per_component), c);
  }
  return out;
}

} // namespace bdbc
