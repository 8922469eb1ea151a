#include "bdbc/core_stats.hpp"
#include "bdbc/error.hpp"
#include "bdbc/estimators.hpp"
#include "bdbc/eval.hpp"
#include "bdbc/simgen.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace bdbc;

namespace {

const std::vector<Method> kMethods{Method::greedy, Method::convex, Method::hierarchical};

/// Exactly block-diagonal covariance with unequal within-block correlations.
Matrix block_cov(const ColumnGrouping& g, Rng& rng) {
  const int p = g.p();
  Matrix s = Matrix::Zero(p, p);
  std::vector<double> rho(static_cast<std::size_t>(g.k()));
  for (auto& r : rho) {
    r = rng.uniform(0.3, 0.8);
  }
  Vector sd(p);
  for (int i = 0; i < p; ++i) {
    sd(i) = rng.uniform(0.5, 2.0);
  }
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (g[i] == g[j]) {
        s(i, j) = (i == j ? 1.0 : rho[static_cast<std::size_t>(g[i])]) * sd(i) * sd(j);
      }
    }
  }
  return s;
}

/// Average linkage recomputed from the original distances at every step.
std::vector<double> naive_upgma_heights(const Matrix& dist) {
  const auto n = static_cast<int>(dist.rows());
  std::vector<std::vector<int>> clusters;
  for (int i = 0; i < n; ++i) {
    clusters.push_back({i});
  }
  std::vector<double> heights;
  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0;
    std::size_t bb = 0;
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        double s = 0.0;
        for (int i : clusters[a]) {
          for (int j : clusters[b]) {
            s += dist(i, j);
          }
        }
        s /= static_cast<double>(clusters[a].size() * clusters[b].size());
        if (s < best) {
          best = s;
          ba = a;
          bb = b;
        }
      }
    }
    heights.push_back(best);
    clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
    clusters.erase(clusters.begin() + static_cast<long>(bb));
  }
  return heights;
}

/// Clamp-and-rescale projection, as documented for the relaxed rows.
void project_rows(Matrix& d) {
  for (Index j = 0; j < d.rows(); ++j) {
    for (Index c = 0; c < d.cols(); ++c) {
      d(j, c) = std::max(d(j, c), RelaxedGrouping::kFloor);
    }
    d.row(j) /= d.row(j).sum();
  }
}

Matrix random_feasible(Rng& rng, Index p, Index k) {
  Matrix d(p, k);
  for (Index j = 0; j < p; ++j) {
    for (Index c = 0; c < k; ++c) {
      d(j, c) = rng.uniform(0.05, 1.0);
    }
  }
  project_rows(d);
  return d;
}

Matrix finite_difference_gradient(const RelaxedObjective& f, const Matrix& d, double h) {
  Matrix g(d.rows(), d.cols());
  for (Index j = 0; j < d.rows(); ++j) {
    for (Index c = 0; c < d.cols(); ++c) {
      Matrix up = d;
      Matrix down = d;
      up(j, c) += h;
      down(j, c) -= h;
      g(j, c) = (f.value(up) - f.value(down)) / (2.0 * h);
    }
  }
  return g;
}

} // namespace

TEST_CASE("method names round trip") {
  for (Method m : kMethods) {
    CHECK(parse_method(method_name(m)) == m);
  }
  CHECK(parse_method("hierarchical") == Method::hierarchical);
  CHECK_THROWS_AS(parse_method("kmeans"), InputError);
}

TEST_CASE("pca_init edge cases") {
  const ColumnGrouping g = pca_init(Matrix::Identity(5, 5), 5);
  CHECK(g.p() == 5);
  CHECK(g.k() == 5);
  CHECK(pca_init(Matrix::Identity(2, 2), 1).assignment() == std::vector<int>{0, 0});
  CHECK_THROWS_AS(pca_init(Matrix::Identity(2, 2), 3), InputError);
  CHECK_THROWS_AS(pca_init(Matrix::Identity(2, 2), 0), InputError);
}

TEST_CASE("pca_init recovers strongly correlated blocks") {
  const ColumnGrouping truth({0, 0, 0, 1, 1, 1, 1, 2, 2}, 3);
  Matrix corr = Matrix::Identity(9, 9);
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      if (i != j && truth[i] == truth[j]) {
        corr(i, j) = 0.8;
      }
    }
  }
  CHECK(partition_match(pca_init(corr, 3), truth));
  CHECK(partition_match(pca_init(corr, 3, PcaLoading::signed_value), truth));
}

TEST_CASE("every estimator reports block_loglik of its grouping") {
  Rng rng(51);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix S = test::random_spd(rng, 7);
    for (Method m : kMethods) {
      const EstimatorReport r = estimate_grouping(m, S, 3);
      CHECK(r.method == m);
      CHECK(r.grouping.p() == 7);
      CHECK(r.grouping.k() == 3);
      CHECK(std::abs(r.objective - block_loglik(S, r.grouping)) < 1e-9);
    }
  }
}

TEST_CASE("k = 1 gives the single group for every estimator") {
  Rng rng(52);
  const Matrix S = test::random_spd(rng, 5);
  for (Method m : kMethods) {
    CHECK(estimate_grouping(m, S, 1).grouping == ColumnGrouping::single(5));
  }
  CHECK(greedy_estimate(S, 1).iterations == 0);
}

TEST_CASE("estimators reject k outside [1, p]") {
  const Matrix S = Matrix::Identity(3, 3);
  for (Method m : kMethods) {
    CHECK_THROWS_AS(estimate_grouping(m, S, 0), InputError);
    CHECK_THROWS_AS(estimate_grouping(m, S, 4), InputError);
  }
  CHECK_THROWS_AS(estimate_grouping(Method::greedy, Matrix::Identity(2, 3), 1), InputError);
}

TEST_CASE("exact block-diagonal covariances are recovered by all estimators") {
  Rng rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(3));
    const int p = k * (2 + static_cast<int>(rng.below(3)));
    const ColumnGrouping truth = test::random_grouping(rng, p, k);
    if (std::ranges::count(truth.sizes(), 1) > 0) {
      continue; // singleton blocks carry no correlation
    }
    const Matrix S = block_cov(truth, rng);
    for (Method m : kMethods) {
      INFO("method ", method_name(m), " trial ", trial);
      CHECK(partition_match(estimate_grouping(m, S, k).grouping, truth));
    }
  }
}

void check_equivariant(Method m, const Matrix& S, int k, Rng& rng) {
  const auto p = static_cast<int>(S.rows());
  const auto perm = test::random_permutation(rng, p);
  const ColumnGrouping a = estimate_grouping(m, S, k).grouping;
  const ColumnGrouping b = estimate_grouping(m, test::permute_sym(S, perm), k).grouping;
  std::vector<int> back(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    back[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = b[i];
  }
  INFO("method ", method_name(m));
  CHECK(partition_match(a.assignment(), back));
}

TEST_CASE("estimators are equivariant under a simultaneous permutation") {
  Rng rng(54);
  for (int trial = 0; trial < 20; ++trial) {
    const ColumnGrouping truth = test::random_grouping(rng, 12, 3);
    const Matrix S = block_cov(truth, rng);
    for (Method m : kMethods) {
      check_equivariant(m, S, 3, rng);
    }
  }
  // greedy sweeps in variable order and the relaxation rounds near-ties, so
  // on noisy covariances only the hierarchical estimator is order-free
  for (int trial = 0; trial < 20; ++trial) {
    check_equivariant(Method::hierarchical, make_random_block_cov(12, 3, rng.next(), 0.5).cov, 3,
                      rng);
  }
}

TEST_CASE("greedy trace never decreases and ends at a local optimum") {
  Rng rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    const int p = 4 + static_cast<int>(rng.below(5));
    const int k = 2 + static_cast<int>(rng.below(2));
    const Matrix S = test::random_spd(rng, p);
    const EstimatorReport r = greedy_estimate(S, k);
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      CHECK(r.trace[i] >= r.trace[i - 1]);
    }
    REQUIRE(r.converged);
    for (int j = 0; j < p; ++j) {
      for (int b = 0; b < k; ++b) {
        ColumnGrouping moved = r.grouping;
        moved.assign(j, b);
        CHECK(block_loglik(S, moved) <= r.objective + 1e-9 * (1.0 + std::abs(r.objective)));
      }
    }
  }
}

TEST_CASE("greedy on p = 4, K = 2 against exhaustive enumeration") {
  Rng rng(56);
  int global = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    const Matrix S = test::random_spd(rng, 4);
    const EstimatorReport r = greedy_estimate(S, 2);
    double best = -std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < 16; ++mask) {
      std::vector<int> a(4);
      for (int j = 0; j < 4; ++j) {
        a[static_cast<std::size_t>(j)] = (mask >> j) & 1;
      }
      const double v = block_loglik(S, ColumnGrouping(a, 2));
      best = std::max(best, v);
    }
    CHECK(r.objective <= best + 1e-12);
    global += r.objective >= best - 1e-9 ? 1 : 0;
  }
  MESSAGE("greedy reached the exhaustive optimum in ", global, " of ", trials, " instances");
  CHECK(global > 0);
}

TEST_CASE("relaxed objective gradient matches central differences") {
  Rng rng(57);
  for (int trial = 0; trial < 20; ++trial) {
    const Index p = 4;
    const Index k = 2;
    const Matrix S = test::random_spd(rng, p);
    const RelaxedObjective f(S, rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0));
    const Matrix d = random_feasible(rng, p, k);
    const Matrix analytic = f.gradient(d);
    const Matrix numeric = finite_difference_gradient(f, d, 1e-5);
    const double rel = (analytic - numeric).norm() / std::max(1.0, numeric.norm());
    CHECK(rel < 1e-4);
    for (Index c = 0; c < k; ++c) {
      CHECK((f.gradient(d, static_cast<int>(c)) - analytic.col(c)).norm() == 0.0);
    }
  }
}

TEST_CASE("uniform soft grouping is stationary without penalties") {
  Rng rng(58);
  const Matrix S = test::random_spd(rng, 6);
  const RelaxedObjective f(S, 0.0, 0.0);
  Matrix d = Matrix::Constant(6, 3, 1.0 / 3.0);
  const Matrix g = f.gradient(d);
  for (Index c = 1; c < 3; ++c) {
    CHECK((g.col(c) - g.col(0)).cwiseAbs().maxCoeff() < 1e-12);
  }
  const double before = f.value(d);
  d += 0.1 * g;
  project_rows(d);
  CHECK(f.value(d) == doctest::Approx(before).epsilon(1e-12));
  CHECK((d.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("convex relaxation keeps rows on the floored simplex") {
  Rng rng(59);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix S = test::random_spd(rng, 8);
    const RelaxedGrouping r = convex_relax_fit(S, 3);
    CHECK(r.d.rows() == 8);
    CHECK(r.d.cols() == 3);
    CHECK((r.d.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-8);
    CHECK(r.d.minCoeff() >= RelaxedGrouping::kFloor * (1.0 - 1e-12));
    CHECK(r.objective_trace.size() >= 2);
  }
  CHECK_THROWS_AS(convex_relax_fit(Matrix::Identity(3, 3), 2, {.omega = 0.0}), InputError);
}

TEST_CASE("population covariances of the positive and negative designs") {
  for (const BlockDesign& design : {make_sigma_A(), make_sigma_B()}) {
    CHECK(partition_match(hierarchical_estimate(design.cov, 3).grouping, design.grouping));
    CHECK(partition_match(greedy_estimate(design.cov, 3).grouping, design.grouping));
  }
  CHECK(partition_match(convex_relax_estimate(make_sigma_A().cov, 3).grouping,
                        make_sigma_A().grouping));
}

TEST_CASE("hierarchical with k = p leaves every variable alone") {
  Rng rng(60);
  const Matrix S = test::random_spd(rng, 3);
  CHECK(partition_match(hierarchical_estimate(S, 3).grouping, ColumnGrouping::finest(3)));
}

TEST_CASE("hierarchical estimate is deterministic") {
  Rng rng(61);
  const Matrix S = test::random_spd(rng, 10);
  const auto a = hierarchical_estimate(S, 4).grouping;
  for (int i = 0; i < 5; ++i) {
    CHECK(hierarchical_estimate(S, 4).grouping == a);
  }
}

TEST_CASE("correlation feature distances") {
  Matrix S(3, 3);
  S << 4, 2, 0, 2, 1, 0, 0, 0, 9;
  const Matrix d = correlation_feature_distances(S);
  // |corr| rows: (1, 1, 0), (1, 1, 0), (0, 0, 1)
  CHECK(d(0, 1) == doctest::Approx(0.0));
  CHECK(d(0, 2) == doctest::Approx(std::sqrt(3.0)));
  CHECK(d.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK(test::max_abs_diff(d, d.transpose()) == 0.0);
}

TEST_CASE("dendrogram heights match naive average linkage") {
  Rng rng(62);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(10));
    Matrix pts = test::normal_matrix(rng, n, 3);
    Matrix dist(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        dist(i, j) = (pts.row(i) - pts.row(j)).norm();
      }
    }
    const Dendrogram tree(dist);
    REQUIRE(tree.merges().size() == static_cast<std::size_t>(n - 1));
    const auto want = naive_upgma_heights(dist);
    for (std::size_t m = 0; m < want.size(); ++m) {
      CHECK(tree.merges()[m].height == doctest::Approx(want[m]).epsilon(1e-12));
    }
    for (int k = 1; k <= n; ++k) {
      const ColumnGrouping g = tree.cut(k);
      CHECK(g.k() == k);
      CHECK_FALSE(g.has_empty_group());
    }
  }
}

TEST_CASE("dendrogram ties go to the smallest pair") {
  const Matrix dist = Matrix::Constant(4, 4, 1.0) - Matrix::Identity(4, 4);
  const Dendrogram tree(dist);
  CHECK(tree.merges()[0].a == 0);
  CHECK(tree.merges()[0].b == 1);
  CHECK(tree.cut(3).assignment() == std::vector<int>{0, 0, 1, 2});
}

TEST_CASE("silhouette selection") {
  const ColumnGrouping truth({0, 0, 0, 1, 1, 1, 2, 2, 2}, 3);
  Rng rng(63);
  const Matrix S = block_cov(truth, rng);
  const SilhouetteSelection sel = select_k_silhouette(S, 2, 6);
  CHECK(sel.k == 3);
  CHECK(sel.scores.size() == 5);
  const SilhouetteSelection flat = select_k_silhouette(Matrix::Identity(6, 6) * 2.0, 2, 5);
  CHECK(flat.k == 2);
  for (const auto& [k, s] : flat.scores) {
    CHECK(s == 0.0);
  }
  CHECK_THROWS_AS(select_k_silhouette(S, 1, 3), InputError);
  CHECK_THROWS_AS(select_k_silhouette(S, 4, 3), InputError);
  CHECK_THROWS_AS(select_k_silhouette(S, 2, 9), InputError);
}

TEST_CASE("default silhouette range") {
  CHECK(default_k_range(24) == std::pair{2, 12});
  CHECK(default_k_range(4) == std::pair{2, 3});
  CHECK(default_k_range(96) == std::pair{2, 22});
}

TEST_CASE("silhouette picks K within one of the truth on noisy p = 24 designs") {
  int hits = 0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    const BlockDesign design = make_random_block_cov(24, 3, 1000 + r, 0.5);
    const DataMatrix x = sample_mvn(design.mean, design.cov, 50, 5000 + r);
    const Matrix S = compute_stats(x).cov;
    const auto [lo, hi] = default_k_range(24);
    const int k = select_k_silhouette(S, lo, hi).k;
    hits += std::abs(k - 3) <= 1 ? 1 : 0;
  }
  MESSAGE("selected K within one of 3 in ", hits, " of 100 replicates");
  CHECK(hits >= 80);
}
