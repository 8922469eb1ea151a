#include "bdbc/core_stats.hpp"
#include "bdbc/error.hpp"
#include "bdbc/eval.hpp"
#include "bdbc/mixture.hpp"
#include "bdbc/simgen.hpp"
#include "support.hpp"

#include <doctest.h>

#include <Eigen/LU>

#include <cmath>
#include <numbers>

using namespace bdbc;

namespace {

Matrix two_clouds(Rng& rng, int per, double gap) {
  Matrix x(2 * per, 2);
  for (int i = 0; i < 2 * per; ++i) {
    const double shift = i < per ? 0.0 : gap;
    x(i, 0) = rng.normal() + shift;
    x(i, 1) = rng.normal() - shift;
  }
  return x;
}

double dense_density(const Vector& x, const Vector& mu, const Matrix& cov) {
  Eigen::FullPivLU<Matrix> lu(cov);
  const Vector d = x - mu;
  const double p = static_cast<double>(x.size());
  return std::exp(-0.5 * d.dot(lu.inverse() * d)) /
         std::sqrt(std::pow(2.0 * std::numbers::pi, p) * lu.determinant());
}

MixtureModel random_model(Rng& rng, int g, int p, int k) {
  MixtureModel m;
  m.means = test::normal_matrix(rng, g, p);
  double total = 0.0;
  for (int c = 0; c < g; ++c) {
    m.weights.push_back(rng.uniform(0.2, 1.0));
    total += m.weights.back();
    m.covariances.push_back(
        project_block_diagonal(test::random_spd(rng, p), test::random_grouping(rng, p, k)));
  }
  for (double& w : m.weights) {
    w /= total;
  }
  return m;
}

/// Plain full-covariance GMM EM from the same hard start, written against
/// the dense density.
std::vector<double> unconstrained_em_trace(const Matrix& x, const Labels& init, int g, int iters) {
  const Index n = x.rows();
  const Index p = x.cols();
  Matrix resp = Matrix::Zero(n, g);
  for (Index i = 0; i < n; ++i) {
    resp(i, init[static_cast<std::size_t>(i)]) = 1.0;
  }
  std::vector<double> trace;
  for (int it = 0; it < iters; ++it) {
    std::vector<double> w(static_cast<std::size_t>(g));
    std::vector<Vector> mu(static_cast<std::size_t>(g));
    std::vector<Matrix> cov(static_cast<std::size_t>(g));
    for (int c = 0; c < g; ++c) {
      const double mass = resp.col(c).sum();
      w[static_cast<std::size_t>(c)] = mass / static_cast<double>(n);
      Vector m = Vector::Zero(p);
      for (Index i = 0; i < n; ++i) {
        m += resp(i, c) * x.row(i).transpose();
      }
      m /= mass;
      Matrix s = Matrix::Zero(p, p);
      for (Index i = 0; i < n; ++i) {
        const Vector d = x.row(i).transpose() - m;
        s += resp(i, c) * d * d.transpose();
      }
      mu[static_cast<std::size_t>(c)] = m;
      cov[static_cast<std::size_t>(c)] = s / mass;
    }
    double ll = 0.0;
    for (Index i = 0; i < n; ++i) {
      double total = 0.0;
      for (int c = 0; c < g; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        resp(i, c) = w[uc] * dense_density(x.row(i).transpose(), mu[uc], cov[uc]);
        total += resp(i, c);
      }
      resp.row(i) /= total;
      ll += std::log(total);
    }
    trace.push_back(ll);
  }
  return trace;
}

MixtureSample scenario1_sample(int per, std::uint64_t seed) {
  return sample_mixture(make_scenario1(), per, seed);
}

} // namespace

TEST_CASE("kmeans separates far-apart clouds") {
  Rng rng(71);
  const Matrix x = two_clouds(rng, 25, 20.0);
  const Labels l = kmeans(x, 2, 5, 1);
  Labels truth(50, 0);
  std::fill(truth.begin() + 25, truth.end(), 1);
  CHECK(ari(l, truth) == 1.0);
  CHECK(kmeans(x, 1, 3, 1) == Labels(50, 0));
  CHECK(kmeans(x, 2, 5, 1) == l);
  CHECK_THROWS_AS(kmeans(x, 51, 1, 1), InputError);
  CHECK_THROWS_AS(kmeans(x, 0, 1, 1), InputError);
}

TEST_CASE("kmeans beats random assignments") {
  Rng rng(72);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = test::normal_matrix(rng, 30, 2);
    const double w = within_cluster_ss(x, kmeans(x, 3, 10, rng.next()));
    for (int r = 0; r < 100; ++r) {
      Labels l(30);
      for (auto& v : l) {
        v = static_cast<int>(rng.below(3));
      }
      CHECK(w <= within_cluster_ss(x, l) + 1e-12);
    }
  }
}

TEST_CASE("e_step with one component") {
  Rng rng(73);
  const MixtureModel m = random_model(rng, 1, 3, 2);
  const Matrix x = test::normal_matrix(rng, 10, 3);
  const EStepResult r = e_step(x, m);
  CHECK(r.responsibilities == Matrix::Ones(10, 1));
}

TEST_CASE("e_step on a symmetric two-component model") {
  MixtureModel m;
  m.weights = {0.5, 0.5};
  m.means = Matrix(2, 2);
  m.means << -1, 0, 1, 0;
  const auto cov = project_block_diagonal(Matrix::Identity(2, 2), ColumnGrouping::single(2));
  m.covariances = {cov, cov};
  Matrix x(2, 2);
  x << 0, 0, 0, 7;
  const EStepResult r = e_step(x, m);
  CHECK(test::max_abs_diff(r.responsibilities, Matrix::Constant(2, 2, 0.5)) < 1e-15);
}

TEST_CASE("e_step matches the direct evaluation") {
  Rng rng(74);
  for (int trial = 0; trial < 20; ++trial) {
    const MixtureModel m = random_model(rng, 3, 4, 2);
    const Matrix x = test::normal_matrix(rng, 8, 4);
    const EStepResult r = e_step(x, m);
    double ll = 0.0;
    for (Index i = 0; i < 8; ++i) {
      Vector dens(3);
      for (int c = 0; c < 3; ++c) {
        dens(c) = m.weights[static_cast<std::size_t>(c)] *
                  dense_density(x.row(i).transpose(), m.means.row(c).transpose(),
                                m.covariances[static_cast<std::size_t>(c)].expanded());
      }
      ll += std::log(dens.sum());
      CHECK((r.responsibilities.row(i).transpose() - dens / dens.sum()).cwiseAbs().maxCoeff() <
            1e-10);
    }
    CHECK(r.loglik == doctest::Approx(ll).epsilon(1e-10));
  }
}

TEST_CASE("e_step names the row that underflows") {
  Rng rng(75);
  const MixtureModel m = random_model(rng, 2, 2, 1);
  Matrix x = Matrix::Zero(3, 2);
  x(1, 0) = 1e300;
  try {
    e_step(x, m);
    FAIL("expected a numerical error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}

TEST_CASE("m_step with all mass on one component") {
  Rng rng(76);
  const Matrix x = test::normal_matrix(rng, 20, 3);
  Matrix resp = Matrix::Zero(20, 2);
  resp.col(0).setOnes();
  CHECK_THROWS_AS(m_step(x, resp, {.k = 1}), NumericalError);
  const MixtureModel m = m_step(x, resp.leftCols(1), {.k = 1});
  const SampleStats st = compute_stats(x);
  CHECK(test::max_abs_diff(m.covariances[0].expanded(), st.cov) < 1e-12);
  CHECK((m.means.row(0).transpose() - st.mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(m.weights[0] == 1.0);
}

TEST_CASE("m_step with hard responsibilities equals subset statistics") {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = test::normal_matrix(rng, 30, 4);
    Matrix resp = Matrix::Zero(30, 3);
    std::vector<std::vector<Index>> rows(3);
    for (Index i = 0; i < 30; ++i) {
      const auto c = static_cast<Index>(i < 9 ? i / 3 : static_cast<Index>(rng.below(3)));
      resp(i, c) = 1.0;
      rows[static_cast<std::size_t>(c)].push_back(i);
    }
    const MixtureModel m = m_step(x, resp, {.k = 1});
    for (int c = 0; c < 3; ++c) {
      const auto& r = rows[static_cast<std::size_t>(c)];
      Matrix sub(static_cast<Index>(r.size()), 4);
      for (std::size_t i = 0; i < r.size(); ++i) {
        sub.row(static_cast<Index>(i)) = x.row(r[i]);
      }
      const SampleStats st = compute_stats(sub);
      CHECK(test::max_abs_diff(m.covariances[static_cast<std::size_t>(c)].expanded(), st.cov) <
            1e-12);
      CHECK((m.means.row(c).transpose() - st.mean).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(m.weights[static_cast<std::size_t>(c)] ==
            doctest::Approx(static_cast<double>(r.size()) / 30.0));
    }
  }
}

TEST_CASE("m_step with K = p gives diagonal covariances") {
  Rng rng(78);
  const Matrix x = test::normal_matrix(rng, 40, 5);
  Matrix resp(40, 2);
  for (Index i = 0; i < 40; ++i) {
    resp(i, 0) = rng.uniform(0.1, 0.9);
    resp(i, 1) = 1.0 - resp(i, 0);
  }
  const MixtureModel m = m_step(x, resp, {.k = 5});
  for (const auto& cov : m.covariances) {
    const Matrix e = cov.expanded();
    CHECK((e - Matrix(e.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(m_step(x, resp, {.k = 6}), InputError);
}

TEST_CASE("a single Gaussian reaches the MLE after one iteration") {
  Rng rng(79);
  const Matrix x = test::normal_matrix(rng, 200, 3) * 2.0;
  const FitReport r = em_fit(x, {.g = 1, .mstep = {.k = 1}, .seed = 3});
  REQUIRE(r.loglik_trace.size() >= 2);
  for (double l : r.loglik_trace) {
    CHECK(l == doctest::Approx(r.loglik_trace.front()).epsilon(1e-12));
  }
  CHECK(r.converged);
  const SampleStats st = compute_stats(x);
  double ll = 0.0;
  for (Index i = 0; i < 200; ++i) {
    ll += gaussian_logpdf(x.row(i).transpose(), st.mean, st.cov);
  }
  CHECK(r.loglik() == doctest::Approx(ll).epsilon(1e-12));
}

TEST_CASE("fit on scenario 1 recovers the rows") {
  const MixtureSample s = scenario1_sample(300, 9);
  const FitReport r = em_fit(s.data.values, {.g = 3, .mstep = {.k = 3}, .seed = 2});
  CHECK(ari(s.labels, r.row_assignment) >= 0.9);
  CHECK(r.model.g() == 3);
  for (int c = 0; c < 3; ++c) {
    CHECK(r.model.grouping(c).p() == 8);
  }
  CHECK(e_step(s.data.values, r.model).loglik == doctest::Approx(r.loglik()).epsilon(1e-12));
  CHECK((r.responsibilities.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-8);
  CHECK_NOTHROW(r.model.validate());
}

TEST_CASE("EM log-likelihood never decreases") {
  const MixtureSample s = scenario1_sample(60, 10);
  for (Method m : {Method::hierarchical, Method::greedy, Method::convex}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      EmOptions o{.g = 3, .mstep = {.k = 3, .method = m}, .seed = seed, .max_iter = 100};
      const FitReport r = em_fit(s.data.values, o);
      for (std::size_t t = 1; t < r.loglik_trace.size(); ++t) {
        INFO("method ", method_name(m), " seed ", seed, " step ", t);
        CHECK(r.loglik_trace[t] >= r.loglik_trace[t - 1] - 1e-7);
      }
    }
  }
}

TEST_CASE("with K = 1 the fit follows unconstrained EM") {
  const MixtureSample s = scenario1_sample(40, 11);
  const EmOptions o{.g = 3, .mstep = {.k = 1}, .seed = 4, .max_iter = 6, .tol = 1e-300};
  const FitReport r = em_fit(s.data.values, o);
  const Labels init = kmeans(s.data.values, 3, o.kmeans_restarts, o.seed);
  REQUIRE(r.loglik_trace.size() >= 3);
  const auto want = unconstrained_em_trace(s.data.values, init, 3,
                                           static_cast<int>(r.loglik_trace.size()));
  for (std::size_t t = 0; t < want.size(); ++t) {
    CHECK(std::abs(r.loglik_trace[t] - want[t]) < 1e-8 * std::max(1.0, std::abs(want[t])));
  }
}

TEST_CASE("free parameter counts") {
  Rng rng(81);
  const Matrix x = test::normal_matrix(rng, 50, 4);
  const FitReport full = em_fit(x, {.g = 1, .mstep = {.k = 1}});
  CHECK(free_parameters(full.model) == 4 + 10);
  const FitReport diag = em_fit(x, {.g = 1, .mstep = {.k = 4}});
  CHECK(free_parameters(diag.model) == 4 + 4);
  CHECK(full.bic == doctest::Approx(2.0 * full.loglik() - 14.0 * std::log(50.0)));
  CHECK(full.loglik() >= diag.loglik());
  MixtureModel m = random_model(rng, 3, 5, 2);
  int nu = 2 + 15;
  for (const auto& c : m.covariances) {
    for (int sz : c.grouping.sizes()) {
      nu += sz * (sz + 1) / 2;
    }
  }
  CHECK(free_parameters(m) == nu);
}

TEST_CASE("nested structures: the fuller model fits at least as well") {
  Rng rng(82);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = test::normal_matrix(rng, 60, 5) * test::random_spd(rng, 5);
    double previous = -std::numeric_limits<double>::infinity();
    for (int k = 5; k >= 1; --k) {
      const FitReport r = em_fit(x, {.g = 1, .mstep = {.k = k}});
      CHECK(r.loglik() >= previous - 1e-9);
      previous = r.loglik();
    }
  }
}

TEST_CASE("relabelling components leaves loglik and BIC unchanged") {
  const MixtureSample s = scenario1_sample(50, 12);
  const FitReport r = em_fit(s.data.values, {.g = 3, .mstep = {.k = 3}, .seed = 5});
  MixtureModel m = r.model;
  const std::vector<int> perm{2, 0, 1};
  MixtureModel q = m;
  for (int c = 0; c < 3; ++c) {
    const auto src = static_cast<std::size_t>(perm[static_cast<std::size_t>(c)]);
    q.weights[static_cast<std::size_t>(c)] = m.weights[src];
    q.means.row(c) = m.means.row(static_cast<Index>(src));
    q.covariances[static_cast<std::size_t>(c)] = m.covariances[src];
  }
  CHECK(e_step(s.data.values, q).loglik == doctest::Approx(r.loglik()).epsilon(1e-12));
  CHECK(free_parameters(q) == free_parameters(m));
}

TEST_CASE("select_g") {
  Rng rng(83);
  const Matrix one = test::normal_matrix(rng, 300, 4);
  CHECK(select_g(one, {1, 2, 3}, {.mstep = {.k = 2}}).best.model.g() == 1);

  const MixtureSample s = scenario1_sample(300, 13);
  const GSelection a = select_g(s.data.values, {1, 2, 3, 4, 5}, {.mstep = {.k = 3}, .seed = 6});
  CHECK(a.best.model.g() == 3);
  CHECK(a.table.size() == 5);
  const GSelection b =
      select_g(s.data.values, {1, 2, 3, 4, 5}, {.mstep = {.k = 3}, .seed = 6}, 1, 4);
  REQUIRE(b.table.size() == a.table.size());
  for (std::size_t i = 0; i < a.table.size(); ++i) {
    CHECK(a.table[i] == b.table[i]);
  }
  CHECK_THROWS_AS(select_g(one, {}, {}), InputError);
  CHECK_THROWS_AS(select_g(one, {1}, {}, 0), InputError);
}

TEST_CASE("fits are reproducible and reject bad options") {
  const MixtureSample s = scenario1_sample(40, 14);
  const FitReport a = em_fit(s.data.values, {.g = 2, .mstep = {.k = 2}, .seed = 7});
  const FitReport b = em_fit(s.data.values, {.g = 2, .mstep = {.k = 2}, .seed = 7});
  CHECK(a.loglik_trace == b.loglik_trace);
  CHECK(a.row_assignment == b.row_assignment);
  CHECK_THROWS_AS(em_fit(s.data.values.topRows(3), {.g = 3}), InputError);
  CHECK_THROWS_AS(em_fit(s.data.values, {.g = 2, .max_iter = 0}), InputError);
}
