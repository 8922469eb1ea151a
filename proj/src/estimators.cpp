#include "bdbc/estimators.hpp"

#include "bdbc/core_stats.hpp"
#include "bdbc/error.hpp"
#include "bdbc/linalg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

namespace bdbc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_square(const Matrix& S, const char* who) {
  if (S.rows() != S.cols() || S.rows() < 1) {
    throw InputError(std::string(who) + ": covariance must be a non-empty square matrix");
  }
  if (!S.allFinite()) {
    throw InputError(std::string(who) + ": covariance has non-finite entries");
  }
}

void check_k(int k, Index p, const char* who) {
  if (k < 1 || k > p) {
    throw InputError(std::string(who) + ": k = " + std::to_string(k) + " outside [1, " +
                     std::to_string(p) + "]");
  }
}

std::vector<int> without(const std::vector<int>& v, int x) {
  std::vector<int> out;
  out.reserve(v.size());
  for (int y : v) {
    if (y != x) {
      out.push_back(y);
    }
  }
  return out;
}

std::vector<int> with(const std::vector<int>& v, int x) {
  std::vector<int> out(v);
  out.insert(std::lower_bound(out.begin(), out.end(), x), x);
  return out;
}

// Keeps every entry >= floor and the row sum at 1 by rescaling the mass above
// the floor.
void project_row(Eigen::Ref<Vector> row, double floor) {
  row = row.cwiseMax(floor);
  row /= row.sum();
  // dividing can push floored entries just below the floor; lift them and
  // take the difference from the mass above it
  row = row.cwiseMax(floor);
  const double k = static_cast<double>(row.size());
  row.array() = floor + (row.array() - floor) * ((1.0 - k * floor) / (row.sum() - k * floor));
}

ColumnGrouping rowwise_argmax(const Matrix& d) {
  std::vector<int> a(static_cast<std::size_t>(d.rows()));
  for (Index j = 0; j < d.rows(); ++j) {
    Index best = 0;
    for (Index c = 1; c < d.cols(); ++c) {
      if (d(j, c) > d(j, best)) {
        best = c;
      }
    }
    a[static_cast<std::size_t>(j)] = static_cast<int>(best);
  }
  return ColumnGrouping(std::move(a), static_cast<int>(d.cols()));
}

} // namespace

std::string_view method_name(Method m) {
  switch (m) {
  case Method::greedy:
    return "greedy";
  case Method::convex:
    return "convex";
  case Method::hierarchical:
    return "hier";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "greedy") {
    return Method::greedy;
  }
  if (name == "convex") {
    return Method::convex;
  }
  if (name == "hier" || name == "hierarchical") {
    return Method::hierarchical;
  }
  throw InputError("unknown estimator method '" + std::string(name) +
                   "' (expected greedy, convex or hier)");
}

ColumnGrouping pca_init(const Matrix& corr, int k, PcaLoading loading) {
  check_square(corr, "pca_init");
  const Index p = corr.rows();
  check_k(k, p, "pca_init");
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(corr));
  if (eig.info() != Eigen::Success) {
    throw NumericalError("pca_init: eigen-decomposition failed");
  }
  // eigenvalues come ascending; component c is column p - 1 - c
  const Matrix& vecs = eig.eigenvectors();
  std::vector<int> a(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) {
    auto load = [&](int c) {
      const double v = vecs(j, p - 1 - c);
      return loading == PcaLoading::magnitude ? std::abs(v) : v;
    };
    int best = 0;
    for (int c = 1; c < k; ++c) {
      if (load(c) > load(best)) {
        best = c;
      }
    }
    a[static_cast<std::size_t>(j)] = best;
  }
  return ColumnGrouping(std::move(a), k);
}

EstimatorReport greedy_estimate(const Matrix& S, int k, int max_sweeps) {
  const auto t0 = Clock::now();
  check_square(S, "greedy_estimate");
  const auto p = static_cast<int>(S.rows());
  check_k(k, p, "greedy_estimate");

  EstimatorReport rep;
  rep.method = Method::greedy;
  ColumnGrouping grouping = pca_init(correlation_from_cov(S), k);
  auto members = grouping.members();
  std::vector<double> terms(static_cast<std::size_t>(k));
  double objective = 0.0;
  for (int g = 0; g < k; ++g) {
    terms[static_cast<std::size_t>(g)] = block_term(S, members[static_cast<std::size_t>(g)]);
    objective += terms[static_cast<std::size_t>(g)];
  }
  rep.trace.push_back(objective);

  bool changed = k > 1;
  int sweeps = 0;
  while (changed && sweeps < max_sweeps) {
    changed = false;
    ++sweeps;
    for (int j = 0; j < p; ++j) {
      const int a = grouping[j];
      const auto ua = static_cast<std::size_t>(a);
      const auto rest = without(members[ua], j);
      const double term_rest = block_term(S, rest);
      // moves must beat rounding noise; the incumbent wins exact ties
      double best_gain = 1e-12 * (1.0 + std::abs(objective));
      int best = a;
      double best_term = 0.0;
      std::vector<int> best_members;
      for (int b = 0; b < k; ++b) {
        if (b == a) {
          continue;
        }
        const auto ub = static_cast<std::size_t>(b);
        auto grown = with(members[ub], j);
        const double term_grown = block_term(S, grown);
        const double gain = term_rest + term_grown - terms[ua] - terms[ub];
        if (gain > best_gain) {
          best_gain = gain;
          best = b;
          best_term = term_grown;
          best_members = std::move(grown);
        }
      }
      if (best != a) {
        const auto ub = static_cast<std::size_t>(best);
        members[ua] = rest;
        members[ub] = std::move(best_members);
        terms[ua] = term_rest;
        terms[ub] = best_term;
        grouping.assign(j, best);
        const double next = std::accumulate(terms.begin(), terms.end(), 0.0);
        if (next < objective - 1e-9 * (1.0 + std::abs(objective))) {
          throw NumericalError("greedy_estimate: objective decreased after a move");
        }
        objective = next;
        rep.trace.push_back(objective);
        changed = true;
      }
    }
  }

  rep.converged = !changed;
  rep.iterations = sweeps;
  rep.objective = block_loglik(S, grouping);
  rep.empty_groups = grouping.has_empty_group();
  rep.grouping = std::move(grouping);
  rep.wall_time = seconds_since(t0);
  return rep;
}

RelaxedObjective::RelaxedObjective(const Matrix& S, double gamma, double lambda)
    : gamma_(gamma), lambda_(lambda) {
  check_square(S, "convex relaxation");
  precision_ = symmetrize(RidgeCholesky(S).inverse());
  hadamard_ = precision_.cwiseProduct(S);
}

double RelaxedObjective::value(const Matrix& d) const {
  const Index p = d.rows();
  const Matrix theta = precision_.cwiseProduct(d * d.transpose());
  double f = 0.5 * RidgeCholesky(theta).log_det();
  for (Index k = 0; k < d.cols(); ++k) {
    f -= 0.5 * d.col(k).dot(hadamard_ * d.col(k));
  }
  f += gamma_ * (d.squaredNorm() - static_cast<double>(p));
  Matrix dtd = d.transpose() * d;
  dtd.diagonal().array() += 1e-10;
  f += lambda_ * RidgeCholesky(dtd).log_det();
  return f;
}

Matrix RelaxedObjective::gradient(const Matrix& d) const {
  const Matrix theta = precision_.cwiseProduct(d * d.transpose());
  const Matrix t = RidgeCholesky(theta).inverse();
  const Matrix tp = t.cwiseProduct(precision_);
  Matrix dtd = d.transpose() * d;
  dtd.diagonal().array() += 1e-10;
  const Matrix barrier = d * RidgeCholesky(dtd).inverse();
  return tp * d - hadamard_ * d + 2.0 * gamma_ * d + 2.0 * lambda_ * barrier;
}

Vector RelaxedObjective::gradient(const Matrix& d, int k) const {
  return gradient(d).col(k);
}

RelaxedGrouping convex_relax_fit(const Matrix& S, int k, const ConvexOptions& opts) {
  check_square(S, "convex_relax_estimate");
  const Index p = S.rows();
  check_k(k, p, "convex_relax_estimate");
  if (!(opts.omega > 0.0)) {
    throw InputError("convex_relax_estimate: omega must be positive");
  }
  if (opts.max_iter < 0 || !(opts.tol >= 0.0)) {
    throw InputError("convex_relax_estimate: invalid max_iter or tol");
  }

  RelaxedGrouping out;
  out.gamma = opts.gamma;
  out.lambda = opts.lambda;
  out.omega = opts.omega;
  if (k == 1) {
    out.d = Matrix::Ones(p, 1);
    out.converged = true;
    return out;
  }

  // soft start from the PCA assignment; the uniform point is stationary
  const ColumnGrouping init = pca_init(correlation_from_cov(S), k);
  const double off = 0.2 / static_cast<double>(k - 1);
  out.d = Matrix::Constant(p, k, off);
  for (Index j = 0; j < p; ++j) {
    out.d(j, init[static_cast<int>(j)]) = 0.8;
  }

  const RelaxedObjective objective(S, opts.gamma, opts.lambda);
  double f = objective.value(out.d);
  out.objective_trace.push_back(f);
  for (int it = 0; it < opts.max_iter; ++it) {
    for (int c = 0; c < k; ++c) {
      out.d.col(c) += opts.omega * objective.gradient(out.d, c);
      for (Index j = 0; j < p; ++j) {
        Vector row = out.d.row(j).transpose();
        project_row(row, RelaxedGrouping::kFloor);
        out.d.row(j) = row.transpose();
      }
    }
    const double next = objective.value(out.d);
    if (!std::isfinite(next) || !out.d.allFinite()) {
      throw NumericalError("convex_relax_estimate: objective became non-finite at cycle " +
                           std::to_string(it + 1) + "; reduce omega");
    }
    out.objective_trace.push_back(next);
    if (std::abs(next - f) < opts.tol) {
      out.converged = true;
      break;
    }
    f = next;
  }
  return out;
}

EstimatorReport convex_relax_estimate(const Matrix& S, int k, const ConvexOptions& opts) {
  const auto t0 = Clock::now();
  RelaxedGrouping relaxed = convex_relax_fit(S, k, opts);
  EstimatorReport rep;
  rep.method = Method::convex;
  rep.grouping = rowwise_argmax(relaxed.d);
  rep.objective = block_loglik(S, rep.grouping);
  rep.iterations = static_cast<int>(relaxed.objective_trace.size()) - 1;
  rep.converged = relaxed.converged;
  rep.empty_groups = rep.grouping.has_empty_group();
  rep.trace = std::move(relaxed.objective_trace);
  rep.wall_time = seconds_since(t0);
  return rep;
}

EstimatorReport estimate_grouping(Method method, const Matrix& S, int k,
                                  const EstimatorOptions& opts) {
  switch (method) {
  case Method::greedy:
    return greedy_estimate(S, k, opts.greedy_sweeps);
  case Method::convex:
    return convex_relax_estimate(S, k, opts.convex);
  case Method::hierarchical:
    return hierarchical_estimate(S, k);
  }
  throw InputError("unknown estimator method");
}

} // namespace bdbc
