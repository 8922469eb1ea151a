#include "bdbc/mixture.hpp"

#include "bdbc/core_stats.hpp"
#include "bdbc/error.hpp"
#include "bdbc/parallel.hpp"
#include "bdbc/rng.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace bdbc {

namespace {

Labels nearest_centers(const Matrix& x, const Matrix& centers, Vector& dist2) {
  const Index n = x.rows();
  Labels labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centers.rows(); ++c) {
      const double d = (x.row(i) - centers.row(c)).squaredNorm();
      if (d < bd) {
        bd = d;
        best = c;
      }
    }
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    dist2[i] = bd;
  }
  return labels;
}

Matrix kmeanspp_centers(const Matrix& x, int g, Rng& rng) {
  const Index n = x.rows();
  Matrix centers(g, x.cols());
  centers.row(0) = x.row(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
  Vector mind(n);
  for (Index i = 0; i < n; ++i) {
    mind[i] = (x.row(i) - centers.row(0)).squaredNorm();
  }
  for (int c = 1; c < g; ++c) {
    const double total = mind.sum();
    Index pick = 0;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        acc += mind[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.row(c) = x.row(pick);
    for (Index i = 0; i < n; ++i) {
      mind[i] = std::min(mind[i], (x.row(i) - centers.row(c)).squaredNorm());
    }
  }
  return centers;
}

} // namespace

void MixtureModel::validate() const {
  const auto gg = static_cast<std::size_t>(g());
  if (gg == 0 || static_cast<std::size_t>(means.rows()) != gg || covariances.size() != gg) {
    throw InputError("mixture model: inconsistent component count");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) {
      throw InputError("mixture model: non-positive component weight");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-10) {
    throw InputError("mixture model: weights do not sum to 1");
  }
  for (const auto& c : covariances) {
    if (c.p() != p()) {
      throw InputError("mixture model: covariance dimension differs from mean dimension");
    }
  }
}

double within_cluster_ss(const Matrix& x, const Labels& labels) {
  int g = 0;
  for (int l : labels) {
    g = std::max(g, l + 1);
  }
  Matrix sums = Matrix::Zero(g, x.cols());
  Vector counts = Vector::Zero(g);
  for (Index i = 0; i < x.rows(); ++i) {
    sums.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
    counts[labels[static_cast<std::size_t>(i)]] += 1.0;
  }
  double wcss = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    wcss += (x.row(i) - sums.row(l) / counts[l]).squaredNorm();
  }
  return wcss;
}

Labels kmeans(const Matrix& x, int g, int restarts, std::uint64_t seed, int max_iter) {
  const Index n = x.rows();
  if (g < 1 || g > n) {
    throw InputError("kmeans: need 1 <= g <= N, got g = " + std::to_string(g) +
                     " with N = " + std::to_string(n));
  }
  if (g == 1) {
    return Labels(static_cast<std::size_t>(n), 0);
  }
  Labels best;
  double best_wcss = std::numeric_limits<double>::infinity();
  Vector dist2(n);
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    Matrix centers = kmeanspp_centers(x, g, rng);
    Labels labels = nearest_centers(x, centers, dist2);
    for (int it = 0; it < max_iter; ++it) {
      Matrix sums = Matrix::Zero(g, x.cols());
      Vector counts = Vector::Zero(g);
      for (Index i = 0; i < n; ++i) {
        sums.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
        counts[labels[static_cast<std::size_t>(i)]] += 1.0;
      }
      for (int c = 0; c < g; ++c) {
        if (counts[c] > 0.0) {
          centers.row(c) = sums.row(c) / counts[c];
        } else {
          // empty cluster: restart it at the worst-fitted point
          Index far = 0;
          dist2.maxCoeff(&far);
          centers.row(c) = x.row(far);
          dist2[far] = 0.0;
        }
      }
      Labels next = nearest_centers(x, centers, dist2);
      if (next == labels) {
        break;
      }
      labels = std::move(next);
    }
    const double wcss = dist2.sum();
    if (wcss < best_wcss) {
      best_wcss = wcss;
      best = std::move(labels);
    }
  }
  return best;
}

EStepResult e_step(const Matrix& x, const MixtureModel& model) {
  const int g = model.g();
  if (x.cols() != model.p()) {
    throw InputError("e_step: data and model dimensions differ");
  }
  std::vector<BlockGaussian> dens;
  dens.reserve(static_cast<std::size_t>(g));
  Vector log_w(g);
  for (int c = 0; c < g; ++c) {
    dens.emplace_back(model.means.row(c).transpose(),
                      model.covariances[static_cast<std::size_t>(c)]);
    log_w[c] = std::log(model.weights[static_cast<std::size_t>(c)]);
  }
  EStepResult out;
  out.responsibilities.resize(x.rows(), g);
  Vector lp(g);
  for (Index i = 0; i < x.rows(); ++i) {
    const Vector xi = x.row(i).transpose();
    for (int c = 0; c < g; ++c) {
      lp[c] = log_w[c] + dens[static_cast<std::size_t>(c)].logpdf(xi);
    }
    const double m = lp.maxCoeff();
    if (!std::isfinite(m)) {
      throw NumericalError("e_step: every component density underflows at row " +
                           std::to_string(i));
    }
    const Vector e = (lp.array() - m).exp();
    const double s = e.sum();
    out.loglik += m + std::log(s);
    out.responsibilities.row(i) = (e / s).transpose();
  }
  return out;
}

MixtureModel m_step(const Matrix& x, const Matrix& responsibilities, const MStepOptions& opts,
                    const MixtureModel* previous) {
  const Index n = x.rows();
  const auto p = static_cast<int>(x.cols());
  const auto g = static_cast<int>(responsibilities.cols());
  if (responsibilities.rows() != n || g < 1) {
    throw InputError("m_step: responsibilities do not match the data");
  }
  if (!opts.k_auto && (opts.k < 1 || opts.k > p)) {
    throw InputError("m_step: k = " + std::to_string(opts.k) + " outside [1, " +
                     std::to_string(p) + "]");
  }
  const bool reuse = opts.keep_better_grouping && previous != nullptr && previous->g() == g &&
                     previous->p() == p;

  MixtureModel model;
  model.weights.resize(static_cast<std::size_t>(g));
  model.means.resize(g, p);
  model.covariances.reserve(static_cast<std::size_t>(g));
  const double min_mass =
      10.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(n);
  for (int c = 0; c < g; ++c) {
    const double mass = responsibilities.col(c).sum();
    if (!(mass >= min_mass)) {
      throw NumericalError("m_step: component " + std::to_string(c) +
                           " has degenerate responsibility mass " + std::to_string(mass));
    }
    model.weights[static_cast<std::size_t>(c)] = mass / static_cast<double>(n);
    const SampleStats st = compute_stats(x, responsibilities.col(c));
    model.means.row(c) = st.mean.transpose();

    int k = opts.k;
    if (opts.k_auto) {
      const auto [lo, hi] = default_k_range(p);
      k = hi >= lo ? select_k_silhouette(st.cov, lo, hi).k : 1;
    }
    ColumnGrouping grouping;
    if (k == 1) {
      grouping = ColumnGrouping::single(p);
    } else if (k == p) {
      grouping = ColumnGrouping::finest(p);
    } else {
      grouping = estimate_grouping(opts.method, st.cov, k, opts.estimator).grouping;
    }
    if (reuse) {
      const ColumnGrouping& old = previous->grouping(c);
      if (old != grouping && block_loglik(st.cov, old) > block_loglik(st.cov, grouping)) {
        grouping = old;
      }
    }
    model.covariances.push_back(project_block_diagonal(st.cov, grouping));
  }
  // renormalize away rounding in the mass sums
  double total = 0.0;
  for (double w : model.weights) {
    total += w;
  }
  for (double& w : model.weights) {
    w /= total;
  }
  return model;
}

FitReport em_fit(const Matrix& x, const EmOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const Index n = x.rows();
  if (opts.g < 1 || n <= opts.g) {
    throw InputError("em_fit: need N > g >= 1, got g = " + std::to_string(opts.g) +
                     " with N = " + std::to_string(n));
  }
  if (opts.max_iter < 1 || !(opts.tol > 0.0)) {
    throw InputError("em_fit: max_iter must be >= 1 and tol > 0");
  }
  FitReport rep;
  rep.seed = opts.seed;
  rep.k = opts.mstep.k;
  rep.method = opts.mstep.method;
  Matrix resp = Matrix::Zero(n, opts.g);
  try {
    const Labels init = kmeans(x, opts.g, opts.kmeans_restarts, opts.seed);
    for (Index i = 0; i < n; ++i) {
      resp(i, init[static_cast<std::size_t>(i)]) = 1.0;
    }
    MixtureModel model = m_step(x, resp, opts.mstep);
    for (int it = 1; it <= opts.max_iter; ++it) {
      EStepResult es = e_step(x, model);
      rep.loglik_trace.push_back(es.loglik);
      resp = std::move(es.responsibilities);
      const std::size_t t = rep.loglik_trace.size();
      if (t >= 3) {
        const double l0 = rep.loglik_trace[t - 3];
        const double l1 = rep.loglik_trace[t - 2];
        const double l2 = rep.loglik_trace[t - 1];
        if (l2 == l1) {
          rep.converged = true;
        } else if (l1 != l0) {
          // Aitken acceleration and the extrapolated limit
          const double a = (l2 - l1) / (l1 - l0);
          if (a != 1.0) {
            const double l_inf = l1 + (l2 - l1) / (1.0 - a);
            rep.converged = std::abs(l_inf - l2) < opts.tol;
          }
        }
      }
      if (rep.converged || it == opts.max_iter) {
        break;
      }
      model = m_step(x, resp, opts.mstep, &model);
    }
    rep.model = std::move(model);
  } catch (const NumericalError& e) {
    throw NumericalError("em_fit (g = " + std::to_string(opts.g) +
                         ", seed = " + std::to_string(opts.seed) + "): " + e.what());
  }
  rep.iterations = static_cast<int>(rep.loglik_trace.size());
  rep.row_assignment.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    resp.row(i).maxCoeff(&best);
    rep.row_assignment[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  rep.responsibilities = std::move(resp);
  rep.bic = bic(rep);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

int free_parameters(const MixtureModel& model) {
  int nu = (model.g() - 1) + model.g() * model.p();
  for (const auto& cov : model.covariances) {
    for (int m : cov.grouping.sizes()) {
      nu += m * (m + 1) / 2;
    }
  }
  return nu;
}

double bic(const FitReport& report) {
  const auto n = static_cast<double>(report.responsibilities.rows());
  return 2.0 * report.loglik() - free_parameters(report.model) * std::log(n);
}

GSelection select_g(const Matrix& x, const std::vector<int>& g_range, const EmOptions& base,
                    int starts, int threads) {
  if (g_range.empty()) {
    throw InputError("select_g: empty range of component counts");
  }
  if (starts < 1) {
    throw InputError("select_g: need at least one start per g");
  }
  struct Slot {
    std::optional<FitReport> fit;
    std::string error;
  };
  const std::size_t per_g = static_cast<std::size_t>(starts);
  std::vector<Slot> slots(g_range.size() * per_g);
  parallel_for(slots.size(), threads, [&](std::size_t t) {
    const int g = g_range[t / per_g];
    EmOptions opts = base;
    opts.g = g;
    opts.seed = derive_seed(base.seed, {static_cast<std::uint64_t>(g), t % per_g});
    try {
      slots[t].fit = em_fit(x, opts);
    } catch (const std::exception& e) {
      slots[t].error = e.what();
    }
  });

  GSelection out;
  bool have_best = false;
  for (std::size_t gi = 0; gi < g_range.size(); ++gi) {
    const FitReport* best_g = nullptr;
    std::string first_error;
    for (std::size_t r = 0; r < per_g; ++r) {
      const Slot& s = slots[gi * per_g + r];
      if (s.fit && (best_g == nullptr || s.fit->loglik() > best_g->loglik())) {
        best_g = &*s.fit;
      } else if (!s.fit && first_error.empty()) {
        first_error = s.error;
      }
    }
    if (best_g == nullptr) {
      out.failures.emplace_back(g_range[gi], first_error);
      continue;
    }
    out.table.emplace_back(g_range[gi], best_g->bic);
    if (!have_best || best_g->bic > out.best.bic) {
      out.best = *best_g;
      have_best = true;
    }
  }
  if (!have_best) {
    std::string msg = "select_g: every fit failed";
    for (const auto& [g, err] : out.failures) {
      msg += "; g = " + std::to_string(g) + ": " + err;
    }
    throw NumericalError(msg);
  }
  return out;
}

} // namespace bdbc
