#pragma once

#include "bdbc/blockstruct.hpp"
#include "bdbc/estimators.hpp"
#include "bdbc/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bdbc {

/// G-component Gaussian mixture whose covariances are block-diagonal, each
/// with its own column grouping.
struct MixtureModel {
  std::vector<double> weights;
  Matrix means; // G x p
  std::vector<BlockCovariance> covariances;

  int g() const { return static_cast<int>(weights.size()); }
  int p() const { return static_cast<int>(means.cols()); }
  const ColumnGrouping& grouping(int c) const {
    return covariances[static_cast<std::size_t>(c)].grouping;
  }
  /// Throws InputError on inconsistent shapes or weights off the simplex.
  void validate() const;
};

struct FitReport {
  MixtureModel model;
  Matrix responsibilities; // N x G
  Labels row_assignment;
  std::vector<double> loglik_trace;
  double bic = 0.0;
  bool converged = false;
  int iterations = 0;
  std::uint64_t seed = 0;
  int k = 0;
  Method method = Method::hierarchical;
  double wall_time = 0.0;

  double loglik() const { return loglik_trace.empty() ? 0.0 : loglik_trace.back(); }
};

/// k-means++ seeding followed by Lloyd iterations; the run with the smallest
/// within-cluster sum of squares out of `restarts` wins.
Labels kmeans(const Matrix& x, int g, int restarts, std::uint64_t seed, int max_iter = 300);

/// Within-cluster sum of squared distances to cluster means.
double within_cluster_ss(const Matrix& x, const Labels& labels);

struct EStepResult {
  Matrix responsibilities;
  double loglik = 0.0;
};

EStepResult e_step(const Matrix& x, const MixtureModel& model);

struct MStepOptions {
  int k = 1;
  Method method = Method::hierarchical;
  EstimatorOptions estimator;
  /// Pick K per component by silhouette instead of using `k`.
  bool k_auto = false;
  /// Keep the previous component grouping when it scores a higher
  /// block_loglik on the new S_g. Makes every iteration non-decreasing in
  /// the observed-data log-likelihood.
  bool keep_better_grouping = true;
};

/// Weights, weighted means, weighted MLE covariances S_g, then each S_g
/// projected onto the grouping the chosen estimator finds for it. Throws
/// NumericalError when a component's responsibility mass is degenerate.
MixtureModel m_step(const Matrix& x, const Matrix& responsibilities, const MStepOptions& opts,
                    const MixtureModel* previous = nullptr);

struct EmOptions {
  int g = 1;
  MStepOptions mstep;
  std::uint64_t seed = 0;
  int max_iter = 500;
  double tol = 1e-4;
  int kmeans_restarts = 10;
};

/// EM from hard k-means labels, stopped by the Aitken-extrapolated
/// log-likelihood (after at least three log-likelihood evaluations), by an
/// exactly flat step, or by max_iter.
FitReport em_fit(const Matrix& x, const EmOptions& opts);

/// Free parameters: (G - 1) + G p + sum over components and blocks of
/// m (m + 1) / 2.
int free_parameters(const MixtureModel& model);

/// 2 loglik - free_parameters log N (larger is better); N is the number of
/// rows in `report.responsibilities`.
double bic(const FitReport& report);

struct GSelection {
  FitReport best;
  std::vector<std::pair<int, double>> table; // (g, bic) for every successful g
  std::vector<std::pair<int, std::string>> failures;
};

/// Fits every g in `g_range` from `starts` seeds each, keeps the highest
/// log-likelihood per g, and returns the fit with the largest BIC.
GSelection select_g(const Matrix& x, const std::vector<int>& g_range, const EmOptions& base,
                    int starts = 1, int threads = 1);

} // namespace bdbc
